"""Unit tests against a mocked transport: no primary internals involved."""

import json

import httpx
import pytest

from verikit_client import (
    ClientConfig,
    ProtocolError,
    RewardClient,
    TransportError,
)


def _client(handler, **cfg) -> RewardClient:
    config = ClientConfig(base_url="http://svc", **cfg)
    return RewardClient(config, transport=httpx.MockTransport(handler))


def test_check_equivalence_decodes_wire():
    report = {
        "verdict": "equivalent", "epsilon": 0.0, "assessments": 200,
        "mismatches": 0, "undefined_skips": 0, "first_mismatch": None,
        "detail": None, "notes": [], "m": 4, "n": 50, "seed": 1,
        "stages": ["pure_random"], "wall_time": 0.01,
    }
    client = _client(lambda req: httpx.Response(200, json=report))
    result = client.check_equivalence("golden", "candidate")
    assert result.verdict == "equivalent"
    assert result.assessments == 200
    assert result.stages == ["pure_random"]


def test_request_shape():
    seen = {}

    def handler(req: httpx.Request) -> httpx.Response:
        seen["path"] = req.url.path
        seen["body"] = json.loads(req.content)
        return httpx.Response(200, json={
            "verdict": "equivalent", "epsilon": 0.0, "assessments": 1,
            "mismatches": 0, "undefined_skips": 0,
        })

    client = _client(handler)
    client.check_equivalence("G", "C", overrides={"m": 2, "n": 10})
    assert seen["path"] == "/v1/equivalence"
    assert seen["body"] == {
        "golden_source": "G", "candidate_source": "C",
        "overrides": {"m": 2, "n": 10},
    }


def test_reward_fn_signature():
    client = _client(lambda req: httpx.Response(200, json={
        "reward": 1.0, "format_ok": True, "epsilon": 0.0, "detail": None}))
    assert client.reward_fn("prompt", "response", "golden") == 1.0


def test_transport_error_raises_not_zero():
    calls = {"n": 0}

    def handler(req):
        calls["n"] += 1
        raise httpx.ConnectError("down")

    client = _client(handler, retries=2)
    with pytest.raises(TransportError):
        client.reward_fn("p", "r", "g")
    assert calls["n"] == 3  # initial try plus two retries


def test_server_5xx_retried_then_raises():
    calls = {"n": 0}

    def handler(req):
        calls["n"] += 1
        return httpx.Response(500, json={"detail": "boom"})

    client = _client(handler, retries=1)
    with pytest.raises(TransportError):
        client.check_equivalence("g", "c")
    assert calls["n"] == 2


def test_4xx_is_protocol_error_not_retried():
    calls = {"n": 0}

    def handler(req):
        calls["n"] += 1
        return httpx.Response(400, json={"code": "bad_request", "message": "nope"})

    client = _client(handler, retries=3)
    with pytest.raises(ProtocolError, match="bad_request"):
        client.check_equivalence("g", "c")
    assert calls["n"] == 1


def test_health_checks_protocol_version():
    client = _client(lambda req: httpx.Response(200, json={
        "status": "ok", "version": "9.9", "protocol": 99, "workers": 1}))
    with pytest.raises(ProtocolError, match="protocol 99"):
        client.health()


def test_reward_batch_bounded_fanout():
    def handler(req):
        return httpx.Response(200, json={
            "reward": 0.0, "format_ok": False, "epsilon": None, "detail": "x"})

    client = _client(handler, max_in_flight=2)
    rewards = client.reward_batch([("p", "r", "g")] * 7)
    assert rewards == [0.0] * 7


def test_config_validation():
    with pytest.raises(ValueError):
        ClientConfig(base_url="http://x", timeout=0)
    with pytest.raises(ValueError):
        ClientConfig(base_url="http://x", retries=-1)
    with pytest.raises(ValueError):
        ClientConfig(base_url="http://x", max_in_flight=0)

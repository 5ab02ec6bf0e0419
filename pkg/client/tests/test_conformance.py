"""Conformance against a live service: the client must reproduce the primary
toolkit's epsilon and reward bit-for-bit for corpus pairs."""

import json
import subprocess
import sys

import pytest

from conftest import RINGER
from verikit.corpus import load_corpus
from verikit.equiv import CheckConfig, check_sources
from verikit.mutate import generate_mutants
from verikit.front import parse_source
from verikit.rl import compute_reward
from verikit_client import ClientConfig, RewardClient, TransportError

FAST = {"m": 4, "n": 50, "seed": 77}


@pytest.fixture(scope="module")
def client(service_url):
    with RewardClient(ClientConfig(base_url=service_url)) as c:
        c.health()
        yield c


def _primary(golden: str, candidate: str):
    return check_sources(golden, candidate,
                         CheckConfig(m=FAST["m"], n=FAST["n"], seed=FAST["seed"]))


def test_epsilon_bit_for_bit_on_all_corpus_self_pairs(client):
    for design in load_corpus():
        via_client = client.check_equivalence(design.source, design.source,
                                              overrides=FAST)
        direct = _primary(design.source, design.source)
        assert via_client.verdict == direct.verdict, design.name
        assert via_client.epsilon == direct.epsilon, design.name
        assert via_client.assessments == direct.assessments, design.name
        assert via_client.undefined_skips == direct.undefined_skips, design.name


def test_epsilon_bit_for_bit_on_mutant_pairs(client):
    checked = 0
    for design in load_corpus()[:8]:
        muts = generate_mutants(parse_source(design.source), seed=5, count=2)
        for mut in muts:
            via_client = client.check_equivalence(design.source, mut.source,
                                                  overrides=FAST)
            direct = _primary(design.source, mut.source)
            assert via_client.verdict == direct.verdict, mut.id
            assert via_client.epsilon == direct.epsilon, mut.id
            assert via_client.mismatches == direct.mismatches, mut.id
            checked += 1
    assert checked >= 10


def test_reward_parity_with_primary(client):
    wrapped = f"<think>t</think><answer>```verilog\n{RINGER}\n```</answer>"
    mutant = RINGER.replace("motor = ring &", "motor = ring |")
    wrapped_bad = f"<think>t</think><answer>```verilog\n{mutant}\n```</answer>"
    cfg = CheckConfig(m=FAST["m"], n=FAST["n"], seed=FAST["seed"])
    cases = [(wrapped, 1.0), (wrapped_bad, 0.0), ("no tags at all", 0.0)]
    for response, want in cases:
        got = client.reward(RINGER, response, overrides=FAST)
        direct = compute_reward(response, RINGER, cfg)
        assert got.reward == direct == want


def test_reward_fn_adapter(client, service_url):
    wrapped = f"<think>t</think><answer>```verilog\n{RINGER}\n```</answer>"
    # the adapter carries a prompt argument but scores response vs golden
    assert client.reward_fn("design a ringer", wrapped, RINGER) == 1.0
    assert client.reward_fn("design a ringer", "garbage", RINGER) == 0.0


def test_reward_batch_matches_single(client):
    wrapped = f"<think>t</think><answer>```verilog\n{RINGER}\n```</answer>"
    triples = [("p", wrapped, RINGER), ("p", "garbage", RINGER)] * 3
    assert client.reward_batch(triples) == [1.0, 0.0] * 3


def test_matches_cli_epsilon(client, tmp_path):
    """Spot-check that the service-reported epsilon equals the primary CLI's."""
    golden = tmp_path / "golden.v"
    golden.write_text(RINGER)
    candidate = tmp_path / "cand.v"
    candidate.write_text(RINGER.replace("motor = ring &", "motor = ring |"))
    proc = subprocess.run(
        [sys.executable, "-m", "verikit.cli", "check",
         "--golden", str(golden), "--candidate", str(candidate),
         "--m", str(FAST["m"]), "--n", str(FAST["n"]),
         "--seed", str(FAST["seed"]), "--json"],
        capture_output=True, text=True, check=True,
    )
    cli_report = json.loads(proc.stdout)
    via_client = client.check_equivalence(golden.read_text(),
                                          candidate.read_text(), overrides=FAST)
    assert via_client.epsilon == cli_report["epsilon"]
    assert via_client.mismatches == cli_report["mismatches"]
    assert via_client.verdict == cli_report["verdict"]


def test_service_down_raises_transport_error():
    dead = RewardClient(ClientConfig(base_url="http://127.0.0.1:9",
                                     timeout=0.2, retries=1))
    with pytest.raises(TransportError):
        dead.reward_fn("p", "r", "g")

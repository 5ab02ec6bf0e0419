"""HTTP client for the reward service.

Exposes the two things an RL training loop needs: an equivalence check and
a (prompt, response, golden) -> reward adapter. Transport failures raise
after the retry budget instead of degrading to reward 0, so a training run
can tell "wrong code" apart from "infrastructure down". The service is
deterministic, which makes retries idempotent.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import httpx

__all__ = [
    "ClientConfig",
    "EquivalenceResult",
    "ProtocolError",
    "RewardClient",
    "RewardResult",
    "TransportError",
]

SUPPORTED_PROTOCOL = 1


class TransportError(Exception):
    """The service stayed unreachable or kept failing through the retries."""


class ProtocolError(Exception):
    """The service speaks a protocol version this client does not."""


@dataclass
class ClientConfig:
    base_url: str
    timeout: float = 120.0
    retries: int = 2
    max_in_flight: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.retries < 0:
            raise ValueError("retries cannot be negative")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")


@dataclass
class EquivalenceResult:
    verdict: str
    epsilon: float
    assessments: int
    mismatches: int
    undefined_skips: int
    first_mismatch: dict | None = None
    detail: str | None = None
    notes: list[str] = field(default_factory=list)
    m: int = 0
    n: int = 0
    seed: int = 0
    stages: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @classmethod
    def from_wire(cls, body: dict) -> "EquivalenceResult":
        return cls(
            verdict=body["verdict"],
            epsilon=body["epsilon"],
            assessments=body["assessments"],
            mismatches=body["mismatches"],
            undefined_skips=body["undefined_skips"],
            first_mismatch=body.get("first_mismatch"),
            detail=body.get("detail"),
            notes=list(body.get("notes") or []),
            m=body.get("m", 0),
            n=body.get("n", 0),
            seed=body.get("seed", 0),
            stages=list(body.get("stages") or []),
            wall_time=body.get("wall_time", 0.0),
        )


@dataclass
class RewardResult:
    reward: float
    format_ok: bool
    epsilon: float | None = None
    detail: str | None = None


class RewardClient:
    """Synchronous client; safe for concurrent use up to max_in_flight."""

    def __init__(self, config: ClientConfig,
                 transport: httpx.BaseTransport | None = None):
        self.config = config
        self._http = httpx.Client(base_url=config.base_url.rstrip("/"),
                                  timeout=config.timeout, transport=transport)
        self._gate = threading.Semaphore(config.max_in_flight)

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- plumbing -------------------------------------------------------------

    def _post(self, path: str, payload: dict) -> dict:
        last: Exception | None = None
        for _ in range(self.config.retries + 1):
            try:
                with self._gate:
                    resp = self._http.post(path, json=payload)
                if resp.status_code >= 500:
                    last = TransportError(f"server error {resp.status_code}")
                    continue
                if resp.status_code >= 400:
                    body = resp.json()
                    raise ProtocolError(
                        f"{resp.status_code}: {body.get('code')}: {body.get('message')}"
                    )
                return resp.json()
            except httpx.TransportError as e:
                last = e
        raise TransportError(str(last))

    def health(self) -> dict:
        try:
            resp = self._http.get("/healthz")
            resp.raise_for_status()
        except (httpx.TransportError, httpx.HTTPStatusError) as e:
            raise TransportError(str(e))
        body = resp.json()
        if body.get("protocol", SUPPORTED_PROTOCOL) != SUPPORTED_PROTOCOL:
            raise ProtocolError(
                f"service speaks protocol {body.get('protocol')}, "
                f"client supports {SUPPORTED_PROTOCOL}"
            )
        return body

    # -- API ------------------------------------------------------------------

    def check_equivalence(self, golden_source: str, candidate_source: str,
                          overrides: dict | None = None) -> EquivalenceResult:
        payload = {"golden_source": golden_source,
                   "candidate_source": candidate_source}
        if overrides:
            payload["overrides"] = overrides
        return EquivalenceResult.from_wire(self._post("/v1/equivalence", payload))

    def reward(self, golden_source: str, response_text: str,
               penalty: dict | None = None,
               overrides: dict | None = None) -> RewardResult:
        payload = {"golden_source": golden_source, "response_text": response_text}
        if penalty:
            payload["penalty"] = penalty
        if overrides:
            payload["overrides"] = overrides
        body = self._post("/v1/reward", payload)
        return RewardResult(reward=body["reward"], format_ok=body["format_ok"],
                            epsilon=body.get("epsilon"), detail=body.get("detail"))

    def reward_fn(self, prompt: str, response_text: str,
                  golden_source: str) -> float:
        """(prompt, response, golden) -> numeric, the adapter signature RL
        frameworks expect. The prompt is accepted for signature parity; the
        verdict depends only on the response and golden code."""
        return self.reward(golden_source, response_text).reward

    def reward_batch(self, items: Sequence[tuple[str, str, str]]) -> list[float]:
        """Batched reward_fn over (prompt, response, golden) triples, with
        at most max_in_flight requests outstanding."""
        results: list[float | None] = [None] * len(items)
        errors: list[Exception] = []

        def worker(idx: int, triple: tuple[str, str, str]):
            try:
                results[idx] = self.reward_fn(*triple)
            except Exception as e:  # re-raised below; nothing is swallowed
                errors.append(e)

        threads = [
            threading.Thread(target=worker, args=(i, t), daemon=True)
            for i, t in enumerate(items)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]
        return [r for r in results]  # type: ignore[return-value]

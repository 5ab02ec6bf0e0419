"""Binary reward with optional overlong penalty.

A response earns 1 when it is properly wrapped in
<think>...</think><answer>...</answer> with a fenced code block and the
extracted code is equivalent to the golden design; anything else earns 0.
The optional length penalty subtracts up to 1 as the response approaches
the length cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from verikit.curation.llm import FormatError, parse_tagged_response
from verikit.equiv import CheckConfig, EquivalenceReport, check_sources

__all__ = [
    "LengthPenaltyConfig",
    "RewardOutcome",
    "compute_reward",
    "overlong_penalty",
    "reward_outcome",
]


@dataclass(frozen=True)
class LengthPenaltyConfig:
    l_max: int = 16384
    l_cache: int = 1024

    def __post_init__(self):
        if not (0 < self.l_cache < self.l_max):
            raise ValueError("need 0 < l_cache < l_max")


def overlong_penalty(length: int, config: LengthPenaltyConfig | None = None) -> float:
    """Piecewise-linear deduction: 0 through l_max - l_cache, ramping to -1
    at l_max and flat beyond."""
    config = config or LengthPenaltyConfig()
    if length < 0:
        raise ValueError("length cannot be negative")
    knee = config.l_max - config.l_cache
    if length <= knee:
        return 0.0
    if length <= config.l_max:
        return -(length - knee) / config.l_cache
    return -1.0


@dataclass
class RewardOutcome:
    reward: float
    format_ok: bool
    epsilon: float | None = None
    detail: str | None = None
    report: EquivalenceReport | None = None


Checker = Callable[[str, str], EquivalenceReport]


def reward_outcome(
    response_text: str,
    golden_source: str,
    checker: Checker | CheckConfig | None = None,
    penalty: LengthPenaltyConfig | None = None,
    length: int | None = None,
) -> RewardOutcome:
    """Full reward evaluation with the evidence behind it.

    ``length`` defaults to the character count of the response; callers with
    a tokenizer can pass token counts instead.
    """
    if checker is None or isinstance(checker, CheckConfig):
        cfg = checker if isinstance(checker, CheckConfig) else CheckConfig()

        def run(golden: str, candidate: str) -> EquivalenceReport:
            return check_sources(golden, candidate, cfg)
    else:
        run = checker

    try:
        _thought, code, _warnings = parse_tagged_response(response_text)
        format_ok = True
    except FormatError as e:
        out = RewardOutcome(reward=0.0, format_ok=False, detail=str(e))
        code = None
    if code is not None:
        report = run(golden_source, code)
        reward = 1.0 if report.verdict == "equivalent" else 0.0
        detail = None
        if report.verdict != "equivalent":
            detail = report.detail or report.verdict
            if report.first_mismatch is not None:
                detail = f"{report.verdict}: first mismatch {report.first_mismatch}"
        out = RewardOutcome(reward=reward, format_ok=True, epsilon=report.epsilon,
                            detail=detail, report=report)
    if penalty is not None:
        n = len(response_text) if length is None else length
        out.reward += overlong_penalty(n, penalty)
    return out


def compute_reward(
    response_text: str,
    golden_source: str,
    checker: Checker | CheckConfig | None = None,
    penalty: LengthPenaltyConfig | None = None,
    length: int | None = None,
) -> float:
    return reward_outcome(response_text, golden_source, checker, penalty, length).reward

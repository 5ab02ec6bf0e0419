"""Clipped group-relative policy objective with dynamic sampling.

The loss operates on groups of G responses per prompt. Advantages are
group-normalized rewards (population std); the per-token term is
min(r * A, clip(r, 1 - eps_low, 1 + eps_high) * A), token-normalized per
group and averaged over groups. Groups must mix correct and incorrect
responses; uniform groups are filtered out before the loss sees them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

__all__ = [
    "ClipConfig",
    "GroupSample",
    "ResponseSample",
    "ZeroVarianceError",
    "dapo_objective",
    "dynamic_filter",
    "group_advantages",
]

VARIANCE_GUARD = 1e-6


class ZeroVarianceError(ValueError):
    """All rewards in a group equal: dynamic_filter should have removed it."""


@dataclass(frozen=True)
class ClipConfig:
    eps_low: float = 0.2
    eps_high: float = 0.28

    def __post_init__(self):
        if not (0 < self.eps_low <= self.eps_high):
            raise ValueError("need 0 < eps_low <= eps_high")


@dataclass
class ResponseSample:
    ratios: list[float]
    reward: float
    equivalent: bool

    def __post_init__(self):
        if not self.ratios:
            raise ValueError("a response needs at least one token")
        if any(r <= 0 for r in self.ratios):
            raise ValueError("probability ratios must be strictly positive")

    @property
    def length(self) -> int:
        return len(self.ratios)


@dataclass
class GroupSample:
    prompt_id: str
    responses: list[ResponseSample] = field(default_factory=list)

    def __post_init__(self):
        if len(self.responses) < 2:
            raise ValueError("a group needs G >= 2 responses")

    @property
    def rewards(self) -> list[float]:
        return [r.reward for r in self.responses]


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """(R_i - mean) / population std, one value per response.

    The advantage is shared by every token of response i. Raises
    ZeroVarianceError when the group is uniform (std below the guard),
    which signals a dynamic-sampling bypass upstream.
    """
    g = len(rewards)
    if g < 2:
        raise ValueError("need at least two rewards")
    mean = sum(rewards) / g
    var = sum((r - mean) ** 2 for r in rewards) / g
    std = math.sqrt(var)
    if std < VARIANCE_GUARD:
        raise ZeroVarianceError(f"group rewards {list(rewards)} have no variance")
    return [(r - mean) / std for r in rewards]


def dynamic_filter(group: GroupSample) -> bool:
    """Keep only groups containing both correct and incorrect responses."""
    n_ok = sum(1 for r in group.responses if r.equivalent)
    return 0 < n_ok < len(group.responses)


def dapo_objective(groups: Sequence[GroupSample],
                   clip: ClipConfig | None = None) -> float:
    """Token-normalized clipped surrogate, averaged over groups.

    This is the objective being maximized; callers wanting a loss negate it.
    """
    clip = clip or ClipConfig()
    if not groups:
        raise ValueError("no groups")
    lo, hi = 1.0 - clip.eps_low, 1.0 + clip.eps_high
    total = 0.0
    for group in groups:
        if not dynamic_filter(group):
            raise ZeroVarianceError(
                f"group {group.prompt_id!r} has uniform correctness; "
                "dynamic_filter must run first"
            )
        advantages = group_advantages(group.rewards)
        token_count = 0
        acc = 0.0
        for resp, adv in zip(group.responses, advantages):
            token_count += resp.length
            for r in resp.ratios:
                clipped = lo if r < lo else hi if r > hi else r
                a = r * adv
                b = clipped * adv
                acc += a if a < b else b
        total += acc / token_count
    return total / len(groups)

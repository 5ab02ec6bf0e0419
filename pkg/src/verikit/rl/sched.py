"""Adaptive generation-batch sizing.

r_valid tracks the worst batch effective ratio seen so far (monotone
non-increasing); each step starts its working ratio r_step there and lowers
it as generation rounds come back short. The next generation size is
ceil(b_remain / r_step), floored against r_floor so a near-zero ratio cannot
blow up memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["SchedulerState", "StepLedger", "finalize_step", "next_generation_size"]

R_FLOOR = 0.01


@dataclass
class SchedulerState:
    b_train: int
    r_valid: float = 1.0

    def __post_init__(self):
        if self.b_train < 1:
            raise ValueError("b_train must be positive")
        if not (0.0 < self.r_valid <= 1.0):
            raise ValueError("r_valid must be in (0, 1]")


@dataclass
class StepLedger:
    """Per-step bookkeeping: total generated, valid accumulated, and the
    working ratio for the next round."""

    r_step: float
    total_generated: int = 0
    n_valid: int = 0

    def record_round(self, generated: int, valid: int):
        self.total_generated += generated
        self.n_valid += valid
        if self.total_generated:
            self.r_step = min(self.r_step, self.n_valid / self.total_generated)


def next_generation_size(
    ledger: StepLedger,
    b_remain: int,
    b_train: int | None = None,
    dataset_remaining: int | None = None,
    r_floor: float = R_FLOOR,
) -> int:
    """ceil(b_remain / r_step), capped by the remaining dataset and by
    b_train / r_floor."""
    if b_remain < 1:
        raise ValueError("b_remain must be at least 1")
    ratio = max(ledger.r_step, r_floor)
    size = math.ceil(b_remain / ratio)
    if b_train is not None:
        size = min(size, math.ceil(b_train / r_floor))
    if dataset_remaining is not None:
        size = min(size, dataset_remaining)
    return max(size, 1) if dataset_remaining is None or dataset_remaining > 0 else 0


def finalize_step(ledger: StepLedger, state: SchedulerState) -> SchedulerState:
    """Fold the finished step's effective ratio into r_valid (min rule)."""
    if ledger.n_valid < state.b_train:
        raise ValueError(
            f"step incomplete: {ledger.n_valid} valid < b_train {state.b_train}"
        )
    ratio = ledger.n_valid / ledger.total_generated
    return SchedulerState(b_train=state.b_train,
                          r_valid=min(state.r_valid, ratio))

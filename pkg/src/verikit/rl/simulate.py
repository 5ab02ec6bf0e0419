"""Closed-loop sampling simulator: adaptive versus fixed generation.

The policy stand-in is an outcome stream, a deterministic function from
problem index to valid/invalid, so a problem regenerated after being wasted
yields the same outcome. One step consumes stream items in generation
rounds until b_train valid samples accumulate; the items after the
batch-completing one are wasted and the stream position rolls back to just
past it. Training batches are therefore consecutive b_train-blocks of the
valid subsequence in both modes, which is the batch-identity property: the
two modes differ only in how many samples they generate to get there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from verikit.rl.sched import R_FLOOR, SchedulerState, StepLedger, next_generation_size

__all__ = ["OutcomeStream", "SimulationStats", "ValidityProfile", "simulate_training"]

_M64 = (1 << 64) - 1


def _mix(seed: int, index: int) -> float:
    z = (seed * 0x9E3779B97F4A7C15 + index * 0xD1342543DE82EF95 + 1) & _M64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _M64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _M64
    z ^= z >> 31
    return (z >> 11) / float(1 << 53)


@dataclass(frozen=True)
class ValidityProfile:
    """Piecewise-linear validity over the stream, keyed by position
    fraction. Points must cover [0, 1] in increasing order."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 2 or self.points[0][0] != 0.0 or self.points[-1][0] != 1.0:
            raise ValueError("profile points must span fractions 0.0 to 1.0")
        fracs = [f for f, _ in self.points]
        if fracs != sorted(fracs):
            raise ValueError("profile fractions must be non-decreasing")

    def validity_at(self, fraction: float) -> float:
        fraction = min(max(fraction, 0.0), 1.0)
        pts = self.points
        for (f0, v0), (f1, v1) in zip(pts, pts[1:]):
            if fraction <= f1:
                if f1 == f0:
                    return v1
                t = (fraction - f0) / (f1 - f0)
                return v0 + t * (v1 - v0)
        return pts[-1][1]

    @staticmethod
    def decaying(start: float = 0.9, end: float = 0.2, shape: float = 2.0,
                 segments: int = 32) -> "ValidityProfile":
        """Convex decay from start to end: validity falls fast early, then
        flattens, which stresses fixed-size generation late in training."""
        pts = []
        for i in range(segments + 1):
            f = i / segments
            pts.append((f, end + (start - end) * (1.0 - f) ** shape))
        return ValidityProfile(points=tuple(pts))


@dataclass
class OutcomeStream:
    """Deterministic problem-index -> valid/invalid mapping."""

    length: int
    profile: ValidityProfile
    seed: int = 0

    def outcome(self, index: int) -> bool:
        if index < 0 or index >= self.length:
            raise IndexError(f"stream index {index} out of range")
        v = self.profile.validity_at(index / max(self.length - 1, 1))
        return _mix(self.seed, index) < v


@dataclass
class SimulationStats:
    mode: str
    b_train: int
    steps_completed: int
    exhausted: bool
    per_step_generated: list[int] = field(default_factory=list)
    per_step_wasted: list[int] = field(default_factory=list)
    batches: list[tuple[int, ...]] = field(default_factory=list)
    r_valid_trace: list[float] = field(default_factory=list)

    @property
    def total_generated(self) -> int:
        return sum(self.per_step_generated)

    @property
    def total_wasted(self) -> int:
        return sum(self.per_step_wasted)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "b_train": self.b_train,
            "steps_completed": self.steps_completed,
            "exhausted": self.exhausted,
            "total_generated": self.total_generated,
            "total_wasted": self.total_wasted,
            "per_step_generated": self.per_step_generated,
            "per_step_wasted": self.per_step_wasted,
            "r_valid_trace": self.r_valid_trace,
            "batch_sizes": [len(b) for b in self.batches],
        }


def simulate_training(
    stream: OutcomeStream,
    b_train: int,
    steps: int,
    mode: str = "adaptive",
    b_gen_fixed: int | None = None,
    r_floor: float = R_FLOOR,
) -> SimulationStats:
    """Replay the sampling loop against the stream.

    mode "adaptive" sizes each round from the running effective ratios;
    mode "fixed" always requests b_gen_fixed (defaulting to 2 * b_train).
    Both modes train on identical ordered batches; stream exhaustion before
    ``steps`` is reported, not fatal.
    """
    if mode not in ("adaptive", "fixed"):
        raise ValueError("mode must be 'adaptive' or 'fixed'")
    if mode == "fixed" and b_gen_fixed is None:
        b_gen_fixed = 2 * b_train
    state = SchedulerState(b_train=b_train)
    stats = SimulationStats(mode=mode, b_train=b_train, steps_completed=0,
                            exhausted=False)
    pos = 0
    outcome = stream.outcome
    for _step in range(steps):
        if pos >= stream.length:
            stats.exhausted = True
            break
        ledger = StepLedger(r_step=state.r_valid)
        batch: list[int] = []
        generated = 0
        used = 0  # items definitively consumed (position advance)
        start_pos = pos
        while len(batch) < b_train:
            remaining = stream.length - pos
            if remaining <= 0:
                break
            b_remain = b_train - len(batch)
            if mode == "adaptive":
                b_ge = next_generation_size(ledger, b_remain, b_train=b_train,
                                            dataset_remaining=remaining,
                                            r_floor=r_floor)
            else:
                b_ge = min(b_gen_fixed, remaining)
            chunk_valid = 0
            complete_at = None
            need = b_train - len(batch)
            for i in range(pos, pos + b_ge):
                if outcome(i):
                    chunk_valid += 1
                    if complete_at is None:
                        batch.append(i)
                        if chunk_valid == need:
                            complete_at = i
            generated += b_ge
            ledger.record_round(b_ge, chunk_valid)
            if complete_at is not None:
                pos = complete_at + 1
                break
            pos += b_ge
        if len(batch) < b_train:
            stats.exhausted = True
            break
        used = pos - start_pos
        state = SchedulerState(
            b_train=b_train,
            r_valid=min(state.r_valid, ledger.n_valid / ledger.total_generated),
        )
        stats.per_step_generated.append(generated)
        stats.per_step_wasted.append(generated - used)
        stats.batches.append(tuple(batch))
        stats.r_valid_trace.append(state.r_valid)
        stats.steps_completed += 1
    return stats

"""Reward function, group-relative policy loss, and adaptive sampling."""

from verikit.rl.rewards import (
    LengthPenaltyConfig,
    RewardOutcome,
    compute_reward,
    overlong_penalty,
    reward_outcome,
)
from verikit.rl.dapo import (
    ClipConfig,
    GroupSample,
    ResponseSample,
    ZeroVarianceError,
    dapo_objective,
    dynamic_filter,
    group_advantages,
)
from verikit.rl.sched import (
    SchedulerState,
    StepLedger,
    finalize_step,
    next_generation_size,
)
from verikit.rl.simulate import (
    OutcomeStream,
    SimulationStats,
    ValidityProfile,
    simulate_training,
)

__all__ = [
    "ClipConfig",
    "GroupSample",
    "LengthPenaltyConfig",
    "OutcomeStream",
    "ResponseSample",
    "RewardOutcome",
    "SchedulerState",
    "SimulationStats",
    "StepLedger",
    "ValidityProfile",
    "ZeroVarianceError",
    "compute_reward",
    "dapo_objective",
    "dynamic_filter",
    "finalize_step",
    "group_advantages",
    "next_generation_size",
    "overlong_penalty",
    "reward_outcome",
    "simulate_training",
]

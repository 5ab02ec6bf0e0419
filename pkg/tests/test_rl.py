import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from verikit.equiv import CheckConfig
from verikit.rl import (
    ClipConfig,
    GroupSample,
    LengthPenaltyConfig,
    ResponseSample,
    SchedulerState,
    StepLedger,
    ZeroVarianceError,
    compute_reward,
    dapo_objective,
    dynamic_filter,
    finalize_step,
    group_advantages,
    next_generation_size,
    overlong_penalty,
    reward_outcome,
)

FAST = CheckConfig(m=4, n=50)


def _wrap(code: str) -> str:
    return f"<think>plan</think><answer>```verilog\n{code}\n```</answer>"


# ---------------------------------------------------------------------------
# Reward
# ---------------------------------------------------------------------------


def test_reward_one_for_golden_response(ringer_src):
    assert compute_reward(_wrap(ringer_src), ringer_src, FAST) == 1.0


def test_reward_zero_without_tags(ringer_src):
    out = reward_outcome(f"```verilog\n{ringer_src}\n```", ringer_src, FAST)
    assert out.reward == 0.0 and out.format_ok is False


def test_reward_zero_for_mutant(ringer_src):
    mutant = ringer_src.replace("motor = ring &", "motor = ring |")
    out = reward_outcome(_wrap(mutant), ringer_src, FAST)
    assert out.reward == 0.0 and out.format_ok is True
    assert out.epsilon > 0
    assert "mismatch" in out.detail


def test_reward_zero_for_unparseable_code(ringer_src):
    out = reward_outcome(_wrap("module broken("), ringer_src, FAST)
    assert out.reward == 0.0 and out.format_ok is True
    assert "candidate" in out.detail


def test_reward_with_penalty(ringer_src):
    pen = LengthPenaltyConfig(l_max=16384, l_cache=1024)
    good = compute_reward(_wrap(ringer_src), ringer_src, FAST, penalty=pen,
                          length=15872)
    assert good == pytest.approx(0.5)  # 1 - 0.5
    bad = compute_reward("no tags", ringer_src, FAST, penalty=pen, length=16384)
    assert bad == pytest.approx(-1.0)  # 0 - 1


# ---------------------------------------------------------------------------
# Overlong penalty
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("length,value", [
    (0, 0.0), (15360, 0.0), (15361, -1 / 1024), (15872, -0.5),
    (16384, -1.0), (16385, -1.0), (1_000_000, -1.0),
])
def test_overlong_penalty_values(length, value):
    assert overlong_penalty(length) == pytest.approx(value, abs=1e-12)


def test_overlong_penalty_validation():
    with pytest.raises(ValueError):
        overlong_penalty(-1)
    with pytest.raises(ValueError):
        LengthPenaltyConfig(l_max=100, l_cache=100)


@given(st.integers(0, 40000), st.integers(0, 40000))
@settings(max_examples=200, deadline=None)
def test_overlong_penalty_monotone_nonincreasing(a, b):
    lo, hi = sorted((a, b))
    assert overlong_penalty(hi) <= overlong_penalty(lo)


def test_overlong_penalty_continuous_at_breakpoints():
    cfg = LengthPenaltyConfig()
    knee = cfg.l_max - cfg.l_cache
    for point in (knee, cfg.l_max):
        below = overlong_penalty(point - 1, cfg)
        at = overlong_penalty(point, cfg)
        above = overlong_penalty(point + 1, cfg)
        assert abs(at - below) <= 1.01 / cfg.l_cache
        assert abs(above - at) <= 1.01 / cfg.l_cache


# ---------------------------------------------------------------------------
# Advantages and objective
# ---------------------------------------------------------------------------


def test_group_advantages_examples():
    assert group_advantages([1, 1, 0, 0]) == [1.0, 1.0, -1.0, -1.0]
    adv = group_advantages([1, 0, 0, 0])
    assert adv[0] == pytest.approx(math.sqrt(3))
    assert adv[1] == pytest.approx(-1 / math.sqrt(3))
    with pytest.raises(ZeroVarianceError):
        group_advantages([1, 1, 1, 1])


@given(st.lists(st.sampled_from([0.0, 1.0]), min_size=2, max_size=16))
@settings(max_examples=300, deadline=None)
def test_advantages_normalized(rewards):
    if len(set(rewards)) < 2:
        with pytest.raises(ZeroVarianceError):
            group_advantages(rewards)
        return
    adv = group_advantages(rewards)
    g = len(adv)
    assert abs(sum(adv) / g) < 1e-9
    assert sum(a * a for a in adv) / g == pytest.approx(1.0, abs=1e-9)


@given(st.lists(st.sampled_from([0.0, 1.0]), min_size=2, max_size=8),
       st.floats(0.1, 10.0))
@settings(max_examples=200, deadline=None)
def test_advantages_scale_invariant(rewards, scale):
    if len(set(rewards)) < 2:
        return
    a = group_advantages(rewards)
    b = group_advantages([r * scale for r in rewards])
    for x, y in zip(a, b):
        assert x == pytest.approx(y, abs=1e-9)


def _group(spec):
    """spec: list of (ratios, reward)."""
    return GroupSample("p", [
        ResponseSample(ratios=r, reward=w, equivalent=w >= 1.0) for r, w in spec
    ])


def test_objective_symmetric_cancellation():
    g = _group([([1.0, 1.0], 1.0), ([1.0, 1.0], 0.0)])
    assert dapo_objective([g]) == pytest.approx(0.0)


def test_objective_clip_boundaries_exact():
    clip = ClipConfig(eps_low=0.2, eps_high=0.28)
    # positive advantage clips at exactly 1 + eps_high
    g = _group([([1.5], 1.0), ([1.0], 0.0)])
    # adv = [1, -1]; token terms: min(1.5, 1.28) = 1.28 and -1
    assert dapo_objective([g], clip) == pytest.approx((1.28 - 1.0) / 2, abs=1e-9)
    # negative advantage clips at exactly 1 - eps_low
    g2 = _group([([1.0], 1.0), ([0.5], 0.0)])
    # terms: 1*1 = 1; min(0.5*-1, 0.8*-1) = -0.8? no: min picks the smaller,
    # which is unclipped -0.5... the clipped floor applies to the max side
    assert dapo_objective([g2], clip) == pytest.approx((1.0 - 0.8) / 2, abs=1e-9)


def test_objective_inside_band_is_unclipped():
    clip = ClipConfig()
    g = _group([([1.0, 1.05], 1.0), ([0.9, 1.0], 0.0)])
    adv = group_advantages([1.0, 0.0])
    expect = (1.0 * adv[0] + 1.05 * adv[0] + 0.9 * adv[1] + 1.0 * adv[1]) / 4
    assert dapo_objective([g], clip) == pytest.approx(expect, abs=1e-12)


@given(st.lists(st.floats(0.801, 1.279), min_size=1, max_size=6),
       st.lists(st.floats(0.801, 1.279), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_objective_equals_unclipped_inside_band(r_good, r_bad):
    clip = ClipConfig(eps_low=0.2, eps_high=0.28)
    g = _group([(r_good, 1.0), (r_bad, 0.0)])
    adv = group_advantages([1.0, 0.0])
    tokens = len(r_good) + len(r_bad)
    expect = (sum(r * adv[0] for r in r_good) + sum(r * adv[1] for r in r_bad)) / tokens
    assert dapo_objective([g], clip) == pytest.approx(expect, rel=1e-12)


def test_objective_ratio_one_passes_advantage():
    g = _group([([1.0], 2.0), ([1.0], 0.0)])
    # advantages are normalized to [1, -1]; mean of (1, -1)/2 tokens = 0
    assert dapo_objective([g]) == pytest.approx(0.0)


def test_objective_rejects_uniform_group():
    g = GroupSample("p", [ResponseSample([1.0], 1.0, True),
                          ResponseSample([1.0], 1.0, True)])
    with pytest.raises(ZeroVarianceError):
        dapo_objective([g])


def test_objective_validates_ratios():
    with pytest.raises(ValueError, match="positive"):
        ResponseSample(ratios=[0.0], reward=1.0, equivalent=True)
    with pytest.raises(ValueError, match="at least one token"):
        ResponseSample(ratios=[], reward=1.0, equivalent=True)


def test_dynamic_filter():
    mixed = GroupSample("p", [ResponseSample([1.0], 1.0, True),
                              ResponseSample([1.0], 0.0, False)])
    all_true = GroupSample("p", [ResponseSample([1.0], 1.0, True),
                                 ResponseSample([1.0], 1.0, True)])
    all_false = GroupSample("p", [ResponseSample([1.0], 0.0, False),
                                  ResponseSample([1.0], 0.0, False)])
    assert dynamic_filter(mixed)
    assert not dynamic_filter(all_true)
    assert not dynamic_filter(all_false)


def test_clip_config_validation():
    with pytest.raises(ValueError):
        ClipConfig(eps_low=0.3, eps_high=0.2)
    with pytest.raises(ValueError):
        ClipConfig(eps_low=0.0, eps_high=0.2)


# ---------------------------------------------------------------------------
# Scheduler units
# ---------------------------------------------------------------------------


def test_next_generation_size_examples():
    assert next_generation_size(StepLedger(r_step=1.0), 64) == 64
    assert next_generation_size(StepLedger(r_step=0.5), 32) == 64


def test_algorithm_hand_trace():
    ledger = StepLedger(r_step=1.0)
    assert next_generation_size(ledger, 64, b_train=64) == 64
    ledger.record_round(64, 32)
    assert ledger.r_step == pytest.approx(0.5)
    assert next_generation_size(ledger, 32, b_train=64) == 64


def test_generation_size_caps():
    ledger = StepLedger(r_step=0.001)
    assert next_generation_size(ledger, 64, b_train=64) == 6400  # b_train / r_floor
    assert next_generation_size(ledger, 64, b_train=64, dataset_remaining=100) == 100


def test_finalize_step_examples():
    st0 = SchedulerState(b_train=64, r_valid=1.0)
    st1 = finalize_step(StepLedger(r_step=1.0, total_generated=128, n_valid=64), st0)
    assert st1.r_valid == pytest.approx(0.5)
    st2 = finalize_step(StepLedger(r_step=0.4, total_generated=100, n_valid=64),
                        SchedulerState(b_train=64, r_valid=0.4))
    assert st2.r_valid == pytest.approx(0.4)
    st3 = finalize_step(StepLedger(r_step=0.25, total_generated=256, n_valid=64),
                        SchedulerState(b_train=64, r_valid=0.4))
    assert st3.r_valid == pytest.approx(0.25)


def test_finalize_requires_complete_step():
    with pytest.raises(ValueError, match="incomplete"):
        finalize_step(StepLedger(r_step=1.0, total_generated=10, n_valid=5),
                      SchedulerState(b_train=64))


def test_scheduler_state_validation():
    with pytest.raises(ValueError):
        SchedulerState(b_train=0)
    with pytest.raises(ValueError):
        SchedulerState(b_train=1, r_valid=0.0)


@given(st.lists(st.floats(0.05, 3.0), min_size=1, max_size=5),
       st.lists(st.floats(0.05, 3.0), min_size=1, max_size=5))
@settings(max_examples=150, deadline=None)
def test_clipping_never_increases_objective(r_good, r_bad):
    """min(r*A, clip(r)*A) is bounded by the unclipped surrogate, and the
    bound only bites above the band for positive advantages or below it for
    negative ones."""
    clip = ClipConfig(eps_low=0.2, eps_high=0.28)
    g = _group([(r_good, 1.0), (r_bad, 0.0)])
    adv = group_advantages([1.0, 0.0])
    tokens = len(r_good) + len(r_bad)
    unclipped = (sum(r * adv[0] for r in r_good)
                 + sum(r * adv[1] for r in r_bad)) / tokens
    clipped = dapo_objective([g], clip)
    assert clipped <= unclipped + 1e-12
    in_band = all(0.8 <= r <= 1.28 for r in r_good) and \
        all(0.8 <= r <= 1.28 for r in r_bad)
    affected = any(r > 1.28 for r in r_good) or any(r < 0.8 for r in r_bad)
    if in_band:
        assert clipped == pytest.approx(unclipped, rel=1e-12)
    elif not affected:
        # ratios outside the band only on the harmless side leave it alone
        assert clipped == pytest.approx(unclipped, rel=1e-12)

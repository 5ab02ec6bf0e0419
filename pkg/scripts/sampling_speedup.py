#!/usr/bin/env python3
"""Adaptive vs fixed generation-batch sizing on a decaying-validity policy.

Replays both modes against the same outcome stream and reports generated
sample counts, per-half savings, and the batch-identity check.
"""

import argparse

from verikit.rl import OutcomeStream, ValidityProfile, simulate_training


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b-train", type=int, default=64)
    ap.add_argument("--b-gen", type=int, default=128)
    ap.add_argument("--steps", type=int, default=300)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--length", type=int, default=42_000)
    args = ap.parse_args()

    profile = ValidityProfile(points=((0.0, 0.9), (0.33, 0.55), (1.0, 0.2)))
    stream = OutcomeStream(length=args.length, profile=profile, seed=args.seed)
    adaptive = simulate_training(stream, b_train=args.b_train, steps=args.steps,
                                 mode="adaptive")
    fixed = simulate_training(stream, b_train=args.b_train, steps=args.steps,
                              mode="fixed", b_gen_fixed=args.b_gen)

    half = args.steps // 2
    print(f"steps completed: adaptive {adaptive.steps_completed}, "
          f"fixed {fixed.steps_completed}")
    print(f"batches identical: {adaptive.batches == fixed.batches}")
    print(f"total generated: adaptive {adaptive.total_generated}, "
          f"fixed {fixed.total_generated}")
    print(f"total wasted: adaptive {adaptive.total_wasted}, "
          f"fixed {fixed.total_wasted}")
    reduction = 1 - adaptive.total_generated / fixed.total_generated
    print(f"overall reduction: {reduction:.1%}")
    for name, lo, hi in (("first half", 0, half), ("second half", half, args.steps)):
        a = sum(adaptive.per_step_generated[lo:hi])
        f = sum(fixed.per_step_generated[lo:hi])
        print(f"{name}: adaptive {a}, fixed {f}, saved {f - a} "
              f"({1 - a / f:.1%})")
    print(f"final r_valid: {adaptive.r_valid_trace[-1]:.3f}")


if __name__ == "__main__":
    main()

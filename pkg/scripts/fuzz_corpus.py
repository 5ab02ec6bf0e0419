#!/usr/bin/env python3
"""Mutation campaign over the whole corpus.

Generates rule-based mutants per design, labels each with the stronger
oracle, and measures the checker's detection rate on killable mutants.
"""

import argparse
import time

from verikit.corpus import load_corpus
from verikit.equiv import CheckConfig
from verikit.mutate import merge_campaigns, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=14, help="mutants per design")
    ap.add_argument("--seed", type=int, default=20240809)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--n", type=int, default=1000)
    args = ap.parse_args()

    cfg = CheckConfig(m=args.m, n=args.n, seed=args.seed)
    t0 = time.monotonic()
    reports = []
    for design in load_corpus():
        rep = run_campaign(design.source, cfg, seed=args.seed, count=args.count,
                           design_name=design.name)
        reports.append(rep)
        print(f"{design.name:<22} gen={rep.generated:>3} killable={rep.killable:>3} "
              f"killed={rep.killed:>3} eq={rep.oracle_equivalent} unk={rep.unknown} "
              f"fk={rep.false_kills}")
    total = merge_campaigns(reports)
    print(f"\nTOTAL gen={total.generated} killable={total.killable} "
          f"killed={total.killed} survived={total.survived_killable} "
          f"oracle-eq={total.oracle_equivalent} unknown={total.unknown} "
          f"false-kills={total.false_kills}")
    print(f"detection rate {total.detection_rate:.3f} | "
          f"false-kill rate {total.false_kill_rate:.3f} | "
          f"{time.monotonic()-t0:.0f}s")


if __name__ == "__main__":
    main()

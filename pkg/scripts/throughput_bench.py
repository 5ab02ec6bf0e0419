#!/usr/bin/env python3
"""Batch-runner throughput across worker counts.

Reports instances/second per worker count and verifies the reports stay
byte-identical regardless of pool size.
"""

import argparse
import json

from verikit.batch import BatchJob, run_batch
from verikit.corpus import load_corpus
from verikit.equiv import CheckConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--pairs", type=int, default=24)
    ap.add_argument("--m", type=int, default=20)
    ap.add_argument("--n", type=int, default=200)
    args = ap.parse_args()

    corpus = load_corpus()[: args.pairs]
    job = BatchJob(pairs=[(d.name, d.source, d.source) for d in corpus],
                   config=CheckConfig(m=args.m, n=args.n, seed=20240809))

    def canon(reports):
        return json.dumps(
            [{k: v for k, v in r.items() if k != "wall_time"} for r in reports],
            sort_keys=True,
        )

    baseline = None
    base_rate = None
    for w in args.workers:
        reports, stats = run_batch(job, workers=w)
        blob = canon(reports)
        if baseline is None:
            baseline, base_rate = blob, stats.instances_per_second
        identical = blob == baseline
        speedup = stats.instances_per_second / base_rate
        print(f"workers={w:<2} {stats.instances_per_second:6.2f} inst/s  "
              f"speedup {speedup:4.2f}x  byte-identical={identical}")


if __name__ == "__main__":
    main()

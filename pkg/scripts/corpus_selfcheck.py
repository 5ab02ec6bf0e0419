#!/usr/bin/env python3
"""Golden-vs-golden sweep over the bundled corpus.

Every supported design must self-compare as equivalent with epsilon 0; the
refusal set must come back as unsupported. Prints one line per design plus
totals, mirroring the first acceptance criterion at full scale.
"""

import argparse
import time

from verikit.corpus import load_corpus, load_unsupported
from verikit.equiv import CheckConfig, check_sources


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20240809)
    args = ap.parse_args()

    cfg = CheckConfig(m=args.m, n=args.n, seed=args.seed)
    t0 = time.monotonic()
    failures = 0
    for design in load_corpus():
        t = time.monotonic()
        r = check_sources(design.source, design.source, cfg)
        ok = r.verdict == "equivalent" and r.epsilon == 0.0
        failures += not ok
        print(f"{design.name:<22} {design.category:<10} {r.verdict:<12} "
              f"eps={r.epsilon:<6g} assess={r.assessments:>7} "
              f"skips={r.undefined_skips:>6}  {time.monotonic()-t:5.2f}s"
              + ("" if ok else "  <-- FAIL"))
    for design in load_unsupported():
        r = check_sources(design.source, design.source, CheckConfig(m=2, n=20))
        ok = r.verdict == "unsupported"
        failures += not ok
        print(f"{design.name:<22} {'refusal':<10} {r.verdict:<12} {r.detail}")
    print(f"\n{failures} failures in {time.monotonic()-t0:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Randomized inequality search, from the command line.

Example:
    python scripts/fuzz_theorems.py --trials 5000 --seed 42
"""

import argparse
import json
import sys
import time

from potts_gks import FuzzConfig, fuzz
from potts_gks.verify import report_to_json_dict


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--q", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--J-max", type=float, default=3.0)
    ap.add_argument("--h-max", type=float, default=3.0)
    ap.add_argument("--density", type=float, default=0.5)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()

    config = FuzzConfig(
        trials=args.trials,
        seed=args.seed,
        q_values=tuple(args.q),
        n_range=(1, args.n_max),
        edge_density=args.density,
        J_range=(0.0, args.J_max),
        h_range=(0.0, args.h_max),
        tol=args.tol,
    )
    start = time.perf_counter()
    result = fuzz(config)
    elapsed = time.perf_counter() - start
    for report in result.failures:
        print(json.dumps(report_to_json_dict(report), sort_keys=True))
    summary = result.summary_dict()
    summary["seconds"] = round(elapsed, 2)
    print(json.dumps(summary, sort_keys=True))
    return 1 if result.failures else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run the full evaluation suite and write CSV reports plus a summary.

Studies: per-turn k-fold accuracy for both classifiers, trip-level
accuracy vs fused turn count, the factor analysis (route / car / driver),
the interpolation ablation, and the corrupted-label sweep. Reports land
in the output directory; summary.txt embeds the effective config so any
run can be reproduced from its own report.
"""

import argparse
import time

from turnprint.config import RunConfig
from turnprint.evalsuite import (
    benchmark_profiles,
    build_corpus,
    load_corpus,
    run_eval_suite,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--out", required=True, help="report directory")
    parser.add_argument("--corpus", help="saved corpus directory (see make_corpus.py)")
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--drivers", type=int, default=12)
    parser.add_argument("--trips", type=int, default=4)
    parser.add_argument("--turns", type=int, default=12)
    parser.add_argument("--quick", action="store_true", help="smaller, faster run")
    args = parser.parse_args()

    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)

    t0 = time.time()
    if args.corpus:
        corpus = load_corpus(args.corpus)
    else:
        corpus = build_corpus(
            benchmark_profiles(args.drivers),
            trips_per_driver=args.trips,
            turns_per_trip=args.turns,
            seed=cfg.seed,
        )
    report = run_eval_suite(cfg, corpus, args.out, quick=args.quick)

    print(f"reports written to {args.out} in {time.time() - t0:.0f}s")
    for kind, accuracy in report["maneuver"].items():
        print(f"  one-turn accuracy ({kind}): {accuracy:.4f}")
    curve = report["trip_curve"]
    print(f"  trip accuracy: {curve[1]:.4f} @1 turn -> {curve[8]:.4f} @8 turns")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Build a benchmark corpus and save it as a directory of trace CSVs.

The corpus uses the standard driver roster (D01..Dnn) with one shared set
of routes, so route identity carries no driver signal. Saved corpora are
the input for run_studies.py and `turnprint eval --corpus`.
"""

import argparse

from turnprint.evalsuite import benchmark_profiles, build_corpus, save_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--out", required=True, help="corpus directory to write")
    parser.add_argument("--drivers", type=int, default=12)
    parser.add_argument("--trips", type=int, default=4, help="trips per driver")
    parser.add_argument("--turns", type=int, default=12, help="turns per trip")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--noise-scale",
        type=float,
        default=1.0,
        help="scale both sensor-noise knobs of every driver",
    )
    args = parser.parse_args()

    profiles = benchmark_profiles(args.drivers, noise_scale=args.noise_scale)
    corpus = build_corpus(
        profiles,
        trips_per_driver=args.trips,
        turns_per_trip=args.turns,
        seed=args.seed,
    )
    save_corpus(corpus, args.out)
    print(
        f"wrote {len(corpus.trips)} trips "
        f"({args.drivers} drivers x {args.trips} trips x {args.turns} turns) "
        f"to {args.out}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

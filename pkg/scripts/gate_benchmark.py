#!/usr/bin/env python3
"""Open-set enrollment gate benchmark over random driver pairs.

Each trial draws two random drivers with distinct styles, enrolls a
mixture profile on three of driver A's trips, then checks that A's fourth
trip gates above the threshold while driver B's trip on the same route
gates below it. Prints the pass count and the margin distribution.
"""

import argparse

import numpy as np

from turnprint.config import RunConfig
from turnprint.enroll import fit_gmm, trip_loglikelihood
from turnprint.evalsuite import build_route, random_profile_pair
from turnprint.pipeline import trace_to_vectors
from turnprint.seeds import derive_seed
from turnprint.simgen import generate_trip


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--turns", type=int, default=12, help="turns per trip")
    parser.add_argument("--threshold", type=float, default=0.0)
    args = parser.parse_args()

    cfg = RunConfig()
    n_pass = 0
    same_scores, other_scores = [], []
    for i in range(args.pairs):
        seed_i = derive_seed(args.seed, "gate", i)
        rng = np.random.default_rng(seed_i)
        profile_a, profile_b = random_profile_pair(rng)
        routes = [
            build_route(
                np.random.default_rng(derive_seed(seed_i, "route", j)), args.turns
            )
            for j in range(4)
        ]
        trips_a = [
            trace_to_vectors(
                generate_trip(
                    profile_a, routes[j], seed=derive_seed(seed_i, "trip", "a", j)
                )[0],
                cfg,
            )
            for j in range(4)
        ]
        trip_b = trace_to_vectors(
            generate_trip(
                profile_b, routes[3], seed=derive_seed(seed_i, "trip", "b", 3)
            )[0],
            cfg,
        )
        enroll = np.vstack(
            [np.stack([v.values for v in trip]) for trip in trips_a[:3]]
        )
        model = fit_gmm(enroll, cfg.gmm_k, seed=derive_seed(seed_i, "gmm"))
        s_same = trip_loglikelihood(model, np.stack([v.values for v in trips_a[3]]))
        s_other = trip_loglikelihood(model, np.stack([v.values for v in trip_b]))
        same_scores.append(s_same)
        other_scores.append(s_other)
        if s_same > args.threshold > s_other:
            n_pass += 1

    same_scores = np.asarray(same_scores)
    other_scores = np.asarray(other_scores)
    print(f"gated correctly: {n_pass}/{args.pairs}")
    print(
        f"same-driver scores:  min {same_scores.min():+8.1f}  "
        f"median {np.median(same_scores):+8.1f}"
    )
    print(
        f"other-driver scores: max {other_scores.max():+8.1f}  "
        f"median {np.median(other_scores):+8.1f}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

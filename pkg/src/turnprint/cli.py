"""Command-line interface: simulate, extract, featurize, train, identify,
enroll, eval, perturb.

Exit codes: 0 on success, 2 for input errors (bad files, bad values),
3 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter

import numpy as np

from .classify import load_model, predict_labels, predict_trip_map, save_model, train
from .config import ConfigError, RunConfig
from .enroll import (
    ProfileTable,
    assign_or_new_driver,
    enroll_driver,
    load_profiles,
    save_profiles,
)
from .evalsuite import (
    benchmark_profiles,
    build_corpus,
    load_corpus,
    perturb,
    run_eval_suite,
)
from .features import read_features_csv, write_features_csv
from .pipeline import extract_turns, turns_to_vectors
from .simgen import (
    euler_rotation,
    generate_trip,
    load_profile,
    load_route,
    save_annotations,
)
from .trace import read_trace_csv, write_trace_csv
from .turns import read_turns_jsonl, write_turns_jsonl


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    profile = load_profile(args.profile)
    route = load_route(args.route)
    rotation = None
    if args.device_rotation:
        parts = [float(p) for p in args.device_rotation.split(",")]
        if len(parts) != 3:
            raise ValueError("--device-rotation wants 'roll,pitch,yaw' in degrees")
        rotation = euler_rotation(*parts)
    trace, annotations = generate_trip(
        profile,
        route,
        sample_period=args.sample_period,
        seed=cfg.seed,
        device_rotation=rotation,
    )
    write_trace_csv(trace, args.output)
    if args.truth:
        save_annotations(annotations, args.truth)
    print(f"wrote {trace.t.shape[0]} samples, {len(annotations)} maneuvers")
    return 0


def _cmd_extract(args) -> int:
    cfg = _load_config(args)
    trace = read_trace_csv(args.trace)
    turns = extract_turns(trace, cfg, interpolate=not args.no_interpolate)
    write_turns_jsonl(turns, args.output)
    print(f"extracted {len(turns)} turns")
    return 0


def _cmd_featurize(args) -> int:
    turns = read_turns_jsonl(args.turns)
    vectors = turns_to_vectors(
        turns, label=args.label, interpolated=not args.no_interpolate
    )
    write_features_csv(vectors, args.output)
    print(f"wrote {len(vectors)} feature vectors")
    return 0


def _cmd_train(args) -> int:
    cfg = _load_config(args)
    vectors = []
    for path in args.features:
        vectors.extend(read_features_csv(path))
    model = train(vectors, args.kind, seed=cfg.seed)
    save_model(model, args.output)
    print(
        f"trained {args.kind} on {len(vectors)} vectors, "
        f"{len(model.classes)} drivers"
    )
    return 0


def _cmd_identify(args) -> int:
    cfg = _load_config(args)
    model = load_model(args.model)
    vectors = read_features_csv(args.features)
    if not vectors:
        raise ValueError(f"no feature vectors in {args.features}")
    if model.kind == "nb":
        pred = predict_trip_map(model, vectors, priors=cfg.priors)
        result = {
            "predicted": pred.predicted,
            "n_turns_used": pred.n_turns_used,
            "log_scores": pred.log_scores,
        }
    else:
        labels = predict_labels(model, np.stack([v.values for v in vectors]))
        votes = Counter(labels.tolist())
        best = max(sorted(votes), key=lambda c: votes[c])
        result = {
            "predicted": best,
            "n_turns_used": len(vectors),
            "votes": dict(sorted(votes.items())),
        }
    payload = json.dumps(result, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0


def _cmd_enroll(args) -> int:
    cfg = _load_config(args)
    if args.table_in:
        table = load_profiles(args.table_in)
    else:
        table = ProfileTable(seed=cfg.seed)
    vectors = read_features_csv(args.features)
    if not vectors:
        raise ValueError(f"no feature vectors in {args.features}")
    if args.label:
        entry = enroll_driver(table, args.label, vectors, k=cfg.gmm_k)
        print(f"enrolled {entry.label} with {entry.n_vectors} vectors")
    else:
        label, created = assign_or_new_driver(
            table, vectors, threshold=cfg.gate_threshold, k=cfg.gmm_k
        )
        verb = "created" if created else "matched"
        print(f"{verb} {label}")
    save_profiles(table, args.output)
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args)
    if args.corpus:
        corpus = load_corpus(args.corpus)
    else:
        corpus = build_corpus(
            benchmark_profiles(args.drivers),
            trips_per_driver=args.trips,
            turns_per_trip=args.turns,
            seed=cfg.seed,
        )
    run_eval_suite(cfg, corpus, args.output, quick=args.quick)
    print(f"evaluation reports written to {args.output}")
    return 0


def _cmd_perturb(args) -> int:
    cfg = _load_config(args)
    trace = read_trace_csv(args.trace)
    out = perturb(
        trace,
        args.noise_sd,
        trigger=args.trigger,
        seed=cfg.seed,
        delta_bump=cfg.delta_bump,
    )
    write_trace_csv(out, args.output)
    print(f"perturbed trace written to {args.output}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turnprint",
        description="Driver fingerprinting from IMU turn dynamics.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic trip")
    p.add_argument("--profile", required=True, help="driver profile JSON")
    p.add_argument("--route", required=True, help="route script JSON")
    p.add_argument("-o", "--output", required=True, help="trace CSV to write")
    p.add_argument("--truth", help="ground-truth annotation JSON to write")
    p.add_argument("--sample-period", type=float, default=0.01)
    p.add_argument(
        "--device-rotation",
        help="emit in a rotated device frame: 'roll,pitch,yaw' degrees",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("extract", parents=[common], help="detect turns in a trace")
    p.add_argument("trace", help="trace CSV")
    p.add_argument("-o", "--output", required=True, help="turns JSONL to write")
    p.add_argument("--no-interpolate", action="store_true")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("featurize", parents=[common], help="turns to feature vectors")
    p.add_argument("turns", help="turns JSONL")
    p.add_argument("-o", "--output", required=True, help="features CSV to write")
    p.add_argument("--label", help="driver label to attach")
    p.add_argument("--no-interpolate", action="store_true")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train", parents=[common], help="train a classifier")
    p.add_argument("features", nargs="+", help="labeled feature CSVs")
    p.add_argument("--kind", choices=("nb", "rf"), default="rf")
    p.add_argument("-o", "--output", required=True, help="model JSON to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("identify", parents=[common], help="identify a trip's driver")
    p.add_argument("features", help="feature CSV for one trip")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("-o", "--output", help="also write the result JSON here")
    p.set_defaults(func=_cmd_identify)

    p = sub.add_parser("enroll", parents=[common], help="enroll or match a trip")
    p.add_argument("features", help="feature CSV for one trip")
    p.add_argument("--table-in", help="existing profile table JSONL")
    p.add_argument("-o", "--output", required=True, help="profile table to write")
    p.add_argument("--label", help="force-enroll under this driver label")
    p.set_defaults(func=_cmd_enroll)

    p = sub.add_parser("eval", parents=[common], help="run the evaluation suite")
    p.add_argument("-o", "--output", required=True, help="report directory")
    p.add_argument("--corpus", help="load a saved corpus directory instead")
    p.add_argument("--drivers", type=int, default=12)
    p.add_argument("--trips", type=int, default=4)
    p.add_argument("--turns", type=int, default=12)
    p.add_argument("--quick", action="store_true", help="smaller, faster run")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("perturb", parents=[common], help="noise countermeasure")
    p.add_argument("trace", help="trace CSV")
    p.add_argument("--noise-sd", type=float, required=True)
    p.add_argument("--trigger", choices=("always", "on_bump"), default="always")
    p.add_argument("-o", "--output", required=True, help="perturbed CSV to write")
    p.set_defaults(func=_cmd_perturb)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

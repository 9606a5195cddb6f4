"""Experiment harness: benchmark corpora, accuracy studies, report emission.

Everything here is deterministic from one root seed.  Per-experiment seeds
are derived by stable hashing (see seeds.derive_seed), so adding an
experiment never shifts another's random stream.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .classify import kfold_eval, predict_labels, predict_trip_map, train
from .config import RunConfig
from .enroll import corrupt_labels
from .features import FeatureVector
from .pipeline import trace_to_vectors
from .seeds import derive_seed
from .simgen import (
    DriverProfile,
    LaneChange,
    LeftTurn,
    ManeuverAnnotation,
    RightTurn,
    RouteScript,
    Stop,
    Straight,
    UTurn,
    generate_trip,
    load_annotations,
    save_annotations,
)
from .trace import RawTrace, read_trace_csv, write_trace_csv

# Benchmark driver knobs: (onset_frac, peak_yaw, yaw_jerk, pedal_gain,
# pedal_timing).  Three difficulty tiers: D01-D05 are far apart on every
# knob, D06-D08 sit between them, and D09-D12 form a tight cluster (steering
# shape nearly shared, small pedal offsets), so they are the hardest to
# tell apart turn by turn.  Accuracy should therefore fall (or hold) as the
# roster grows 5 -> 8 -> 12.
BENCHMARK_KNOBS = (
    (0.08, 0.42, 1.60, 1.90, 0.18),
    (0.30, 0.58, 1.15, 1.45, 0.36),
    (0.52, 0.74, 0.85, 1.00, 0.55),
    (0.74, 0.92, 0.60, 0.55, 0.72),
    (0.95, 1.10, 0.42, 0.15, 0.90),
    (0.20, 0.50, 1.35, 1.65, 0.27),
    (0.41, 0.66, 1.00, 1.20, 0.45),
    (0.63, 0.83, 0.72, 0.78, 0.63),
    (0.78, 0.53, 0.89, 0.93, 0.31),
    (0.83, 0.63, 0.93, 1.23, 0.41),
    (0.88, 0.58, 0.97, 1.08, 0.46),
    (0.93, 0.68, 0.91, 1.38, 0.36),
)

DEFAULT_JITTER_SD = 0.010
DEFAULT_ACCEL_NOISE_SD = 0.15

# Knob ranges for randomly drawn drivers (enrollment-gate benchmark).  Two
# independent draws from these ranges behave like two distinct people:
# almost surely far apart on at least one knob, unlike the deliberately
# confusable D09-D12 cluster above.
RANDOM_KNOB_RANGES = (
    ("onset_frac", 0.10, 0.90),
    ("peak_yaw", 0.50, 1.00),
    ("yaw_jerk", 0.50, 1.50),
    ("pedal_gain", 0.30, 1.70),
    ("pedal_timing", 0.25, 0.75),
)


def random_profile(
    rng: np.random.Generator,
    jitter_sd: float = DEFAULT_JITTER_SD,
    accel_noise_sd: float = DEFAULT_ACCEL_NOISE_SD,
) -> DriverProfile:
    """Draw a driver uniformly from the documented knob ranges."""
    knobs = {name: float(rng.uniform(lo, hi)) for name, lo, hi in RANDOM_KNOB_RANGES}
    return DriverProfile(
        steering_jitter_sd=jitter_sd, accel_noise_sd=accel_noise_sd, **knobs
    )


def knob_distance(a: DriverProfile, b: DriverProfile) -> float:
    """Euclidean distance in knob space, each knob scaled to its range."""
    return float(
        np.sqrt(
            sum(
                ((getattr(a, name) - getattr(b, name)) / (hi - lo)) ** 2
                for name, lo, hi in RANDOM_KNOB_RANGES
            )
        )
    )


def random_profile_pair(
    rng: np.random.Generator,
    min_distance: float = 0.65,
    jitter_sd: float = DEFAULT_JITTER_SD,
    accel_noise_sd: float = DEFAULT_ACCEL_NOISE_SD,
) -> tuple[DriverProfile, DriverProfile]:
    """Two random drivers with distinct behavior.

    The second draw is repeated until its scaled knob distance from the
    first clears ``min_distance``.  Mistaking two near-identical drivers
    for each other is not an attribution error, so the pair benchmark
    only scores pairs whose styles genuinely differ.
    """
    a = random_profile(rng, jitter_sd, accel_noise_sd)
    while True:
        b = random_profile(rng, jitter_sd, accel_noise_sd)
        if knob_distance(a, b) >= min_distance:
            return a, b


def benchmark_profiles(
    n: int = 12,
    jitter_sd: float = DEFAULT_JITTER_SD,
    accel_noise_sd: float = DEFAULT_ACCEL_NOISE_SD,
    noise_scale: float = 1.0,
) -> dict[str, DriverProfile]:
    """The standard driver roster, labeled D01..Dnn."""
    if not 1 <= n <= len(BENCHMARK_KNOBS):
        raise ValueError(f"n must be in [1, {len(BENCHMARK_KNOBS)}]")
    out = {}
    for i, (onset, peak, jerk, gain, timing) in enumerate(BENCHMARK_KNOBS[:n]):
        out[f"D{i + 1:02d}"] = DriverProfile(
            onset_frac=onset,
            peak_yaw=peak,
            yaw_jerk=jerk,
            pedal_gain=gain,
            pedal_timing=timing,
            steering_jitter_sd=jitter_sd * noise_scale,
            accel_noise_sd=accel_noise_sd * noise_scale,
        )
    return out


def _default_radius(rng: np.random.Generator, direction: str) -> float:
    return float(rng.uniform(7.0, 11.0))


def build_route(
    rng: np.random.Generator,
    n_turns: int,
    radius_of=None,
    lane_change: bool = True,
) -> RouteScript:
    """Random suburban-style route: straights between left/right turns."""
    radius_of = radius_of or _default_radius
    segments: list = [
        Straight(duration=float(rng.uniform(5.0, 8.0)), speed=float(rng.uniform(8.5, 11.5)))
    ]
    for i in range(n_turns):
        direction = "right" if rng.random() < 0.5 else "left"
        radius = radius_of(rng, direction)
        segments.append(RightTurn(radius) if direction == "right" else LeftTurn(radius))
        segments.append(
            Straight(duration=float(rng.uniform(4.0, 7.0)), speed=float(rng.uniform(8.0, 11.5)))
        )
        if lane_change and i == n_turns // 2:
            segments.append(LaneChange())
            segments.append(Straight(duration=4.0, speed=float(rng.uniform(8.0, 11.0))))
    return RouteScript(tuple(segments))


def build_oracle_route(rng: np.random.Generator, n_turns: int = 6) -> RouteScript:
    """Route mixing turns with every confusable maneuver kind."""
    segments: list = [Straight(duration=6.0, speed=float(rng.uniform(9.0, 11.0)))]
    for i in range(n_turns):
        direction = "right" if rng.random() < 0.5 else "left"
        radius = float(rng.uniform(6.0, 13.0))
        segments.append(RightTurn(radius) if direction == "right" else LeftTurn(radius))
        segments.append(
            Straight(duration=float(rng.uniform(4.5, 7.0)), speed=float(rng.uniform(8.5, 11.0)))
        )
        if i == 1:
            segments.append(LaneChange())
            segments.append(Straight(duration=4.0, speed=10.0))
        if i == 3:
            segments.append(UTurn(radius=4.0, direction="left"))
            segments.append(Straight(duration=5.0, speed=10.0))
    segments.append(Stop(duration=4.0))
    return RouteScript(tuple(segments))


@dataclass
class Trip:
    driver: str
    name: str
    trace: RawTrace
    annotations: list[ManeuverAnnotation]


@dataclass
class Corpus:
    seed: int
    trips: list[Trip]

    def drivers(self) -> list[str]:
        return sorted({t.driver for t in self.trips})


def build_corpus(
    profiles: dict[str, DriverProfile],
    trips_per_driver: int = 4,
    turns_per_trip: int = 12,
    seed: int = 0,
    sample_period: float = 0.01,
    radius_of=None,
    trace_salt: str = "",
    route_builder=None,
) -> Corpus:
    """Generate one trip set; trip j uses the same route for every driver.

    Sharing routes across drivers means route identity carries no driver
    information, so classifiers must rely on behavior alone.  trace_salt
    varies the per-sample noise draws without touching the routes.
    """
    route_builder = route_builder or (
        lambda rng: build_route(rng, turns_per_trip, radius_of)
    )
    trips = []
    for label in sorted(profiles):
        for j in range(trips_per_driver):
            route_rng = np.random.default_rng(derive_seed(seed, "route", j))
            route = route_builder(route_rng)
            trace, annotations = generate_trip(
                profiles[label],
                route,
                sample_period=sample_period,
                seed=derive_seed(seed, "trip", trace_salt, label, j),
            )
            trips.append(Trip(label, f"{label}_t{j}", trace, annotations))
    return Corpus(seed=seed, trips=trips)


@dataclass
class TripVectors:
    driver: str
    name: str
    vectors: list[FeatureVector]


def extract_corpus(
    corpus: Corpus, cfg: RunConfig | None = None, interpolate: bool = True
) -> list[TripVectors]:
    return [
        TripVectors(
            t.driver,
            t.name,
            trace_to_vectors(t.trace, cfg, label=t.driver, interpolate=interpolate),
        )
        for t in corpus.trips
    ]


def flatten(trip_vectors: list[TripVectors]) -> list[FeatureVector]:
    return [v for tv in trip_vectors for v in tv.vectors]


def relabel(vectors: list[FeatureVector], label: str) -> list[FeatureVector]:
    return [
        FeatureVector(values=v.values, direction=v.direction, label=label)
        for v in vectors
    ]


def subset_by_labels(vectors: list[FeatureVector], labels) -> list[FeatureVector]:
    keep = set(labels)
    return [v for v in vectors if v.label in keep]


def maneuver_accuracy(
    vectors: list[FeatureVector],
    folds: int = 10,
    seed: int = 0,
    kinds: tuple[str, ...] = ("nb", "rf"),
) -> dict:
    """Single-turn identification accuracy per classifier kind."""
    return {
        kind: kfold_eval(vectors, kind, folds=folds, seed=derive_seed(seed, "kfold", kind))
        for kind in kinds
    }


def trip_curve(
    trip_vectors: list[TripVectors],
    max_turns: int = 8,
    iterations: int = 500,
    seed: int = 0,
) -> dict[int, float]:
    """Trip-level accuracy as a function of how many turns are fused.

    Trips are held out whole: for held-out index j, a naive Bayes model is
    trained on every other trip of every driver.  Each iteration draws a
    driver and max_turns distinct turns from their held-out trip, then
    scores the MAP prediction on every prefix, so the k-turn accuracies are
    paired and the improvement with k is measured on identical draws.
    """
    drivers = sorted({tv.driver for tv in trip_vectors})
    by_driver: dict[str, list[TripVectors]] = {d: [] for d in drivers}
    for tv in sorted(trip_vectors, key=lambda tv: tv.name):
        by_driver[tv.driver].append(tv)
    n_trips = min(len(v) for v in by_driver.values())
    if n_trips < 2:
        raise ValueError("trip curve needs at least 2 trips per driver")
    for d in drivers:
        for tv in by_driver[d][:n_trips]:
            if len(tv.vectors) < max_turns:
                raise ValueError(
                    f"trip {tv.name} has {len(tv.vectors)} turns, "
                    f"need at least {max_turns}"
                )

    models = []
    for j in range(n_trips):
        train_vectors = [
            v
            for d in drivers
            for i, tv in enumerate(by_driver[d][:n_trips])
            if i != j
            for v in tv.vectors
        ]
        models.append(train(train_vectors, "nb", seed=derive_seed(seed, "curve-model", j)))

    rng = np.random.default_rng(derive_seed(seed, "curve-draws"))
    hits = np.zeros(max_turns)
    for i in range(iterations):
        j = i % n_trips
        driver = drivers[rng.integers(len(drivers))]
        pool = by_driver[driver][j].vectors
        picks = rng.choice(len(pool), size=max_turns, replace=False)
        for k in range(1, max_turns + 1):
            pred = predict_trip_map(models[j], [pool[p] for p in picks[:k]])
            if pred.predicted == driver:
                hits[k - 1] += 1
    return {k: float(hits[k - 1] / iterations) for k in range(1, max_turns + 1)}


def factor_analysis(
    seed: int = 0,
    cfg: RunConfig | None = None,
    trips_per_side: int = 3,
    turns_per_trip: int = 14,
    folds: int = 5,
    kind: str = "rf",
) -> dict[str, float]:
    """Binary separability of controlled corpus pairs.

    Three contrasts: same driver on different routes, same driver in a
    noisier car on the same routes, and different drivers on the same
    routes.  Only the last should be learnable; the first two accuracies
    should hover near chance because the features track the driver, not the
    route or the vehicle.
    """
    profiles = benchmark_profiles(4)
    driver_a, driver_b = profiles["D02"], profiles["D03"]

    def side(profile, corpus_seed, salt="", noise_scale=1.0):
        p = replace(
            profile,
            steering_jitter_sd=profile.steering_jitter_sd * noise_scale,
            accel_noise_sd=profile.accel_noise_sd * noise_scale,
        )
        corpus = build_corpus(
            {"X": p},
            trips_per_driver=trips_per_side,
            turns_per_trip=turns_per_trip,
            seed=corpus_seed,
            trace_salt=salt,
        )
        return flatten(extract_corpus(corpus, cfg))

    def binary_accuracy(name, side_a, side_b):
        data = relabel(side_a, "a") + relabel(side_b, "b")
        report = kfold_eval(data, kind, folds=folds, seed=derive_seed(seed, "fa", name))
        return report.mean_accuracy

    out = {}
    out["same_driver_different_route"] = binary_accuracy(
        "route",
        side(driver_a, derive_seed(seed, "fa-route-a")),
        side(driver_a, derive_seed(seed, "fa-route-b")),
    )
    same_routes = derive_seed(seed, "fa-shared-routes")
    out["same_driver_different_car"] = binary_accuracy(
        "car",
        side(driver_a, same_routes, salt="car0"),
        side(driver_a, same_routes, salt="car1", noise_scale=1.15),
    )
    out["different_driver_same_route"] = binary_accuracy(
        "driver",
        side(driver_a, same_routes, salt="da"),
        side(driver_b, same_routes, salt="db"),
    )
    return out


def ablation_radius(rng: np.random.Generator, direction: str) -> float:
    """Radius law for the interpolation study: varied left, pinned right."""
    if direction == "left":
        return float(rng.uniform(4.5, 20.0))
    return 7.0


def interpolation_ablation(
    seed: int = 0,
    cfg: RunConfig | None = None,
    n_drivers: int = 5,
    trips_per_driver: int = 5,
    turns_per_trip: int = 16,
    folds: int = 5,
    kind: str = "rf",
) -> list[dict]:
    """Accuracy with vs without turn resampling on a radius-varied corpus.

    Left turns span radii 5-18 m (durations vary a lot) while right turns
    are pinned near 7 m, so resampling to a common length should help left
    turns more than right ones.  The roster differs only in steering shape
    (shared pedal knobs): drivers separable by pedal percentiles alone
    would saturate accuracy whether or not turns are resampled.
    """
    shape_knobs = ((0.40, 1.00), (0.46, 0.92), (0.52, 0.84), (0.58, 0.76), (0.64, 0.68))
    if not 2 <= n_drivers <= len(shape_knobs):
        raise ValueError(f"n_drivers must be in [2, {len(shape_knobs)}]")
    # low sensor noise: resampling doubles as a denoiser, and that benefit
    # accrues to both directions alike, masking the duration effect
    profiles = {
        f"S{i + 1:02d}": DriverProfile(
            onset_frac=onset,
            peak_yaw=0.62,
            yaw_jerk=jerk,
            pedal_gain=1.10,
            pedal_timing=0.40,
            steering_jitter_sd=0.004,
            accel_noise_sd=0.06,
        )
        for i, (onset, jerk) in enumerate(shape_knobs[:n_drivers])
    }
    corpus = build_corpus(
        profiles,
        trips_per_driver=trips_per_driver,
        turns_per_trip=turns_per_trip,
        seed=derive_seed(seed, "ablation-corpus"),
        radius_of=ablation_radius,
    )
    with_interp = flatten(extract_corpus(corpus, cfg, interpolate=True))
    without = flatten(extract_corpus(corpus, cfg, interpolate=False))

    rows = []
    for scope in ("all", "left", "right"):
        pick = lambda vs: [v for v in vs if scope == "all" or v.direction == scope]
        # same fold seed for both variants: the gap is then a paired
        # comparison, not confounded by fold composition
        fold_seed = derive_seed(seed, "abl", scope)
        acc_i = kfold_eval(
            pick(with_interp), kind, folds=folds, seed=fold_seed
        ).mean_accuracy
        acc_r = kfold_eval(
            pick(without), kind, folds=folds, seed=fold_seed
        ).mean_accuracy
        rows.append(
            {
                "scope": scope,
                "with_interpolation": acc_i,
                "without_interpolation": acc_r,
                "gap": acc_i - acc_r,
            }
        )
    return rows


def _stratified_split(
    y: np.ndarray, train_frac: float, rng: np.random.Generator
) -> np.ndarray:
    """Boolean mask of training rows, per-class proportional."""
    train = np.zeros(y.shape[0], dtype=bool)
    for label in sorted(set(y)):
        idx = rng.permutation(np.flatnonzero(y == label))
        n_train = max(1, int(round(train_frac * idx.shape[0])))
        train[idx[:n_train]] = True
    return train


def perr_sweep(
    vectors: list[FeatureVector],
    p_errs: tuple = (0, 5, 10, 15, 20),
    seed: int = 0,
    kind: str = "rf",
    train_frac: float = 0.75,
) -> list[tuple[float, float]]:
    """Accuracy vs fraction of corrupted training labels.

    One stratified split is reused for the whole sweep; corruption touches
    only the training half, and the test half stays pristine, so the curve
    isolates training-label damage.
    """
    y = np.asarray([v.label for v in vectors], dtype=object)
    rng = np.random.default_rng(derive_seed(seed, "perr-split"))
    train_mask = _stratified_split(y, train_frac, rng)
    train_vecs = [v for v, m in zip(vectors, train_mask) if m]
    test_x = np.stack([v.values for v, m in zip(vectors, train_mask) if not m])
    test_y = y[~train_mask]

    out = []
    for p in p_errs:
        corrupted = corrupt_labels(train_vecs, p, seed=derive_seed(seed, "perr", p))
        model = train(corrupted, kind, seed=derive_seed(seed, "perr-model", p))
        accuracy = float(np.mean(predict_labels(model, test_x) == test_y))
        out.append((float(p), accuracy))
    return out


def perturb(
    trace: RawTrace,
    noise_sd: float,
    trigger: str = "always",
    seed: int = 0,
    delta_bump: float = 0.15,
) -> RawTrace:
    """Obfuscation countermeasure: add Gaussian noise to gyro and accel.

    trigger="always" perturbs every sample; "on_bump" only samples whose
    yaw-rate magnitude already exceeds delta_bump, leaving quiet samples
    bitwise unchanged.  Noise is drawn for the full trace shape (gyro first,
    then accel) and masked, so the two triggers share one random stream.
    """
    if noise_sd < 0.0:
        raise ValueError("noise_sd must be nonnegative")
    if trigger not in ("always", "on_bump"):
        raise ValueError("trigger must be 'always' or 'on_bump'")
    gyro = trace.gyro.copy()
    accel = trace.accel.copy()
    if noise_sd > 0.0:
        rng = np.random.default_rng(seed)
        gyro_noise = rng.normal(0.0, noise_sd, gyro.shape)
        accel_noise = rng.normal(0.0, noise_sd, accel.shape)
        if trigger == "on_bump":
            mask = np.abs(trace.gyro).max(axis=1) > delta_bump
        else:
            mask = np.ones(gyro.shape[0], dtype=bool)
        gyro[mask] += gyro_noise[mask]
        accel[mask] += accel_noise[mask]
    return RawTrace(
        t=trace.t.copy(),
        gyro=gyro,
        accel=accel,
        mag=None if trace.mag is None else trace.mag.copy(),
        sample_period=trace.sample_period,
        already_aligned=trace.already_aligned,
    )


CORPUS_FORMAT = "turnprint-corpus"
CORPUS_VERSION = 1


def save_corpus(corpus: Corpus, dirpath) -> None:
    os.makedirs(dirpath, exist_ok=True)
    entries = []
    for trip in corpus.trips:
        trace_name = f"{trip.name}.csv"
        truth_name = f"{trip.name}.truth.json"
        write_trace_csv(trip.trace, os.path.join(dirpath, trace_name))
        save_annotations(trip.annotations, os.path.join(dirpath, truth_name))
        entries.append(
            {
                "driver": trip.driver,
                "name": trip.name,
                "trace": trace_name,
                "truth": truth_name,
            }
        )
    manifest = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "seed": corpus.seed,
        "trips": entries,
    }
    with open(os.path.join(dirpath, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_corpus(dirpath) -> Corpus:
    manifest_path = os.path.join(dirpath, "manifest.json")
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read corpus manifest {manifest_path}: {exc}") from exc
    if manifest.get("format") != CORPUS_FORMAT:
        raise ValueError(f"{dirpath} is not a corpus directory")
    if manifest.get("version") != CORPUS_VERSION:
        raise ValueError(f"unsupported corpus version {manifest.get('version')}")
    trips = []
    for entry in manifest["trips"]:
        trace = read_trace_csv(os.path.join(dirpath, entry["trace"]))
        annotations = load_annotations(os.path.join(dirpath, entry["truth"]))
        trips.append(Trip(str(entry["driver"]), str(entry["name"]), trace, annotations))
    return Corpus(seed=int(manifest["seed"]), trips=trips)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def run_eval_suite(
    cfg: RunConfig,
    corpus: Corpus,
    out_dir,
    iterations: int = 500,
    quick: bool = False,
) -> dict:
    """Run every study on one corpus and write CSV reports plus a summary.

    Emits maneuver_accuracy.csv, trip_accuracy.csv, factor_analysis.csv,
    interpolation_ablation.csv, perr_sweep.csv, and summary.txt (which
    embeds the full effective config for reproducibility).
    """
    os.makedirs(out_dir, exist_ok=True)
    folds = min(5, cfg.folds) if quick else cfg.folds
    iterations = min(100, iterations) if quick else iterations

    trip_vectors = extract_corpus(corpus, cfg)
    vectors = flatten(trip_vectors)
    report: dict = {}

    kfolds = maneuver_accuracy(vectors, folds=folds, seed=cfg.seed)
    report["maneuver"] = {k: r.mean_accuracy for k, r in kfolds.items()}
    _write_csv(
        os.path.join(out_dir, "maneuver_accuracy.csv"),
        ["classifier", "folds", "mean_accuracy", "fold_accuracies"],
        [
            [k, folds, f"{r.mean_accuracy:.4f}", " ".join(f"{a:.4f}" for a in r.fold_accuracies)]
            for k, r in kfolds.items()
        ],
    )

    curve = trip_curve(trip_vectors, iterations=iterations, seed=cfg.seed)
    report["trip_curve"] = curve
    _write_csv(
        os.path.join(out_dir, "trip_accuracy.csv"),
        ["n_turns", "accuracy", "iterations"],
        [[k, f"{a:.4f}", iterations] for k, a in sorted(curve.items())],
    )

    factors = factor_analysis(seed=cfg.seed, cfg=cfg, folds=folds)
    report["factor_analysis"] = factors
    _write_csv(
        os.path.join(out_dir, "factor_analysis.csv"),
        ["condition", "accuracy"],
        [[name, f"{acc:.4f}"] for name, acc in factors.items()],
    )

    ablation = interpolation_ablation(seed=cfg.seed, cfg=cfg, folds=folds)
    report["interpolation_ablation"] = ablation
    _write_csv(
        os.path.join(out_dir, "interpolation_ablation.csv"),
        ["scope", "with_interpolation", "without_interpolation", "gap"],
        [
            [
                r["scope"],
                f"{r['with_interpolation']:.4f}",
                f"{r['without_interpolation']:.4f}",
                f"{r['gap']:+.4f}",
            ]
            for r in ablation
        ],
    )

    drivers = corpus.drivers()
    sweep_vectors = subset_by_labels(vectors, drivers[: min(5, len(drivers))])
    sweep = perr_sweep(sweep_vectors, seed=cfg.seed)
    report["perr_sweep"] = sweep
    _write_csv(
        os.path.join(out_dir, "perr_sweep.csv"),
        ["p_err", "accuracy"],
        [[f"{p:g}", f"{a:.4f}"] for p, a in sweep],
    )

    lines = ["turn-based driver identification: evaluation summary", ""]
    lines.append(f"corpus: {len(corpus.trips)} trips, {len(drivers)} drivers, seed {corpus.seed}")
    lines.append(f"turns extracted: {len(vectors)}")
    lines.append("")
    for kind_name, acc in report["maneuver"].items():
        lines.append(f"one-turn accuracy ({kind_name}, {folds}-fold): {acc:.4f}")
    lines.append("")
    lines.append("trip-level accuracy by fused turn count:")
    for k, a in sorted(curve.items()):
        lines.append(f"  {k} turns: {a:.4f}")
    lines.append("")
    lines.append("factor analysis (binary separability):")
    for name, acc in factors.items():
        lines.append(f"  {name}: {acc:.4f}")
    lines.append("")
    lines.append("interpolation ablation:")
    for r in ablation:
        lines.append(
            f"  {r['scope']}: with {r['with_interpolation']:.4f} "
            f"without {r['without_interpolation']:.4f} gap {r['gap']:+.4f}"
        )
    lines.append("")
    lines.append("label-corruption sweep (rf):")
    for p, a in sweep:
        lines.append(f"  p_err {p:g}%: {a:.4f}")
    lines.append("")
    lines.append("effective config:")
    lines.append(cfg.to_toml().rstrip())
    lines.append("")
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
    return report

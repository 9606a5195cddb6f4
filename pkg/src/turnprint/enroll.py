"""Open-set driver enrollment with per-driver Gaussian mixture profiles.

Each enrolled driver gets a diagonal-covariance GMM fit to their turn
feature vectors.  A probe trip is scored against every profile by the mean
per-vector log density; if the best score clears the gate threshold the
trip is absorbed into that profile (which is refit), otherwise a new driver
profile is created.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureVector
from .seeds import derive_seed

GMM_MAX_ITER = 200
GMM_TOL = 1e-6
GMM_VARIANCE_FLOOR = 1e-6

PROFILE_FORMAT = "turnprint-profiles"
PROFILE_VERSION = 1


@dataclass
class GmmModel:
    """Diagonal-covariance Gaussian mixture over feature vectors."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    seed: int

    @property
    def k(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.means.shape[1])


def _component_log_density(x: np.ndarray, model: GmmModel) -> np.ndarray:
    """log w_k + log N(x | mu_k, v_k) for every vector/component, (n, k)."""
    out = np.empty((x.shape[0], model.k))
    for c in range(model.k):
        var = model.variances[c]
        quad = ((x - model.means[c]) ** 2 / var).sum(axis=1)
        out[:, c] = (
            math.log(model.weights[c])
            - 0.5 * (np.log(2.0 * np.pi * var).sum() + quad)
        )
    return out


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    peak = np.max(a, axis=axis, keepdims=True)
    return (peak + np.log(np.exp(a - peak).sum(axis=axis, keepdims=True))).squeeze(
        axis
    )


def vector_log_density(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """Per-vector mixture log density, shape (n,)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(
            f"expected (n, {model.n_features}) vectors, got shape {x.shape}"
        )
    return _logsumexp(_component_log_density(x, model), axis=1)


def trip_loglikelihood(model: GmmModel, x) -> float:
    """Gate statistic: mean per-vector log density of a probe trip.

    The mean (not the sum) keeps the statistic comparable across trips with
    different turn counts, so one fixed threshold works for all trips.
    """
    return float(vector_log_density(model, _stack_vectors(x)).mean())


def _kmeans_pp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centers by squared-distance sampling.

    Distances are measured in variance-standardized coordinates so that a
    strong split on small-scale dimensions (for feature vectors that is the
    left/right turn asymmetry) is not drowned out by large-scale ones.
    Returned centers are rows of x, i.e. in the original coordinates.
    """
    n = x.shape[0]
    scale = np.maximum(x.std(axis=0), 1e-12)
    z = x / scale
    picks = np.empty(k, dtype=np.int64)
    picks[0] = rng.integers(n)
    d2 = ((z - z[picks[0]]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining points coincide with a chosen center
            picks[c:] = picks[0]
            break
        picks[c] = rng.choice(n, p=d2 / total)
        d2 = np.minimum(d2, ((z - z[picks[c]]) ** 2).sum(axis=1))
    return x[picks].copy()


def fit_gmm(
    data,
    k: int,
    seed: int,
    max_iter: int = GMM_MAX_ITER,
    tol: float = GMM_TOL,
) -> GmmModel:
    """Fit a diagonal GMM by EM with k-means++ initialization.

    Deterministic given (data, k, seed).  Variances are floored at 1e-6 every
    M step, which also keeps single-point components finite.  Convergence is
    declared when the mean per-vector log likelihood moves by less than tol.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ValueError("training data must be a 2-d array of vectors")
    n, d = x.shape
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k:
        raise ValueError(f"need at least {k} vectors to fit {k} components")

    global_var = np.maximum(x.var(axis=0), GMM_VARIANCE_FLOOR)
    if k == 1:
        return GmmModel(
            weights=np.ones(1),
            means=x.mean(axis=0, keepdims=True),
            variances=global_var[None, :].copy(),
            seed=seed,
        )

    rng = np.random.default_rng(seed)
    model = GmmModel(
        weights=np.full(k, 1.0 / k),
        means=_kmeans_pp_centers(x, k, rng),
        variances=np.tile(global_var, (k, 1)),
        seed=seed,
    )

    prev_ll = -np.inf
    for _ in range(max_iter):
        joint = _component_log_density(x, model)
        per_vector = _logsumexp(joint, axis=1)
        ll = float(per_vector.sum())
        resp = np.exp(joint - per_vector[:, None])
        nk = np.maximum(resp.sum(axis=0), 1e-12)
        model.weights = nk / n
        model.means = (resp.T @ x) / nk[:, None]
        sq = resp.T @ (x**2) / nk[:, None] - model.means**2
        model.variances = np.maximum(sq, GMM_VARIANCE_FLOOR)
        if abs(ll - prev_ll) < tol:
            break
        prev_ll = ll
    return model


@dataclass
class ProfileEntry:
    """One enrolled driver: training vectors plus the fitted mixture."""

    label: str
    vectors: np.ndarray
    model: GmmModel
    k: int
    seed: int

    @property
    def n_vectors(self) -> int:
        return int(self.vectors.shape[0])


@dataclass
class ProfileTable:
    """Ordered set of enrolled drivers sharing one root seed."""

    seed: int
    entries: list[ProfileEntry] = field(default_factory=list)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    def find(self, label: str) -> ProfileEntry | None:
        for entry in self.entries:
            if entry.label == label:
                return entry
        return None


def _stack_vectors(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        x = np.asarray(vectors, dtype=float)
        return x.reshape(1, -1) if x.ndim == 1 else x
    rows = [
        v.values if isinstance(v, FeatureVector) else np.asarray(v, dtype=float)
        for v in vectors
    ]
    if not rows:
        raise ValueError("no vectors supplied")
    return np.stack(rows)


def enroll_driver(table: ProfileTable, label: str, vectors, k: int = 2) -> ProfileEntry:
    """Add a new driver profile fit to the given vectors."""
    if table.find(label) is not None:
        raise ValueError(f"driver {label!r} is already enrolled")
    x = _stack_vectors(vectors)
    entry_seed = derive_seed(table.seed, "enroll", label)
    entry = ProfileEntry(
        label=label,
        vectors=x,
        model=fit_gmm(x, k, entry_seed),
        k=k,
        seed=entry_seed,
    )
    table.entries.append(entry)
    return entry


def _next_label(table: ProfileTable) -> str:
    taken = set(table.labels())
    i = len(table.entries) + 1
    while f"D_{i}" in taken:
        i += 1
    return f"D_{i}"


def assign_or_new_driver(
    table: ProfileTable,
    vectors,
    threshold: float = 0.0,
    k: int = 2,
) -> tuple[str, bool]:
    """Attribute a probe trip to an enrolled driver or open a new profile.

    Returns (label, created).  On a match the probe vectors are appended to
    the winning entry and its mixture is refit with the entry's stored seed,
    so a table rebuilt from the same trips in the same order is identical.
    """
    x = _stack_vectors(vectors)
    best_entry = None
    best_score = -np.inf
    for entry in table.entries:
        score = trip_loglikelihood(entry.model, x)
        if score > best_score:
            best_entry, best_score = entry, score
    if best_entry is not None and best_score >= threshold:
        best_entry.vectors = np.vstack([best_entry.vectors, x])
        best_entry.model = fit_gmm(best_entry.vectors, best_entry.k, best_entry.seed)
        return best_entry.label, False
    entry = enroll_driver(table, _next_label(table), x, k=k)
    return entry.label, True


def corrupt_labels(vectors, p_err: float, seed: int = 0):
    """Return a copy with exactly ceil(p_err * n / 100) labels redrawn.

    Rows are chosen without replacement; each chosen row's label is redrawn
    uniformly from the sorted pool of labels present in the input, which may
    reproduce the original label.  Draw order: one choice() for the row set,
    then one label draw per corrupted row in ascending row order.
    """
    vectors = list(vectors)
    if not 0.0 <= p_err <= 100.0:
        raise ValueError("p_err must be a percentage in [0, 100]")
    if any(v.label is None for v in vectors):
        raise ValueError("all vectors must be labeled")
    n = len(vectors)
    m = math.ceil(p_err * n / 100.0)
    if m == 0 or n == 0:
        return [
            FeatureVector(values=v.values, direction=v.direction, label=v.label)
            for v in vectors
        ]
    pool = sorted({v.label for v in vectors})
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(n, size=m, replace=False))
    out = [
        FeatureVector(values=v.values, direction=v.direction, label=v.label)
        for v in vectors
    ]
    for i in rows:
        out[i] = FeatureVector(
            values=out[i].values,
            direction=out[i].direction,
            label=pool[rng.integers(len(pool))],
        )
    return out


def save_profiles(table: ProfileTable, path) -> None:
    """Write a profile table as JSONL: one header line, one line per driver."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": PROFILE_FORMAT,
            "version": PROFILE_VERSION,
            "seed": table.seed,
        }
        fh.write(json.dumps(header) + "\n")
        for entry in table.entries:
            record = {
                "label": entry.label,
                "k": entry.k,
                "seed": entry.seed,
                "weights": entry.model.weights.tolist(),
                "means": entry.model.means.tolist(),
                "variances": entry.model.variances.tolist(),
                "vectors": entry.vectors.tolist(),
            }
            fh.write(json.dumps(record) + "\n")


def load_profiles(path) -> ProfileTable:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"empty profile file {path}")
    header = json.loads(lines[0])
    if header.get("format") != PROFILE_FORMAT:
        raise ValueError("not a profile file")
    if header.get("version") != PROFILE_VERSION:
        raise ValueError(f"unsupported profile version {header.get('version')}")
    table = ProfileTable(seed=int(header["seed"]))
    for line in lines[1:]:
        raw = json.loads(line)
        model = GmmModel(
            weights=np.asarray(raw["weights"], dtype=float),
            means=np.asarray(raw["means"], dtype=float),
            variances=np.asarray(raw["variances"], dtype=float),
            seed=int(raw["seed"]),
        )
        table.entries.append(
            ProfileEntry(
                label=str(raw["label"]),
                vectors=np.asarray(raw["vectors"], dtype=float),
                model=model,
                k=int(raw["k"]),
                seed=int(raw["seed"]),
            )
        )
    return table

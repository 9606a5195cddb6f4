"""Per-turn features: EOT-axis acceleration and its stage-wise statistics.

Three base series are derived from each turn:

    F1  A_eot[n] = A[n] * sin(theta[n]), the heading-axis acceleration
        projected onto the end-of-turn axis
    F2  first differences of F1
    F3  first differences of the raw (unsmoothed) yaw rate

The turn is divided into 5 contiguous equal-duration stages.  F2 and F3 are
differenced within each stage from the stage's own samples, so no value
straddles a stage boundary.  Per (feature, stage) the vector holds the
{10, 25, 50, 75, 90}th percentiles and autocorrelations at lags 1-10:
3 features x 5 stages x 15 statistics = 225 values.  Means, variances,
minima and maxima are deliberately not included.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .turns import TurnSegment

PERCENTILES = (10, 25, 50, 75, 90)
AUTOCORR_LAGS = tuple(range(1, 11))
N_STAGES = 5
_STAT_NAMES = tuple(f"p{p}" for p in PERCENTILES) + tuple(
    f"ac{k}" for k in AUTOCORR_LAGS
)

FEATURE_NAMES: tuple[str, ...] = tuple(
    f"f{f}_s{s}_{stat}"
    for f in (1, 2, 3)
    for s in range(1, N_STAGES + 1)
    for stat in _STAT_NAMES
)

# Variance mass below which an autocorrelation is declared degenerate.
_DEGENERATE_VAR = 1e-12


@dataclass
class TurnFeatureSeries:
    """The three whole-turn base series (F2/F3 differenced globally here)."""

    a_eot: np.ndarray
    d_a_eot: np.ndarray
    d_yaw_raw: np.ndarray


@dataclass
class FeatureVector:
    """225 ordered statistics plus turn direction and an optional label."""

    values: np.ndarray
    direction: str
    label: str | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(FEATURE_NAMES),):
            raise ValueError(
                f"feature vector must have {len(FEATURE_NAMES)} values, "
                f"got shape {self.values.shape}"
            )


def heading_accel(turn: TurnSegment) -> np.ndarray:
    """Acceleration along the instantaneous heading axis, A[n].

    The heading unit vector at sample n is the start-of-turn axis rotated
    clockwise by theta[n]; in the turn's start-of-turn frame that is
    (sin theta, cos theta).  A[n] is the projection of the horizontal
    acceleration onto it.
    """
    theta = turn.heading
    return turn.accel_en[:, 0] * np.sin(theta) + turn.accel_en[:, 1] * np.cos(theta)


def a_eot(turn: TurnSegment) -> np.ndarray:
    """EOT-axis acceleration: A_eot[n] = A[n] * sin(theta[n])."""
    return heading_accel(turn) * np.sin(turn.heading)


def deltas(x: np.ndarray) -> np.ndarray:
    """First differences d[i] = x[i+1] - x[i]; length n-1."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("series too short for differences")
    return np.diff(x)


def percentile(x: np.ndarray, p: int) -> float:
    """Percentile by linear interpolation between closest order statistics.

    rank = p/100 * (n-1) on the sorted series; the value interpolates between
    the order statistics bracketing that rank.
    """
    if p not in PERCENTILES:
        raise ValueError(f"p must be one of {PERCENTILES}, got {p}")
    x = np.asarray(x, dtype=float)
    if x.shape[0] == 0:
        raise ValueError("empty series")
    return float(np.percentile(x, p))


def autocorr(x: np.ndarray, k: int) -> float:
    """Biased autocorrelation at lag k; exactly 0 for degenerate series.

    r_k = sum_{t<n-k} (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2.
    A series whose centered sum of squares is below 1e-12 (constant series,
    or the all-but-zero acceleration of a driver who has not begun steering)
    returns exactly 0.0.
    """
    if not 1 <= k <= 10:
        raise ValueError(f"lag must lie in 1..10, got {k}")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if k >= n:
        raise ValueError(f"lag {k} must be smaller than series length {n}")
    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    if denom < _DEGENERATE_VAR:
        return 0.0
    num = float(np.dot(centered[: n - k], centered[k:]))
    return num / denom


def compute_feature_series(turn: TurnSegment) -> TurnFeatureSeries:
    """The three base series for a turn (whole-turn differences for F2/F3)."""
    f1 = a_eot(turn)
    return TurnFeatureSeries(
        a_eot=f1,
        d_a_eot=deltas(f1),
        d_yaw_raw=deltas(turn.yaw_raw),
    )


def _stage_bounds(n: int) -> list[tuple[int, int]]:
    cuts = [i * n // N_STAGES for i in range(N_STAGES + 1)]
    return [(cuts[i], cuts[i + 1]) for i in range(N_STAGES)]


def _stats(x: np.ndarray) -> list[float]:
    out = [percentile(x, p) for p in PERCENTILES]
    out.extend(autocorr(x, k) for k in AUTOCORR_LAGS)
    return out


def build_feature_vector(
    turn: TurnSegment,
    label: str | None = None,
    *,
    interpolated: bool = True,
) -> FeatureVector:
    """Build the 225-value vector for one turn.

    The standard path requires an interpolated turn whose length is divisible
    by 5, giving stages of exactly L/5 samples.  Passing interpolated=False
    (used by the interpolation-ablation experiment) accepts a raw-length turn
    and splits it into 5 near-equal contiguous stages instead.
    """
    n = len(turn)
    if interpolated:
        if turn.interpolated_len is None:
            raise ValueError("turn must be interpolated first")
        if n != turn.interpolated_len or n % 5 != 0:
            raise ValueError("interpolated turn length must be divisible by 5")
    shortest_stage = min(b - a for a, b in _stage_bounds(n))
    # Each stage feeds lag-10 autocorrelations of its differenced series.
    if shortest_stage - 1 <= max(AUTOCORR_LAGS):
        raise ValueError(
            f"turn too short for stage statistics: stage of {shortest_stage} samples"
        )
    f1 = a_eot(turn)
    yaw_raw = turn.yaw_raw
    values: list[float] = []
    stage_slices = _stage_bounds(n)
    for source, differenced in ((f1, False), (f1, True), (yaw_raw, True)):
        for a, b in stage_slices:
            stage = source[a:b]
            if differenced:
                stage = deltas(stage)
            values.extend(_stats(stage))
    return FeatureVector(values=np.asarray(values), direction=turn.direction, label=label)


def write_features_csv(vectors: list[FeatureVector], path) -> None:
    """Write vectors as CSV: 225 named columns plus direction and label."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(FEATURE_NAMES) + ["direction", "label"])
        for v in vectors:
            row = [repr(float(x)) for x in v.values]
            row.append(v.direction)
            row.append("" if v.label is None else v.label)
            writer.writerow(row)


def read_features_csv(path) -> list[FeatureVector]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = list(FEATURE_NAMES) + ["direction", "label"]
        if header != expected:
            raise ValueError(f"unexpected feature CSV header in {path}")
        vectors = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(expected):
                raise ValueError(f"bad row width in {path}")
            values = np.asarray([float(v) for v in row[: len(FEATURE_NAMES)]])
            label = row[-1] or None
            vectors.append(
                FeatureVector(values=values, direction=row[-2], label=label)
            )
    return vectors

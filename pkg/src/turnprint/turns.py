"""Turn extraction: steering-event detection, left/right filtering, resampling.

Stage one scans the smoothed yaw rate for excursions beyond delta_bump and
extends each excursion outward until the magnitude falls to the near-zero
tolerance epsilon.  Stage two integrates each event's yaw rate into a heading
series and keeps only events whose net heading change lands in the 70-110
degree band; positive net change is a right turn under the clockwise-positive
yaw convention, negative is a left turn.

Within a retained TurnSegment all series are expressed in the start-of-turn
frame: the frame's North axis is the vehicle's travel direction at s_start
(the SOT axis) and its East axis points to the right of travel.  The
horizontal acceleration is rotated into this frame using the trace-level
bearing accumulated from the start of the trace, whose own initial travel
direction defines zero bearing.  This keeps per-turn features independent of
where in the route a turn occurs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .trace import AlignedTrace

logger = logging.getLogger(__name__)

DELTA_BUMP = 0.15
EPSILON = 0.02
TURN_BAND_DEG = (70.0, 110.0)

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class SteeringEvent:
    """A maximal yaw excursion, boundaries extended to the near-zero floor."""

    s_start: int
    s_end: int
    trace: AlignedTrace


@dataclass
class TurnSegment:
    """One retained left/right turn with its per-sample series.

    direction        "left" or "right"
    theta_final      net heading change over the event, radians
    yaw              smoothed yaw-rate series
    yaw_raw          unsmoothed yaw-rate series
    accel_en         (n, 2) horizontal acceleration in the start-of-turn frame
    heading          cumulative heading change series, heading[0] = 0
    sample_period    seconds between source samples
    start_s / end_s  event boundaries in trace time, seconds
    interpolated_len length L after interpolate_turn, None before
    """

    direction: str
    theta_final: float
    yaw: np.ndarray
    yaw_raw: np.ndarray
    accel_en: np.ndarray
    heading: np.ndarray
    sample_period: float
    start_s: float
    end_s: float
    interpolated_len: int | None = None

    def __len__(self) -> int:
        return int(self.yaw.shape[0])


def heading_series(yaw: np.ndarray, sample_period: float) -> np.ndarray:
    """Cumulative heading change by the rectangle rule.

    theta[n] = sum_{k=1..n} yaw[k] * T_s with theta[0] = 0, i.e. the sample
    at the window start contributes nothing and each later sample contributes
    one full period.
    """
    yaw = np.asarray(yaw, dtype=float)
    if yaw.ndim != 1 or yaw.shape[0] == 0:
        raise ValueError("yaw must be a nonempty 1-D series")
    theta = np.empty_like(yaw)
    theta[0] = 0.0
    if yaw.shape[0] > 1:
        theta[1:] = np.cumsum(yaw[1:] * sample_period)
    return theta


def detect_steering_events(
    trace: AlignedTrace,
    delta_bump: float = DELTA_BUMP,
    epsilon: float = EPSILON,
) -> list[SteeringEvent]:
    """Find steering events in the smoothed yaw-rate channel.

    One event per maximal region with |yaw| > delta_bump; each region's
    boundaries are moved outward to the nearest samples with |yaw| <= epsilon.
    Regions whose extended boundaries overlap merge into a single event.
    Excursions that run into a trace edge without ever settling below epsilon
    cannot be given sound boundaries and are dropped.
    """
    if not 0 < epsilon < delta_bump:
        raise ValueError("require 0 < epsilon < delta_bump")
    mag = np.abs(trace.yaw_rate)
    over = mag > delta_bump
    if not np.any(over):
        return []

    edges = np.flatnonzero(np.diff(over.astype(np.int8)))
    starts = edges[over[edges + 1]] + 1
    ends = edges[~over[edges + 1]]
    if over[0]:
        starts = np.concatenate(([0], starts))
    if over[-1]:
        ends = np.concatenate((ends, [len(mag) - 1]))

    quiet = np.flatnonzero(mag <= epsilon)
    intervals: list[tuple[int, int]] = []
    dropped_at_edge = 0
    for a, b in zip(starts, ends):
        k = int(np.searchsorted(quiet, a)) - 1
        j = int(np.searchsorted(quiet, b))
        if k < 0 or j >= quiet.shape[0]:
            dropped_at_edge += 1
            continue
        intervals.append((int(quiet[k]), int(quiet[j])))
    if dropped_at_edge:
        logger.info(
            "dropped %d excursion(s) reaching a trace edge before settling",
            dropped_at_edge,
        )

    merged: list[tuple[int, int]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return [SteeringEvent(s_start=lo, s_end=hi, trace=trace) for lo, hi in merged]


def _sot_frame_accel(trace: AlignedTrace, s_start: int, s_end: int) -> np.ndarray:
    """Rotate the event's East/North acceleration into the start-of-turn frame."""
    bearing = heading_series(trace.yaw_rate[: s_start + 1], trace.sample_period)[-1]
    c, s = math.cos(bearing), math.sin(bearing)
    a = trace.accel_en[s_start : s_end + 1]
    # Frame axes in East/North coordinates: local North = (sin b, cos b),
    # local East = (cos b, -sin b).
    local_e = a[:, 0] * c - a[:, 1] * s
    local_n = a[:, 0] * s + a[:, 1] * c
    return np.column_stack([local_e, local_n])


def classify_and_filter_turns(
    events: list[SteeringEvent],
    band_deg: tuple[float, float] = TURN_BAND_DEG,
) -> list[TurnSegment]:
    """Keep events whose net heading change is a left or right turn.

    The heading series over each event follows the rectangle-rule cumulative
    sum; events with |theta_final| inside the band become TurnSegments with
    direction assigned by sign.  Everything else (lane changes near 0, U-turns
    near 180) is dropped; drop counts are logged.
    """
    lo = math.radians(band_deg[0])
    hi = math.radians(band_deg[1])
    turns: list[TurnSegment] = []
    below = above = 0
    for ev in events:
        trace = ev.trace
        yaw = trace.yaw_rate[ev.s_start : ev.s_end + 1]
        heading = heading_series(yaw, trace.sample_period)
        theta_final = float(heading[-1])
        if abs(theta_final) < lo:
            below += 1
            continue
        if abs(theta_final) > hi:
            above += 1
            continue
        turns.append(
            TurnSegment(
                direction=RIGHT if theta_final > 0 else LEFT,
                theta_final=theta_final,
                yaw=yaw.copy(),
                yaw_raw=trace.yaw_raw[ev.s_start : ev.s_end + 1].copy(),
                accel_en=_sot_frame_accel(trace, ev.s_start, ev.s_end),
                heading=heading,
                sample_period=trace.sample_period,
                start_s=float(trace.t[ev.s_start]),
                end_s=float(trace.t[ev.s_end]),
            )
        )
    logger.info(
        "retained %d of %d steering events (%d below turn band, %d above)",
        len(turns),
        len(events),
        below,
        above,
    )
    return turns


def interpolate_turn(turn: TurnSegment, length: int = 100) -> TurnSegment:
    """Linearly resample all series onto `length` uniformly spaced points.

    Resampling happens in index space spanning the full event, so the first
    and last values of every series are preserved exactly; in particular
    heading[-1] stays equal to theta_final.
    """
    if length < 20 or length % 5 != 0:
        raise ValueError("interpolation length must be >= 20 and divisible by 5")
    n = len(turn)
    if n < 2:
        raise ValueError("turn too short to interpolate")
    src = np.arange(n, dtype=float)
    dst = np.linspace(0.0, float(n - 1), length)

    def resample(series: np.ndarray) -> np.ndarray:
        return np.interp(dst, src, series)

    return replace(
        turn,
        yaw=resample(turn.yaw),
        yaw_raw=resample(turn.yaw_raw),
        accel_en=np.column_stack(
            [resample(turn.accel_en[:, 0]), resample(turn.accel_en[:, 1])]
        ),
        heading=resample(turn.heading),
        interpolated_len=length,
    )


def write_turns_jsonl(turns: list[TurnSegment], path) -> None:
    """Write one JSON record per turn: direction, angles, and the series."""
    with open(path, "w", encoding="utf-8") as fh:
        for turn in turns:
            record = {
                "direction": turn.direction,
                "theta_final_deg": math.degrees(turn.theta_final),
                "start_s": turn.start_s,
                "end_s": turn.end_s,
                "L": turn.interpolated_len,
                "sample_period": turn.sample_period,
                "yaw": turn.yaw.tolist(),
                "yaw_raw": turn.yaw_raw.tolist(),
                "accel_en": turn.accel_en.tolist(),
                "heading": turn.heading.tolist(),
            }
            fh.write(json.dumps(record) + "\n")


def read_turns_jsonl(path) -> list[TurnSegment]:
    turns = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: bad JSON: {exc}") from exc
            heading = np.asarray(record["heading"], dtype=float)
            turns.append(
                TurnSegment(
                    direction=record["direction"],
                    theta_final=float(heading[-1]),
                    yaw=np.asarray(record["yaw"], dtype=float),
                    yaw_raw=np.asarray(record["yaw_raw"], dtype=float),
                    accel_en=np.asarray(record["accel_en"], dtype=float),
                    heading=heading,
                    sample_period=float(record["sample_period"]),
                    start_s=float(record["start_s"]),
                    end_s=float(record["end_s"]),
                    interpolated_len=record["L"],
                )
            )
    return turns

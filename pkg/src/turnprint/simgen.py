"""Deterministic synthetic IMU trip generator.

A trip is a route script (straights, turns, lane changes, U-turns, stops)
driven by a behavioral profile (steering onset, peak yaw rate, steering
jerk, pedal habits, noise levels).  The output is a RawTrace plus exact
ground-truth maneuver annotations, so detection and identification code can
be scored against a known answer.

Conventions match the rest of the package: yaw rate is clockwise-positive
(right turns integrate to +90 degrees), the east/north acceleration plane
follows the vehicle heading, and every trip starts pointing north (bearing
zero).  Output is fully determined by (profile, route, sample_period, seed).
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np

from .trace import RawTrace

DELTA_BUMP = 0.15
YAW_RATE_LIMIT = 3.0
REFERENCE_RADIUS = 10.0
STANDARD_GRAVITY = 9.80665

APPROACH_S = 1.8
EXIT_S = 1.2
ANNOTATION_PAD_S = 0.4
LANE_CHANGE_S = 2.8
STRAIGHT_ACCEL = 1.2

# field strength/dip typical of mid northern latitudes; east component zero
# so the horizontal projection of the mean field points exactly north
MAG_ENU_UT = (0.0, 19.0, -45.0)

# jitter must stay >= 6 sigma below the detection threshold so straight
# driving can never masquerade as a steering event
MAX_STEERING_JITTER_SD = 0.025


@dataclass(frozen=True)
class DriverProfile:
    """Behavioral knobs that shape every turn a driver takes.

    onset_frac places the steering effort early (0) or late (1) within the
    turn; peak_yaw is the preferred peak yaw rate at a 10 m radius corner;
    yaw_jerk caps how fast the yaw rate may ramp; pedal_gain and
    pedal_timing set the brake-then-throttle pattern through the turn.
    The two noise deviations model sensor and micro-steering noise.
    """

    onset_frac: float
    peak_yaw: float
    yaw_jerk: float
    pedal_gain: float
    pedal_timing: float
    steering_jitter_sd: float
    accel_noise_sd: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.onset_frac <= 1.0:
            raise ValueError("onset_frac must be in [0, 1]")
        if not self.peak_yaw > DELTA_BUMP:
            raise ValueError(f"peak_yaw must exceed {DELTA_BUMP} rad/s")
        if not self.yaw_jerk > 0.0:
            raise ValueError("yaw_jerk must be positive")
        if self.pedal_gain < 0.0:
            raise ValueError("pedal_gain must be nonnegative")
        if not 0.0 <= self.pedal_timing <= 1.0:
            raise ValueError("pedal_timing must be in [0, 1]")
        if not 0.0 <= self.steering_jitter_sd <= MAX_STEERING_JITTER_SD:
            raise ValueError(
                f"steering_jitter_sd must be in [0, {MAX_STEERING_JITTER_SD}]"
            )
        if not 0.0 <= self.accel_noise_sd <= 1.0:
            raise ValueError("accel_noise_sd must be in [0, 1]")


@dataclass(frozen=True)
class Straight:
    duration: float
    speed: float

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("straight duration must be positive")
        if self.speed < 0.0:
            raise ValueError("straight speed must be nonnegative")


@dataclass(frozen=True)
class LeftTurn:
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("turn radius must be positive")


@dataclass(frozen=True)
class RightTurn:
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("turn radius must be positive")


@dataclass(frozen=True)
class LaneChange:
    pass


@dataclass(frozen=True)
class UTurn:
    radius: float = 4.0
    direction: str = "left"

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("u-turn radius must be positive")
        if self.direction not in ("left", "right"):
            raise ValueError("u-turn direction must be 'left' or 'right'")


@dataclass(frozen=True)
class Stop:
    duration: float

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("stop duration must be positive")


Segment = Straight | LeftTurn | RightTurn | LaneChange | UTurn | Stop


@dataclass(frozen=True)
class RouteScript:
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("route must contain at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))


@dataclass(frozen=True)
class ManeuverAnnotation:
    """Ground-truth interval: kind, time span in seconds, signed total angle."""

    kind: str
    t_start: float
    t_end: float
    theta_total: float


@functools.lru_cache(maxsize=256)
def _bump_shape_constants(kappa: float) -> tuple[float, float]:
    """Area under and max slope of the unit bump S(u) = (1-cos(2 pi u^k))/2.

    Evaluated numerically on a fixed fine grid so both are deterministic
    functions of kappa with no quadrature knobs leaking into the API.
    """
    u = np.linspace(0.0, 1.0, 8001)
    s = 0.5 * (1.0 - np.cos(2.0 * np.pi * u**kappa))
    area = float(np.trapezoid(s, u))
    max_slope = float(np.max(np.abs(np.gradient(s, u))))
    return area, max_slope


def _onset_kappa(onset_frac: float) -> float:
    # warp exponent: < 1 front-loads the steering effort, > 1 delays it
    return 3.2 ** (onset_frac - 0.5)


def turn_bump_duration(profile: DriverProfile, radius: float, theta_total: float):
    """Resolve peak yaw rate and bump duration for one turn.

    The driver aims for peak_yaw scaled by sqrt(R_ref / radius), so tighter
    corners are taken with faster yaw.  That wish is capped by the steering
    jerk limit: the bump's max slope is w * M(kappa) / D and its area is
    w * D * I(kappa) = |theta|, which bounds the feasible peak at
    sqrt(yaw_jerk * |theta| / (M * I)).  Returns (peak, duration).
    """
    if radius <= 0.0:
        raise ValueError("turn radius must be positive")
    kappa = _onset_kappa(profile.onset_frac)
    area, max_slope = _bump_shape_constants(kappa)
    w_geom = profile.peak_yaw * math.sqrt(REFERENCE_RADIUS / radius)
    if w_geom > YAW_RATE_LIMIT:
        raise ValueError(
            f"infeasible segment: radius {radius} m implies yaw "
            f"{w_geom:.2f} rad/s > {YAW_RATE_LIMIT} rad/s"
        )
    w_jerk = math.sqrt(profile.yaw_jerk * abs(theta_total) / (max_slope * area))
    w_eff = min(w_geom, w_jerk)
    if w_eff <= DELTA_BUMP:
        raise ValueError(
            "infeasible segment: yaw_jerk limit keeps the bump peak below "
            "the detection threshold"
        )
    return w_eff, abs(theta_total) / (w_eff * area)


def _n_samples(duration: float, t_s: float) -> int:
    return max(1, int(round(duration / t_s)))


class _TripBuilder:
    """Accumulates per-sample nominal yaw, speed, and annotations."""

    def __init__(self, t_s: float, v0: float = 0.0):
        self.t_s = t_s
        self.yaw: list[np.ndarray] = []
        self.vdot: list[np.ndarray] = []
        self.v = v0
        self.n = 0
        self.annotations: list[ManeuverAnnotation] = []

    @property
    def t_now(self) -> float:
        return self.n * self.t_s

    def push(self, yaw: np.ndarray, vdot: np.ndarray) -> None:
        if yaw.shape != vdot.shape:
            raise AssertionError("segment arrays disagree")
        self.yaw.append(yaw)
        self.vdot.append(vdot)
        self.v += float(vdot.sum()) * self.t_s
        self.n += yaw.shape[0]

    def ramp_segment(self, duration: float, target_speed: float) -> None:
        """Constant-rate speed ramp toward target, then hold."""
        n = _n_samples(duration, self.t_s)
        vdot = np.zeros(n)
        dv = target_speed - self.v
        step = STRAIGHT_ACCEL * self.t_s
        n_full = min(n, int(abs(dv) // step))
        vdot[:n_full] = math.copysign(STRAIGHT_ACCEL, dv)
        if n_full < n:
            remainder = dv - math.copysign(n_full * step, dv)
            vdot[n_full] = remainder / self.t_s
        self.push(np.zeros(n), vdot)

    def turn_segment(
        self, profile: DriverProfile, radius: float, theta_total: float, kind: str
    ) -> None:
        t_s = self.t_s
        peak, bump_d = turn_bump_duration(profile, radius, theta_total)
        n_bump = max(2, int(round(bump_d / t_s)))
        kappa = _onset_kappa(profile.onset_frac)
        u = np.arange(n_bump) * t_s / bump_d
        shape = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.clip(u, 0.0, 1.0) ** kappa))
        bump = math.copysign(peak, theta_total) * shape
        # normalize the discrete sum so the rectangle-rule integral of the
        # emitted yaw over the bump equals theta_total exactly
        bump *= theta_total / (bump.sum() * t_s)

        pedal = 2.0 * profile.pedal_gain * (u - profile.pedal_timing)
        v_inside = self.v + np.cumsum(pedal) * t_s
        if self.v <= 0.0 or np.any(v_inside <= 0.0):
            raise ValueError(
                "infeasible segment: speed is non-positive during a turn"
            )

        n_app = _n_samples(APPROACH_S, t_s)
        n_exit = _n_samples(EXIT_S, t_s)
        bump_start = self.t_now + n_app * t_s
        bump_end = bump_start + n_bump * t_s
        self.annotations.append(
            ManeuverAnnotation(
                kind=kind,
                t_start=bump_start - ANNOTATION_PAD_S,
                t_end=bump_end + ANNOTATION_PAD_S,
                theta_total=theta_total,
            )
        )
        yaw = np.concatenate([np.zeros(n_app), bump, np.zeros(n_exit)])
        vdot = np.concatenate([np.zeros(n_app), pedal, np.zeros(n_exit)])
        self.push(yaw, vdot)

    def lane_change_segment(self, profile: DriverProfile) -> None:
        n = _n_samples(LANE_CHANGE_S, self.t_s)
        if self.v <= 0.0:
            raise ValueError("infeasible segment: lane change at standstill")
        w = max(0.3, 0.45 * profile.peak_yaw)
        yaw = w * np.sin(2.0 * np.pi * np.arange(n) / n)
        self.annotations.append(
            ManeuverAnnotation(
                kind="lane_change",
                t_start=self.t_now - ANNOTATION_PAD_S,
                t_end=self.t_now + n * self.t_s + ANNOTATION_PAD_S,
                theta_total=0.0,
            )
        )
        self.push(yaw, np.zeros(n))

    def stop_segment(self, duration: float) -> None:
        self.ramp_segment(duration, 0.0)


def _nominal_streams(
    profile: DriverProfile, route: RouteScript, t_s: float
) -> tuple[np.ndarray, np.ndarray, list[ManeuverAnnotation]]:
    builder = _TripBuilder(t_s)
    for seg in route.segments:
        if isinstance(seg, Straight):
            builder.ramp_segment(seg.duration, seg.speed)
        elif isinstance(seg, Stop):
            builder.stop_segment(seg.duration)
        elif isinstance(seg, RightTurn):
            builder.turn_segment(profile, seg.radius, math.pi / 2.0, "right")
        elif isinstance(seg, LeftTurn):
            builder.turn_segment(profile, seg.radius, -math.pi / 2.0, "left")
        elif isinstance(seg, UTurn):
            theta = math.pi if seg.direction == "right" else -math.pi
            builder.turn_segment(profile, seg.radius, theta, "u_turn")
        elif isinstance(seg, LaneChange):
            builder.lane_change_segment(profile)
        else:
            raise ValueError(f"unknown segment type {type(seg).__name__}")
    yaw = np.concatenate(builder.yaw)
    vdot = np.concatenate(builder.vdot)
    return yaw, vdot, builder.annotations


def euler_rotation(roll_deg: float, pitch_deg: float, yaw_deg: float) -> np.ndarray:
    """Device-to-world rotation from z-y-x Euler angles in degrees."""
    r, p, y = (math.radians(a) for a in (roll_deg, pitch_deg, yaw_deg))
    cr, sr = math.cos(r), math.sin(r)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


def generate_trip(
    profile: DriverProfile,
    route: RouteScript,
    sample_period: float = 0.01,
    seed: int = 0,
    device_rotation: np.ndarray | None = None,
) -> tuple[RawTrace, list[ManeuverAnnotation]]:
    """Simulate one trip; returns the trace and its ground-truth annotations.

    The trip starts at rest, pointing north.  Nominal yaw and speed streams
    are assembled per segment, heading is the integral of yaw, and planar
    acceleration follows from a = dv/dt * h + v * dpsi/dt * r with
    h = (sin psi, cos psi) and r = (cos psi, -sin psi).

    Exactly two random draws are made, in this order: per-sample steering
    jitter (added to the yaw-rate channel) and per-sample 2-d acceleration
    noise.  With device_rotation=None the trace is emitted already aligned
    (gz = yaw rate, ax/ay = east/north).  Otherwise the same streams are
    expressed in the rotated device frame together with a constant-field
    magnetometer, exercising the alignment path end to end.
    """
    if not 0.0 < sample_period <= 0.1:
        raise ValueError("sample_period must be in (0, 0.1] seconds")
    yaw_nom, vdot, annotations = _nominal_streams(profile, route, sample_period)
    n = yaw_nom.shape[0]
    if n < 2:
        raise ValueError("route is too short to produce a trace")

    v = np.cumsum(vdot) * sample_period
    # trapezoid integration of the nominal yaw; bearing starts at zero
    psi = np.concatenate(
        [[0.0], np.cumsum((yaw_nom[1:] + yaw_nom[:-1]) * (sample_period / 2.0))]
    )
    a_e = vdot * np.sin(psi) + v * yaw_nom * np.cos(psi)
    a_n = vdot * np.cos(psi) - v * yaw_nom * np.sin(psi)

    rng = np.random.default_rng(seed)
    yaw = yaw_nom + rng.normal(0.0, profile.steering_jitter_sd, n)
    accel_en = np.column_stack([a_e, a_n]) + rng.normal(
        0.0, profile.accel_noise_sd, (n, 2)
    )

    t = np.arange(n) * sample_period
    if device_rotation is None:
        gyro = np.zeros((n, 3))
        gyro[:, 2] = yaw
        accel = np.column_stack([accel_en, np.full(n, STANDARD_GRAVITY)])
        trace = RawTrace(
            t=t,
            gyro=gyro,
            accel=accel,
            mag=None,
            sample_period=sample_period,
            already_aligned=True,
        )
        return trace, annotations

    rot = np.asarray(device_rotation, dtype=float)
    if rot.shape != (3, 3) or not np.allclose(rot.T @ rot, np.eye(3), atol=1e-9):
        raise ValueError("device_rotation must be a 3x3 rotation matrix")
    # world-frame angular rate: clockwise-positive yaw is a negative
    # rotation about the up axis
    omega_enu = np.zeros((n, 3))
    omega_enu[:, 2] = -yaw
    force_enu = np.column_stack([accel_en, np.full(n, STANDARD_GRAVITY)])
    mag_enu = np.tile(np.asarray(MAG_ENU_UT), (n, 1))
    trace = RawTrace(
        t=t,
        gyro=omega_enu @ rot,
        accel=force_enu @ rot,
        mag=mag_enu @ rot,
        sample_period=sample_period,
        already_aligned=False,
    )
    return trace, annotations


_PROFILE_FIELDS = (
    "onset_frac",
    "peak_yaw",
    "yaw_jerk",
    "pedal_gain",
    "pedal_timing",
    "steering_jitter_sd",
    "accel_noise_sd",
)


def save_profile(profile: DriverProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({f: getattr(profile, f) for f in _PROFILE_FIELDS}, fh, indent=2)
        fh.write("\n")


def load_profile(path) -> DriverProfile:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"profile file {path} must hold a JSON object")
    unknown = set(raw) - set(_PROFILE_FIELDS)
    if unknown:
        raise ValueError(f"unknown profile fields: {sorted(unknown)}")
    missing = set(_PROFILE_FIELDS) - set(raw)
    if missing:
        raise ValueError(f"missing profile fields: {sorted(missing)}")
    return DriverProfile(**{k: float(v) for k, v in raw.items()})


def _segment_to_dict(seg: Segment) -> dict:
    if isinstance(seg, Straight):
        return {"kind": "straight", "duration": seg.duration, "speed": seg.speed}
    if isinstance(seg, LeftTurn):
        return {"kind": "left_turn", "radius": seg.radius}
    if isinstance(seg, RightTurn):
        return {"kind": "right_turn", "radius": seg.radius}
    if isinstance(seg, LaneChange):
        return {"kind": "lane_change"}
    if isinstance(seg, UTurn):
        return {"kind": "u_turn", "radius": seg.radius, "direction": seg.direction}
    if isinstance(seg, Stop):
        return {"kind": "stop", "duration": seg.duration}
    raise ValueError(f"unknown segment type {type(seg).__name__}")


def _segment_from_dict(raw: dict) -> Segment:
    kind = raw.get("kind")
    extra = {k: v for k, v in raw.items() if k != "kind"}
    try:
        if kind == "straight":
            return Straight(**extra)
        if kind == "left_turn":
            return LeftTurn(**extra)
        if kind == "right_turn":
            return RightTurn(**extra)
        if kind == "lane_change":
            return LaneChange(**extra)
        if kind == "u_turn":
            return UTurn(**extra)
        if kind == "stop":
            return Stop(**extra)
    except TypeError as exc:
        raise ValueError(f"bad fields for segment kind {kind!r}: {exc}") from exc
    raise ValueError(f"unknown segment kind {kind!r}")


def save_route(route: RouteScript, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        payload = {"segments": [_segment_to_dict(s) for s in route.segments]}
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_route(path) -> RouteScript:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "segments" not in raw:
        raise ValueError(f"route file {path} must hold a 'segments' list")
    return RouteScript(tuple(_segment_from_dict(s) for s in raw["segments"]))


def save_annotations(annotations: list[ManeuverAnnotation], path) -> None:
    records = [
        {
            "kind": a.kind,
            "t_start": a.t_start,
            "t_end": a.t_end,
            "theta_total": a.theta_total,
            "theta_total_deg": math.degrees(a.theta_total),
        }
        for a in annotations
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {"format": "turnprint-truth", "version": 1, "annotations": records},
            fh,
            indent=2,
        )
        fh.write("\n")


def load_annotations(path) -> list[ManeuverAnnotation]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if raw.get("format") != "turnprint-truth":
        raise ValueError(f"{path} is not an annotation file")
    return [
        ManeuverAnnotation(
            kind=str(a["kind"]),
            t_start=float(a["t_start"]),
            t_end=float(a["t_end"]),
            theta_total=float(a["theta_total"]),
        )
        for a in raw["annotations"]
    ]

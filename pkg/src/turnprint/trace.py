"""IMU trace ingestion: geo-frame alignment, despiking, low-pass smoothing.

The pipeline works in an East-North frame with a compass-style angle
convention: yaw rate is positive for clockwise rotation seen from above
(the bearing-increase direction).  A trace that is flagged as already
aligned is taken verbatim: its z-gyro channel is the clockwise yaw rate and
its x/y accelerometer channels are the East/North horizontal acceleration.
For unaligned traces the magnetometer-and-gravity alignment below rotates
device axes into East-North-Up and then negates the Up-axis angular rate to
land in the same clockwise-positive convention.

Trace file format (CSV):

    # aligned=true
    t,gx,gy,gz,ax,ay,az
    0,0,0,0.012,0.03,-0.01,9.81
    ...

An optional trailing ``mx,my,mz`` column triplet carries the magnetometer.
Values are written with 9 significant digits, which round-trips losslessly
for data produced by this package's writer.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

DESPIKE_WINDOW = 11
DESPIKE_Z = 6.0
# Scale factor turning a median absolute deviation into a robust standard
# deviation estimate (consistent with the normal distribution).
_MAD_TO_SD = 1.4826

# Relative slack allowed on inter-sample gaps around the nominal period.
_GAP_TOLERANCE = 0.5


@dataclass(frozen=True)
class ImuSample:
    """One IMU reading: time plus 3-axis gyro/accel and optional magnetometer."""

    t: float
    gyro: np.ndarray
    accel: np.ndarray
    mag: np.ndarray | None = None


@dataclass
class RawTrace:
    """Column-oriented raw IMU trace.

    t               (n,) seconds, strictly increasing, relative to trace start
    gyro            (n, 3) rad/s in device axes (or aligned axes, see flag)
    accel           (n, 3) m/s^2
    mag             (n, 3) microtesla, or None
    sample_period   nominal seconds between samples
    already_aligned when true, gyro[:, 2] is the clockwise yaw rate and
                    accel[:, 0:2] is the East/North horizontal acceleration
    """

    t: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray
    mag: np.ndarray | None
    sample_period: float
    already_aligned: bool

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        self.gyro = np.asarray(self.gyro, dtype=float)
        self.accel = np.asarray(self.accel, dtype=float)
        if self.mag is not None:
            self.mag = np.asarray(self.mag, dtype=float)
        n = self.t.shape[0]
        if n < 2:
            raise ValueError("trace must contain at least 2 samples")
        if self.gyro.shape != (n, 3) or self.accel.shape != (n, 3):
            raise ValueError("gyro and accel must both have shape (n, 3)")
        if self.mag is not None and self.mag.shape != (n, 3):
            raise ValueError("mag must have shape (n, 3) when present")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        finite = (
            np.all(np.isfinite(self.t))
            and np.all(np.isfinite(self.gyro))
            and np.all(np.isfinite(self.accel))
            and (self.mag is None or np.all(np.isfinite(self.mag)))
        )
        if not finite:
            raise ValueError("trace contains non-finite values")
        gaps = np.diff(self.t)
        if np.any(gaps <= 0):
            raise ValueError("timestamps must be strictly increasing")
        lo = self.sample_period * (1.0 - _GAP_TOLERANCE)
        hi = self.sample_period * (1.0 + _GAP_TOLERANCE)
        if np.any(gaps < lo) or np.any(gaps > hi):
            raise ValueError(
                "inter-sample gaps deviate more than 50% from the sample period"
            )

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def sample(self, i: int) -> ImuSample:
        mag = None if self.mag is None else self.mag[i]
        return ImuSample(t=float(self.t[i]), gyro=self.gyro[i], accel=self.accel[i], mag=mag)

    @classmethod
    def from_samples(
        cls,
        samples: list[ImuSample],
        sample_period: float,
        already_aligned: bool = False,
    ) -> "RawTrace":
        if any(s.mag is None for s in samples) and any(s.mag is not None for s in samples):
            raise ValueError("magnetometer must be present on all samples or none")
        mag = None
        if samples and samples[0].mag is not None:
            mag = np.stack([s.mag for s in samples])
        return cls(
            t=np.array([s.t for s in samples], dtype=float),
            gyro=np.stack([s.gyro for s in samples]).astype(float),
            accel=np.stack([s.accel for s in samples]).astype(float),
            mag=mag,
            sample_period=sample_period,
            already_aligned=already_aligned,
        )


@dataclass
class AlignedTrace:
    """Geo-frame trace: clockwise yaw rate plus East/North acceleration.

    yaw_rate is the channel the turn detector consumes; after
    lowpass_smooth it is the smoothed series.  yaw_raw is the post-alignment
    pre-smoothing yaw rate and is never touched by the low-pass stage.
    """

    t: np.ndarray
    yaw_rate: np.ndarray
    accel_en: np.ndarray
    yaw_raw: np.ndarray
    sample_period: float

    def __post_init__(self) -> None:
        n = self.t.shape[0]
        if self.yaw_rate.shape != (n,) or self.yaw_raw.shape != (n,):
            raise ValueError("yaw channels must match trace length")
        if self.accel_en.shape != (n, 2):
            raise ValueError("accel_en must have shape (n, 2)")

    def __len__(self) -> int:
        return int(self.t.shape[0])


def _moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with reflected edges; length preserved."""
    if window <= 1:
        return x.copy()
    pad = window // 2
    padded = np.pad(x, pad, mode="reflect")
    kernel = np.full(window, 1.0 / window)
    return np.convolve(padded, kernel, mode="valid")


def align_to_geo_frame(trace: RawTrace) -> AlignedTrace:
    """Rotate a raw trace into the East-North frame.

    Already-aligned traces pass through with an identity rotation.  Otherwise
    the device posture is assumed fixed for the whole trace (dongle or mounted
    phone): Up is the direction of the 2-second low-passed mean specific
    force, North is the mean magnetometer reading projected into the
    horizontal plane, and East completes the basis (Gram-Schmidt).  The
    returned yaw rate is the angular rate about the vertical with clockwise
    rotation positive, matching the turn-direction convention used downstream.
    """
    if trace.already_aligned:
        yaw = trace.gyro[:, 2].copy()
        return AlignedTrace(
            t=trace.t.copy(),
            yaw_rate=yaw,
            accel_en=trace.accel[:, :2].copy(),
            yaw_raw=yaw.copy(),
            sample_period=trace.sample_period,
        )

    if trace.mag is None:
        raise ValueError("magnetometer required to align a non-aligned trace")

    window = int(round(2.0 / trace.sample_period))
    window = max(1, min(window, len(trace)))
    if window % 2 == 0:
        window += 1
    smoothed_accel = np.column_stack(
        [_moving_average(trace.accel[:, i], window) for i in range(3)]
    )
    gravity = smoothed_accel.mean(axis=0)
    g_norm = float(np.linalg.norm(gravity))
    if g_norm < 1e-6:
        raise ValueError("degenerate gravity estimate: near-zero mean acceleration")
    up = gravity / g_norm

    mean_mag = trace.mag.mean(axis=0)
    horizontal = mean_mag - np.dot(mean_mag, up) * up
    h_norm = float(np.linalg.norm(horizontal))
    if h_norm < 1e-6:
        raise ValueError("degenerate magnetometer: field parallel to gravity")
    north = horizontal / h_norm
    east = np.cross(north, up)

    rot = np.vstack([east, north, up])  # device -> East-North-Up
    gyro_enu = trace.gyro @ rot.T
    accel_enu = trace.accel @ rot.T
    # Angular rate about Up is counterclockwise-positive; the pipeline's yaw
    # convention is clockwise-positive, hence the sign flip.
    yaw = -gyro_enu[:, 2]
    return AlignedTrace(
        t=trace.t.copy(),
        yaw_rate=yaw,
        accel_en=accel_enu[:, :2],
        yaw_raw=yaw.copy(),
        sample_period=trace.sample_period,
    )


def _despike_channel(x: np.ndarray, z_thresh: float, window: int) -> np.ndarray:
    n = x.shape[0]
    half = window // 2
    med = np.empty(n)
    mad = np.empty(n)
    if n >= window:
        views = np.lib.stride_tricks.sliding_window_view(x, window)
        core_med = np.median(views, axis=1)
        med[half : n - half] = core_med
        mad[half : n - half] = np.median(
            np.abs(views - core_med[:, None]), axis=1
        )
    for i in list(range(half)) + list(range(n - half, n)):
        w = x[max(0, i - half) : min(n, i + half + 1)]
        med[i] = np.median(w)
        mad[i] = np.median(np.abs(w - med[i]))
    deviation = np.abs(x - med)
    bad = deviation > z_thresh * _MAD_TO_SD * mad
    out = x.copy()
    out[bad] = med[bad]
    return out


def despike(
    trace: AlignedTrace,
    z_thresh: float = DESPIKE_Z,
    window: int = DESPIKE_WINDOW,
) -> AlignedTrace:
    """Replace isolated spikes with the local sliding-window median.

    A sample is replaced when it deviates from the median of its centered
    window by more than z_thresh robust standard deviations (1.4826 * MAD of
    the window).  Windows shrink at the trace edges.  Length is preserved.
    """
    if not z_thresh > 0:
        raise ValueError("z_thresh must be positive")
    if window > len(trace):
        raise ValueError("despike window longer than trace")
    return AlignedTrace(
        t=trace.t.copy(),
        yaw_rate=_despike_channel(trace.yaw_rate, z_thresh, window),
        accel_en=np.column_stack(
            [
                _despike_channel(trace.accel_en[:, 0], z_thresh, window),
                _despike_channel(trace.accel_en[:, 1], z_thresh, window),
            ]
        ),
        yaw_raw=_despike_channel(trace.yaw_raw, z_thresh, window),
        sample_period=trace.sample_period,
    )


def lowpass_window(cutoff_hz: float, sample_period: float) -> int:
    """Odd moving-average length whose cascade cuts off near cutoff_hz."""
    m = int(round(1.0 / (2.0 * cutoff_hz * sample_period)))
    m = max(1, m)
    if m % 2 == 0:
        m += 1
    return m


def lowpass_smooth(trace: AlignedTrace, cutoff_hz: float = 2.0) -> AlignedTrace:
    """Zero-phase low-pass: a cascade of two centered moving averages.

    The window length is chosen so the cascade's attenuation knee sits at
    cutoff_hz; a centered moving average is symmetric, so the cascade adds no
    phase shift.  yaw_raw is copied through untouched, as the raw-yaw feature
    downstream must see unsmoothed data.
    """
    nyquist = 1.0 / (2.0 * trace.sample_period)
    if not 0 < cutoff_hz < nyquist:
        raise ValueError(f"cutoff must lie in (0, {nyquist}) Hz, got {cutoff_hz}")
    m = lowpass_window(cutoff_hz, trace.sample_period)
    if m > len(trace):
        raise ValueError("smoothing window longer than trace")

    def smooth(x: np.ndarray) -> np.ndarray:
        return _moving_average(_moving_average(x, m), m)

    return AlignedTrace(
        t=trace.t.copy(),
        yaw_rate=smooth(trace.yaw_rate),
        accel_en=np.column_stack(
            [smooth(trace.accel_en[:, 0]), smooth(trace.accel_en[:, 1])]
        ),
        yaw_raw=trace.yaw_raw.copy(),
        sample_period=trace.sample_period,
    )


def write_trace_csv(trace: RawTrace, path) -> None:
    """Write a trace in the CSV format above, 9 significant digits."""
    buf = io.StringIO()
    buf.write(f"# aligned={'true' if trace.already_aligned else 'false'}\n")
    cols = "t,gx,gy,gz,ax,ay,az"
    if trace.mag is not None:
        cols += ",mx,my,mz"
    buf.write(cols + "\n")
    for i in range(len(trace)):
        row = [trace.t[i], *trace.gyro[i], *trace.accel[i]]
        if trace.mag is not None:
            row.extend(trace.mag[i])
        buf.write(",".join(f"{v:.9g}" for v in row) + "\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def read_trace_csv(path, aligned: bool | None = None) -> RawTrace:
    """Read a trace CSV; `aligned` overrides the sidecar flag when given."""
    file_aligned = None
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip().lower()
                if body.startswith("aligned="):
                    value = body.split("=", 1)[1].strip()
                    if value not in ("true", "false"):
                        raise ValueError(f"bad aligned flag {value!r} in {path}")
                    file_aligned = value == "true"
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise ValueError(f"no samples found in trace file {path}")
    base = ["t", "gx", "gy", "gz", "ax", "ay", "az"]
    with_mag = base + ["mx", "my", "mz"]
    if header == base:
        has_mag = False
    elif header == with_mag:
        has_mag = True
    else:
        raise ValueError(f"unexpected trace header {header} in {path}")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise ValueError(f"row width does not match header in {path}")
    t = data[:, 0]
    if len(t) < 2:
        raise ValueError("trace must contain at least 2 samples")
    sample_period = float(np.median(np.diff(t)))
    if aligned is None:
        aligned = bool(file_aligned) if file_aligned is not None else False
    return RawTrace(
        t=t,
        gyro=data[:, 1:4],
        accel=data[:, 4:7],
        mag=data[:, 7:10] if has_mag else None,
        sample_period=sample_period,
        already_aligned=aligned,
    )

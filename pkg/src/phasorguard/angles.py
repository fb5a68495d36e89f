"""Core domain types: wrapped angles, channel series, measurement matrices.

All angles are degrees in the half-open synchrophasor interval (-180, +180].
Timestamps are real-valued seconds since an epoch; within a channel the grid
is uniform, t_k = t0 + k / rate_hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DomainError, RangeError

# Two timestamps closer than this are the same grid point (seconds).
TIME_TOL_S = 1e-6

DEFAULT_CHANNEL_IDS = ("632", "633", "634", "671", "672", "692")


def wrap_angle(x):
    """Wrap an angle in degrees into (-180, +180].

    Accepts a scalar or an ndarray; -180 maps to +180 (the boundary belongs
    to the positive side).
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("cannot wrap non-finite angle")
    w = np.mod(arr + 180.0, 360.0)
    # mod returns 0 for inputs equivalent to -180; those belong at +180
    w = np.where(w == 0.0, 360.0, w) - 180.0
    if np.isscalar(x) or arr.ndim == 0:
        return float(w)
    return w


@dataclass(frozen=True)
class PhasorSample:
    """One timestamped phasor measurement (magnitude is carried, not used)."""

    t: float
    angle_deg: float
    magnitude: float = 1.0

    def __post_init__(self):
        if self.t < 0:
            raise DomainError(f"negative timestamp {self.t}")
        if not (-180.0 < self.angle_deg <= 180.0):
            raise DomainError(f"angle {self.angle_deg} outside (-180, 180]")
        if not self.magnitude > 0:
            raise DomainError(f"magnitude {self.magnitude} must be positive")


@dataclass(frozen=True)
class ChannelSeries:
    """Uniformly sampled angle stream of one PMU channel.

    Angles are stored as an array; `samples` materialises PhasorSample
    objects on demand.
    """

    channel_id: str
    rate_hz: float
    t0: float
    angles_deg: np.ndarray
    magnitudes: np.ndarray | None = None

    def __post_init__(self):
        ang = np.array(self.angles_deg, dtype=float)
        ang.setflags(write=False)
        object.__setattr__(self, "angles_deg", ang)
        if ang.ndim != 1 or ang.size < 2:
            raise DomainError("a channel series needs at least 2 samples")
        if self.rate_hz <= 0:
            raise DomainError("rate_hz must be positive")
        if self.t0 < 0:
            raise DomainError("negative start timestamp")
        if not np.all(np.isfinite(ang)):
            raise DomainError("non-finite angle in series")
        if np.any(ang <= -180.0) or np.any(ang > 180.0):
            raise DomainError("angles must lie in (-180, 180]")
        if self.magnitudes is not None:
            mag = np.array(self.magnitudes, dtype=float)
            if mag.shape != ang.shape:
                raise DomainError("magnitudes shape mismatch")
            mag.setflags(write=False)
            object.__setattr__(self, "magnitudes", mag)

    @property
    def n(self) -> int:
        return int(self.angles_deg.size)

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    def timestamps(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) / self.rate_hz

    @property
    def samples(self) -> list[PhasorSample]:
        mags = self.magnitudes if self.magnitudes is not None else np.ones(self.n)
        return [
            PhasorSample(t, a, m)
            for t, a, m in zip(self.timestamps(), self.angles_deg, mags)
        ]

    def with_angles(self, angles_deg: np.ndarray) -> "ChannelSeries":
        return ChannelSeries(
            channel_id=self.channel_id,
            rate_hz=self.rate_hz,
            t0=self.t0,
            angles_deg=angles_deg,
            magnitudes=self.magnitudes,
        )

    def index_at(self, t: float) -> int:
        """Grid index of timestamp `t`; RangeError if off-grid or outside."""
        k = (t - self.t0) * self.rate_hz
        ki = round(k)
        if abs(k - ki) > TIME_TOL_S * self.rate_hz:
            raise RangeError(f"t={t} is not on the sample grid of {self.channel_id}")
        if ki < 0 or ki >= self.n:
            raise RangeError(f"t={t} outside series extent of {self.channel_id}")
        return int(ki)


@dataclass(frozen=True)
class MeasurementMatrix:
    """m aligned channels by n samples of wrapped angles (degrees)."""

    values: np.ndarray
    channel_ids: tuple[str, ...]
    t0: float
    rate_hz: float

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "channel_ids", tuple(self.channel_ids))
        if vals.ndim != 2:
            raise DomainError("measurement matrix must be 2-D")
        m, n = vals.shape
        if m < 1 or n < 4:
            raise DomainError(f"matrix needs m >= 1 and n >= 4, got {m}x{n}")
        if len(self.channel_ids) != m:
            raise DomainError("channel_ids length must equal row count")

    @property
    def m(self) -> int:
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    def row(self, channel_id: str) -> np.ndarray:
        return self.values[self.channel_ids.index(channel_id)]


def assemble_matrix(
    channels: list[ChannelSeries], start: float, n: int
) -> MeasurementMatrix:
    """Stack n samples starting at `start` from each channel into an m x n matrix.

    Rows follow the input channel order.  All channels must share the rate
    and cover the window; `start` must fall on every channel's sample grid.
    """
    if not channels:
        raise AlignmentError("no channels given")
    if n < 4:
        raise DomainError("window must contain at least 4 samples")
    rate = channels[0].rate_hz
    rows = []
    for ch in channels:
        if abs(ch.rate_hz - rate) > 1e-12:
            raise AlignmentError(
                f"channel {ch.channel_id} rate {ch.rate_hz} != {rate}"
            )
        i0 = ch.index_at(start)
        if i0 + n > ch.n:
            raise RangeError(
                f"window of {n} samples from t={start} exceeds {ch.channel_id}"
            )
        rows.append(ch.angles_deg[i0 : i0 + n])
    return MeasurementMatrix(
        values=np.vstack(rows),
        channel_ids=tuple(ch.channel_id for ch in channels),
        t0=start,
        rate_hz=rate,
    )

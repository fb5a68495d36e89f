"""Attack injectors: additive false data and clock-shift (GPS spoofing).

A false-data injection adds an attacker value to post-onset angles of the
chosen channels.  A timing attack re-pairs values with timestamps: from the
onset on, the emitted sample at time t carries the value recorded at t + T.
Both leave the timestamp grid itself untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import ChannelSeries, wrap_angle
from .errors import RangeError, SpecError

FDIA_DEFAULT_BOUND_DEG = 30.0


@dataclass(frozen=True)
class FdiaSpec:
    """Additive angle injection: constant or per-sample values (degrees)."""

    onset_s: float
    attack_values: float | tuple[float, ...]
    affected_channels: tuple[str, ...]

    def __post_init__(self):
        if len(self.affected_channels) == 0:
            raise SpecError("FDIA needs at least one affected channel")
        vals = self.attack_values
        if np.isscalar(vals):
            arr = np.asarray([vals], dtype=float)
        else:
            arr = np.asarray(vals, dtype=float)
            object.__setattr__(self, "attack_values", tuple(float(v) for v in arr))
        if not np.all(np.isfinite(arr)):
            raise SpecError("attack values must be finite")
        object.__setattr__(
            self, "affected_channels", tuple(self.affected_channels)
        )


def uniform_attack_values(
    count: int, seed: int, low: float = 0.0, high: float = FDIA_DEFAULT_BOUND_DEG
) -> tuple[float, ...]:
    """Per-sample uniform attack vector in [low, high), deterministic per seed."""
    rng = np.random.default_rng(seed)
    return tuple(rng.uniform(low, high, count))


@dataclass(frozen=True)
class TimingSpec:
    """Clock-shift attack: post-onset values are taken from delay_s later.

    `affected_channels` defaults to every channel passed to the injector
    (a spoofed clock shifts all channels of that PMU).
    """

    onset_s: float
    delay_s: float
    affected_channels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.delay_s <= 0:
            raise SpecError("delay must be positive")
        if self.affected_channels is not None:
            object.__setattr__(
                self, "affected_channels", tuple(self.affected_channels)
            )


def inject_fdia(
    channels: list[ChannelSeries], spec: FdiaSpec
) -> list[ChannelSeries]:
    """Add the attack values to post-onset angles of the affected channels."""
    by_id = {ch.channel_id for ch in channels}
    for cid in spec.affected_channels:
        if cid not in by_id:
            raise SpecError(f"unknown channel {cid!r}")
    out = []
    for ch in channels:
        if ch.channel_id not in spec.affected_channels:
            out.append(ch)
            continue
        onset_idx = ch.index_at(spec.onset_s)
        k = ch.n - onset_idx
        if np.isscalar(spec.attack_values):
            a = np.full(k, float(spec.attack_values))
        else:
            vals = np.asarray(spec.attack_values, dtype=float)
            if vals.size < k:
                raise SpecError(
                    f"attack sequence has {vals.size} values, window needs {k}"
                )
            a = vals[:k]
        ang = ch.angles_deg.copy()
        ang[onset_idx:] = wrap_angle(ang[onset_idx:] + a)
        out.append(ch.with_angles(ang))
    return out


def inject_timing(
    channels: list[ChannelSeries], spec: TimingSpec
) -> list[ChannelSeries]:
    """Splice future values over post-onset samples of the affected channels.

    The emitted streams end delay_s before the source does (the shifted
    values must exist), so every returned series is shortened by
    delay_s * rate samples to keep the channels aligned.
    """
    affected = spec.affected_channels
    if affected is None:
        affected = tuple(ch.channel_id for ch in channels)
    else:
        known = {ch.channel_id for ch in channels}
        for cid in affected:
            if cid not in known:
                raise SpecError(f"unknown channel {cid!r}")
    out = []
    for ch in channels:
        shift_f = spec.delay_s * ch.rate_hz
        shift = round(shift_f)
        if abs(shift_f - shift) > 1e-6:
            raise SpecError(
                f"delay {spec.delay_s}s is not a whole number of samples "
                f"at {ch.rate_hz} Hz"
            )
        n_out = ch.n - shift
        onset_idx = ch.index_at(spec.onset_s)
        if onset_idx >= n_out:
            raise RangeError("onset lies beyond the emittable extent")
        if n_out < 2:
            raise RangeError(
                f"series too short to shift by {spec.delay_s}s"
            )
        ang = ch.angles_deg[:n_out].copy()
        if ch.channel_id in affected:
            ang[onset_idx:] = ch.angles_deg[onset_idx + shift : n_out + shift]
        mags = ch.magnitudes[:n_out] if ch.magnitudes is not None else None
        out.append(
            ChannelSeries(
                channel_id=ch.channel_id,
                rate_hz=ch.rate_hz,
                t0=ch.t0,
                angles_deg=ang,
                magnitudes=mags,
            )
        )
    return out

"""Deterministic multi-channel PMU angle simulator.

All channels share one slowly varying frequency; each channel adds a
constant offset.  The angle advances 360 * (f(t) - f_nominal) * dt per
sample and is wrapped into (-180, 180].  Per-sample Gaussian measurement
noise is added to the wrapped angle and re-wrapped.  Everything is a pure
function of the config, including its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .angles import ChannelSeries, DEFAULT_CHANNEL_IDS, wrap_angle
from .errors import ConfigError, RangeError, SpecError

EVENT_SHAPES = ("step", "ramp", "oscillation")


@dataclass(frozen=True)
class WanderSpec:
    """Sinusoidal plus random-walk deviation of the common frequency (Hz)."""

    amplitude_hz: float = 0.02
    period_s: float = 300.0
    walk_std_hz: float = 0.001  # per-sample random-walk step, Hz/sqrt(sample)
    phase_rad: float | None = None  # None: drawn from the config seed

    def __post_init__(self):
        if self.amplitude_hz < 0 or self.walk_std_hz < 0 or self.period_s <= 0:
            raise ConfigError("invalid frequency wander parameters")


@dataclass(frozen=True)
class SimConfig:
    m: int = 6
    rate_hz: float = 30.0
    duration_s: float = 10.0
    seed: int = 0
    f_nominal_hz: float = 60.0
    f_offset_hz: float = 0.0  # constant deviation from nominal
    freq_wander: WanderSpec | tuple[WanderSpec, ...] = field(
        default_factory=WanderSpec
    )
    channel_offsets_deg: tuple[float, ...] | None = None
    noise_std_deg: float = 0.0
    channel_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError("need at least one channel")
        if self.rate_hz <= 0 or self.duration_s <= 0:
            raise ConfigError("rate_hz and duration_s must be positive")
        if self.noise_std_deg < 0:
            raise ConfigError("noise_std_deg must be >= 0")
        if self.channel_offsets_deg is not None:
            offs = tuple(float(v) for v in self.channel_offsets_deg)
            if len(offs) != self.m:
                raise ConfigError("channel_offsets_deg length must equal m")
            object.__setattr__(self, "channel_offsets_deg", offs)
        ids = self.channel_ids
        if ids is None:
            base = list(DEFAULT_CHANNEL_IDS)
            while len(base) < self.m:
                base.append(f"ch{len(base)}")
            ids = tuple(base[: self.m])
        elif len(ids) != self.m:
            raise ConfigError("channel_ids length must equal m")
        object.__setattr__(self, "channel_ids", tuple(ids))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.rate_hz))


def make_timestamps(start: float, rate_hz: float, count: int) -> np.ndarray:
    """Uniform grid t_k = start + k / rate_hz."""
    if count < 1:
        raise ConfigError("count must be >= 1")
    return start + np.arange(count) / rate_hz


def _frequency_deviation(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Common-mode deviation f(t_k) - f_nominal in Hz, one value per sample."""
    n = config.n_samples
    t = np.arange(n) / config.rate_hz
    wander = config.freq_wander
    if isinstance(wander, WanderSpec):
        wander = (wander,)
    dev = np.full(n, config.f_offset_hz)
    for w in wander:
        if w.amplitude_hz > 0:
            phase = w.phase_rad
            if phase is None:
                phase = rng.uniform(0.0, 2.0 * math.pi)
            dev = dev + w.amplitude_hz * np.sin(
                2.0 * math.pi * t / w.period_s + phase
            )
        if w.walk_std_hz > 0:
            dev = dev + np.cumsum(rng.normal(0.0, w.walk_std_hz, n))
    return dev


def generate(config: SimConfig) -> list[ChannelSeries]:
    """Simulate m aligned channels starting at t = 0."""
    rng = np.random.default_rng(config.seed)
    n = config.n_samples
    if n < 2:
        raise ConfigError("duration too short for the sampling rate")
    dev = _frequency_deviation(config, rng)
    # angle accumulated from the deviation; sample k holds the integral up to k
    drift = 360.0 * np.concatenate([[0.0], np.cumsum(dev[:-1])]) / config.rate_hz
    offsets = config.channel_offsets_deg
    if offsets is None:
        offsets = tuple(0.0 for _ in range(config.m))
    channels = []
    for c in range(config.m):
        ang = offsets[c] + drift
        if config.noise_std_deg > 0:
            ang = ang + rng.normal(0.0, config.noise_std_deg, n)
        channels.append(
            ChannelSeries(
                channel_id=config.channel_ids[c],
                rate_hz=config.rate_hz,
                t0=0.0,
                angles_deg=wrap_angle(ang),
                magnitudes=np.ones(n),
            )
        )
    return channels


@dataclass(frozen=True)
class EventSpec:
    """Spatially correlated angle perturbation (an electrical event)."""

    onset_s: float
    shape: str
    magnitude_deg: float
    affected_channels: dict[str, float]  # channel_id -> scale in (0, 1]
    duration_s: float | None = None
    osc_freq_hz: float = 1.0

    def __post_init__(self):
        if self.shape not in EVENT_SHAPES:
            raise SpecError(f"unknown event shape {self.shape!r}")
        if len(self.affected_channels) < 2:
            raise SpecError("an event must affect at least 2 channels")
        for ch, scale in self.affected_channels.items():
            if not 0.0 < scale <= 1.0:
                raise SpecError(f"scale {scale} for {ch} outside (0, 1]")
        if self.shape in ("ramp", "oscillation") and self.duration_s is None:
            raise SpecError(f"{self.shape} event needs a duration")
        if self.duration_s is not None and self.duration_s <= 0:
            raise SpecError("duration must be positive")


def _event_profile(spec: EventSpec, rel_t: np.ndarray) -> np.ndarray:
    """Perturbation (unit magnitude) at times rel_t >= 0 after onset."""
    if spec.shape == "step":
        prof = np.ones_like(rel_t)
        if spec.duration_s is not None:
            prof[rel_t >= spec.duration_s] = 0.0
        return prof
    if spec.shape == "ramp":
        prof = np.clip(rel_t / spec.duration_s, 0.0, 1.0)
        return prof
    # oscillation: sinusoid inside the event window, silent after
    prof = np.sin(2.0 * math.pi * spec.osc_freq_hz * rel_t)
    prof[rel_t >= spec.duration_s] = 0.0
    return prof


def inject_event(
    channels: list[ChannelSeries], spec: EventSpec
) -> list[ChannelSeries]:
    """Add the shaped perturbation to the affected channels; re-wrap."""
    by_id = {ch.channel_id: ch for ch in channels}
    for cid in spec.affected_channels:
        if cid not in by_id:
            raise SpecError(f"unknown channel {cid!r}")
    out = []
    for ch in channels:
        scale = spec.affected_channels.get(ch.channel_id)
        if scale is None:
            out.append(ch)
            continue
        t = ch.timestamps()
        onset_idx = ch.index_at(spec.onset_s)
        if spec.duration_s is not None:
            end_t = spec.onset_s + spec.duration_s
            if end_t > t[-1] + ch.dt + 1e-9:
                raise RangeError("event extends past the series")
        rel = t[onset_idx:] - spec.onset_s
        delta = np.zeros(ch.n)
        delta[onset_idx:] = scale * spec.magnitude_deg * _event_profile(spec, rel)
        out.append(ch.with_angles(wrap_angle(ch.angles_deg + delta)))
    return out

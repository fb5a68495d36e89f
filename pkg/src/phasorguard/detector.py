"""Window classifier: Normal / Event / FDIA / TimingAttack.

Decision sequence per window:

1. Anomaly gate: the raw block-Hankel rank-r* error must leave the band
   calibrated on clean windows (median + tau_gate * IQR), else Normal.
   Without a calibrated baseline every window is treated as anomalous.
2. Unwrap divergence: unwrapping can only re-express wrap structure, so
   the raw and unwrapped profiles of a window whose transition pattern is
   untouched agree; a clock-shift splice drags wrap transitions to new
   positions and the two profiles split apart.  |e_ru - e_r| > tau_unwrap
   * e_r at r* flags TimingAttack.
3. Temporal-shuffle contrast: rebuilding the Hankel from time-shuffled
   samples inflates the error of temporally structured content but not of
   white injections; e_rr > (1 + tau_perm) * e_r at rank r_perm flags
   Event.
4. Otherwise FDIA.

The verdict is a pure function of the evidence profiles and the config,
including the seeded shuffle draws, so any classification can be replayed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .angles import ChannelSeries, MeasurementMatrix, assemble_matrix
from .errors import ConfigError, SpecError
from .lowrank import build_hankel, default_window, error_profile, permute_columns
from .unwrap import unwrap_matrix

PERM_RULES = ("rank", "aggregate")
UNWRAP_RULES = ("divergence", "literal", "clean-baseline")


class Verdict(str, Enum):
    NORMAL = "Normal"
    EVENT = "Event"
    FDIA = "FDIA"
    TIMING_ATTACK = "TimingAttack"


@dataclass(frozen=True)
class GateBaseline:
    """Clean-window statistics backing the anomaly gate (percent units)."""

    raw_median: float
    raw_iqr: float
    unwrapped_median: float
    unwrapped_iqr: float
    n_windows: int

    def gate_level(self, tau_gate: float) -> float:
        return self.raw_median + tau_gate * self.raw_iqr


@dataclass(frozen=True)
class DetectorConfig:
    window_n: int = 100
    L: int | None = None  # Hankel rows per channel; None -> floor(n/2)+2
    r_star: int = 1
    tau_perm: float = 1.0
    tau_unwrap: float = 0.5
    K_perm: int = 5
    seed: int = 0
    tau_gate: float = 3.0
    r_perm: int = 4  # rank for the shuffle contrast; rank 1 is energy-blind
    r_max: int | None = None  # profile depth; None -> min(R, C)
    perm_rule: str = "rank"
    agg_r_max: int = 5  # ranks summed by the aggregate shuffle rule
    unwrap_rule: str = "divergence"
    stride: int | None = None  # window hop; None -> window_n (no overlap)
    gate_baseline: GateBaseline | None = None

    def __post_init__(self):
        if self.window_n < 8:
            raise ConfigError("window_n must be >= 8")
        if self.r_star < 1 or self.r_perm < 1 or self.agg_r_max < 1:
            raise ConfigError("ranks must be >= 1")
        if self.tau_perm < 0 or self.tau_unwrap < 0 or self.tau_gate < 0:
            raise ConfigError("thresholds must be >= 0")
        if self.K_perm < 1:
            raise ConfigError("K_perm must be >= 1")
        if self.stride is not None and self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.perm_rule not in PERM_RULES:
            raise ConfigError(f"perm_rule must be one of {PERM_RULES}")
        if self.unwrap_rule not in UNWRAP_RULES:
            raise ConfigError(f"unwrap_rule must be one of {UNWRAP_RULES}")

    def hankel_L(self) -> int:
        return self.L if self.L is not None else default_window(self.window_n)

    def with_baseline(self, baseline: GateBaseline) -> "DetectorConfig":
        return replace(self, gate_baseline=baseline)


@dataclass(frozen=True)
class Evidence:
    """Error profiles (percent) backing a verdict; None where not computed."""

    e_r: np.ndarray
    e_rr: np.ndarray | None
    e_ru: np.ndarray | None
    gate_level: float | None
    gate_fired: bool


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    evidence: Evidence
    window_start: float
    window_index: int


def _window_profiles_raw(Y: MeasurementMatrix, config: DetectorConfig):
    H = build_hankel(Y.values, L=config.hankel_L())
    return H, error_profile(H, r_max=config.r_max)


def _perm_profile(H, config: DetectorConfig, window_index: int) -> np.ndarray:
    draws = []
    for j in range(config.K_perm):
        seed = (config.seed * 1_000_003 + window_index * 1_009 + j) % (2**63)
        draws.append(
            error_profile(permute_columns(H, seed), r_max=config.r_max).errors_pct
        )
    return np.mean(draws, axis=0)


def anomaly_gate(Y: MeasurementMatrix, config: DetectorConfig) -> bool:
    """True when the window should proceed to attack/event discrimination.

    Without a calibrated baseline the gate always passes the window on,
    which reproduces the behavior of a detector that presumes an anomaly.
    """
    _, prof = _window_profiles_raw(Y, config)
    if config.gate_baseline is None:
        return True
    return prof.at(config.r_star) > config.gate_baseline.gate_level(config.tau_gate)


def _perm_fires(e_r: np.ndarray, e_rr: np.ndarray, config: DetectorConfig) -> bool:
    if config.perm_rule == "aggregate":
        k = min(config.agg_r_max, e_r.size)
        base = float(e_r[:k].sum())
        return float(e_rr[:k].sum()) - base > config.tau_perm * base
    r = min(config.r_perm, e_r.size)
    return e_rr[r - 1] > (1.0 + config.tau_perm) * e_r[r - 1]


def _unwrap_fires(
    e_r: np.ndarray, e_ru: np.ndarray, config: DetectorConfig
) -> bool:
    r = min(config.r_star, e_r.size)
    raw, unw = float(e_r[r - 1]), float(e_ru[r - 1])
    if config.unwrap_rule == "literal":
        return unw > (1.0 + config.tau_unwrap) * raw
    if config.unwrap_rule == "clean-baseline":
        if config.gate_baseline is None:
            raise ConfigError("clean-baseline unwrap rule needs a calibrated baseline")
        base = config.gate_baseline
        return unw > base.unwrapped_median + config.tau_gate * base.unwrapped_iqr
    return abs(unw - raw) > config.tau_unwrap * raw


def classify_window(
    Y: MeasurementMatrix,
    config: DetectorConfig,
    window_index: int = 0,
    window_start: float | None = None,
) -> Classification:
    """Classify one aligned window of wrapped angles."""
    if Y.n != config.window_n:
        raise SpecError(f"window has {Y.n} samples, config expects {config.window_n}")
    start = Y.t0 if window_start is None else window_start
    H, prof = _window_profiles_raw(Y, config)
    e_r = prof.errors_pct
    gate_level = None
    if config.gate_baseline is not None:
        gate_level = config.gate_baseline.gate_level(config.tau_gate)
        if prof.at(config.r_star) <= gate_level:
            return Classification(
                verdict=Verdict.NORMAL,
                evidence=Evidence(e_r, None, None, gate_level, False),
                window_start=start,
                window_index=window_index,
            )
    e_ru = error_profile(
        build_hankel(unwrap_matrix(Y.values), L=config.hankel_L(), kind="unwrapped"),
        r_max=config.r_max,
    ).errors_pct
    e_rr = _perm_profile(H, config, window_index)
    evidence = Evidence(e_r, e_rr, e_ru, gate_level, True)
    if _unwrap_fires(e_r, e_ru, config):
        verdict = Verdict.TIMING_ATTACK
    elif _perm_fires(e_r, e_rr, config):
        verdict = Verdict.EVENT
    else:
        verdict = Verdict.FDIA
    return Classification(verdict, evidence, start, window_index)


def classify_stream(
    channels: list[ChannelSeries], config: DetectorConfig
) -> list[Classification]:
    """Classify consecutive windows of an aligned stream.

    Windows hop by `stride` samples (default: the window length, i.e.
    non-overlapping); a trailing stretch too short for a full window is
    skipped with a warning.
    """
    n_total = min(ch.n for ch in channels)
    stride = config.stride or config.window_n
    if n_total < config.window_n:
        warnings.warn(
            f"stream of {n_total} samples is shorter than one window "
            f"({config.window_n}); nothing classified"
        )
        return []
    n_windows = (n_total - config.window_n) // stride + 1
    leftover = n_total - ((n_windows - 1) * stride + config.window_n)
    if leftover:
        warnings.warn(f"trailing partial window of {leftover} samples skipped")
    t0 = channels[0].t0
    rate = channels[0].rate_hz
    out = []
    for w in range(n_windows):
        start = t0 + w * stride / rate
        Y = assemble_matrix(channels, start, config.window_n)
        out.append(classify_window(Y, config, window_index=w, window_start=start))
    return out


def calibrate_gate_windows(
    windows: list[MeasurementMatrix], config: DetectorConfig
) -> GateBaseline:
    """Fit the clean-window band from explicit (presumed clean) windows."""
    if len(windows) < 2:
        raise ConfigError("need at least 2 clean windows to calibrate the gate")
    raw_vals, unw_vals = [], []
    for Y in windows:
        _, prof = _window_profiles_raw(Y, config)
        raw_vals.append(prof.at(config.r_star))
        unw_vals.append(
            error_profile(
                build_hankel(
                    unwrap_matrix(Y.values), L=config.hankel_L(), kind="unwrapped"
                ),
                r_max=config.r_max,
            ).at(config.r_star)
        )
    raw = np.asarray(raw_vals)
    unw = np.asarray(unw_vals)
    return GateBaseline(
        raw_median=float(np.median(raw)),
        raw_iqr=float(np.percentile(raw, 75) - np.percentile(raw, 25)),
        unwrapped_median=float(np.median(unw)),
        unwrapped_iqr=float(np.percentile(unw, 75) - np.percentile(unw, 25)),
        n_windows=len(windows),
    )


def calibrate_gate(
    channels: list[ChannelSeries], config: DetectorConfig
) -> GateBaseline:
    """Fit the gate band from consecutive windows of a clean stream."""
    n_total = min(ch.n for ch in channels)
    n_windows = n_total // config.window_n
    t0 = channels[0].t0
    rate = channels[0].rate_hz
    windows = [
        assemble_matrix(channels, t0 + w * config.window_n / rate, config.window_n)
        for w in range(n_windows)
    ]
    return calibrate_gate_windows(windows, config)

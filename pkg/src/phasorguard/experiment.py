"""Experiment runner: simulate, inject, calibrate, detect, write artifacts.

All randomness derives from one root seed via labeled hashing, so a rerun
with an identical config reproduces every output byte for byte.  Output
files carry no wall-clock timestamps.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .angles import ChannelSeries, assemble_matrix
from .attack import FdiaSpec, TimingSpec, inject_fdia, inject_timing, uniform_attack_values
from .csvio import (
    channels_to_csv,
    unwrap_to_csv,
    verdicts_to_jsonl,
)
from .detector import (
    Classification,
    DetectorConfig,
    GateBaseline,
    Verdict,
    calibrate_gate_windows,
    classify_stream,
)
from .errors import ConfigError
from .figures import svg_line_chart
from .lowrank import build_hankel, error_profile
from .simulate import EventSpec, SimConfig, WanderSpec, generate, inject_event
from .unwrap import unwrap_matrix


def seed_for(root_seed: int, label: str) -> int:
    """Stable per-purpose seed derivation from the root seed."""
    digest = hashlib.sha256(f"{root_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


@dataclass(frozen=True)
class RandomFdia:
    """Per-sample uniform attack vector, resolved with a derived seed."""

    onset_s: float
    low: float
    high: float
    affected_channels: tuple[str, ...]


@dataclass(frozen=True)
class OutputNames:
    channels_clean: str = "channels_clean.csv"
    channels_variant: str = "channels_{variant}.csv"
    unwrap_variant: str = "unwrap_{variant}.csv"
    verdicts_variant: str = "verdicts_{variant}.jsonl"
    fig_unwrapped: str = "fig_unwrapped_comparison.svg"
    fig_profiles_raw: str = "fig_profiles_raw.svg"
    fig_profiles_unwrapped: str = "fig_profiles_unwrapped.svg"
    manifest: str = "manifest.json"


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    events: tuple[EventSpec, ...] = ()
    fdia: FdiaSpec | RandomFdia | None = None
    timing: TimingSpec | None = None
    seed: int = 0
    calibration_runs: int = 24
    outputs: OutputNames = field(default_factory=OutputNames)

    def __post_init__(self):
        if self.calibration_runs < 2:
            raise ConfigError("calibration needs at least 2 clean runs")


# -- JSON round trip ---------------------------------------------------------

def _wander_to_dict(w: WanderSpec) -> dict:
    return {
        "amplitude_hz": w.amplitude_hz,
        "period_s": w.period_s,
        "walk_std_hz": w.walk_std_hz,
        "phase_rad": w.phase_rad,
    }


def _wander_from_dict(d: dict) -> WanderSpec:
    return WanderSpec(
        amplitude_hz=d.get("amplitude_hz", 0.02),
        period_s=d.get("period_s", 300.0),
        walk_std_hz=d.get("walk_std_hz", 0.001),
        phase_rad=d.get("phase_rad"),
    )


def sim_config_to_dict(c: SimConfig) -> dict:
    wander = c.freq_wander
    if isinstance(wander, WanderSpec):
        wander_json = _wander_to_dict(wander)
    else:
        wander_json = [_wander_to_dict(w) for w in wander]
    return {
        "m": c.m,
        "rate_hz": c.rate_hz,
        "duration_s": c.duration_s,
        "seed": c.seed,
        "f_nominal_hz": c.f_nominal_hz,
        "f_offset_hz": c.f_offset_hz,
        "freq_wander": wander_json,
        "channel_offsets_deg": list(c.channel_offsets_deg)
        if c.channel_offsets_deg is not None
        else None,
        "noise_std_deg": c.noise_std_deg,
        "channel_ids": list(c.channel_ids),
    }


def sim_config_from_dict(d: dict) -> SimConfig:
    wander_json = d.get("freq_wander", {})
    if isinstance(wander_json, list):
        wander = tuple(_wander_from_dict(w) for w in wander_json)
    else:
        wander = _wander_from_dict(wander_json)
    return SimConfig(
        m=d.get("m", 6),
        rate_hz=d.get("rate_hz", 30.0),
        duration_s=d.get("duration_s", 10.0),
        seed=d.get("seed", 0),
        f_nominal_hz=d.get("f_nominal_hz", 60.0),
        f_offset_hz=d.get("f_offset_hz", 0.0),
        freq_wander=wander,
        channel_offsets_deg=tuple(d["channel_offsets_deg"])
        if d.get("channel_offsets_deg") is not None
        else None,
        noise_std_deg=d.get("noise_std_deg", 0.0),
        channel_ids=tuple(d["channel_ids"]) if d.get("channel_ids") else None,
    )


def event_to_dict(e: EventSpec) -> dict:
    return {
        "onset_s": e.onset_s,
        "shape": e.shape,
        "magnitude_deg": e.magnitude_deg,
        "affected_channels": dict(e.affected_channels),
        "duration_s": e.duration_s,
        "osc_freq_hz": e.osc_freq_hz,
    }


def event_from_dict(d: dict) -> EventSpec:
    return EventSpec(
        onset_s=d["onset_s"],
        shape=d["shape"],
        magnitude_deg=d["magnitude_deg"],
        affected_channels=dict(d["affected_channels"]),
        duration_s=d.get("duration_s"),
        osc_freq_hz=d.get("osc_freq_hz", 1.0),
    )


def fdia_to_dict(f: FdiaSpec | RandomFdia) -> dict:
    if isinstance(f, RandomFdia):
        values = {"uniform": [f.low, f.high]}
    elif np.isscalar(f.attack_values):
        values = f.attack_values
    else:
        values = list(f.attack_values)
    return {
        "onset_s": f.onset_s,
        "attack_values": values,
        "affected_channels": list(f.affected_channels),
    }


def fdia_from_dict(d: dict) -> FdiaSpec | RandomFdia:
    values = d["attack_values"]
    channels = tuple(d["affected_channels"])
    if isinstance(values, dict):
        low, high = values["uniform"]
        return RandomFdia(d["onset_s"], low, high, channels)
    if isinstance(values, list):
        values = tuple(values)
    return FdiaSpec(d["onset_s"], values, channels)


def timing_to_dict(t: TimingSpec) -> dict:
    return {
        "onset_s": t.onset_s,
        "delay_s": t.delay_s,
        "affected_channels": list(t.affected_channels)
        if t.affected_channels is not None
        else None,
    }


def timing_from_dict(d: dict) -> TimingSpec:
    return TimingSpec(
        onset_s=d["onset_s"],
        delay_s=d["delay_s"],
        affected_channels=tuple(d["affected_channels"])
        if d.get("affected_channels") is not None
        else None,
    )


def detector_to_dict(c: DetectorConfig) -> dict:
    return {
        "window_n": c.window_n,
        "L": c.L,
        "r_star": c.r_star,
        "tau_perm": c.tau_perm,
        "tau_unwrap": c.tau_unwrap,
        "K_perm": c.K_perm,
        "seed": c.seed,
        "tau_gate": c.tau_gate,
        "r_perm": c.r_perm,
        "r_max": c.r_max,
        "perm_rule": c.perm_rule,
        "agg_r_max": c.agg_r_max,
        "unwrap_rule": c.unwrap_rule,
        "stride": c.stride,
    }


def detector_from_dict(d: dict) -> DetectorConfig:
    return DetectorConfig(
        window_n=d.get("window_n", 100),
        L=d.get("L"),
        r_star=d.get("r_star", 1),
        tau_perm=d.get("tau_perm", 1.0),
        tau_unwrap=d.get("tau_unwrap", 0.5),
        K_perm=d.get("K_perm", 5),
        seed=d.get("seed", 0),
        tau_gate=d.get("tau_gate", 3.0),
        r_perm=d.get("r_perm", 4),
        r_max=d.get("r_max"),
        perm_rule=d.get("perm_rule", "rank"),
        agg_r_max=d.get("agg_r_max", 5),
        unwrap_rule=d.get("unwrap_rule", "divergence"),
        stride=d.get("stride"),
    )


def experiment_to_dict(c: ExperimentConfig) -> dict:
    return {
        "seed": c.seed,
        "sim": sim_config_to_dict(c.sim),
        "detector": detector_to_dict(c.detector),
        "events": [event_to_dict(e) for e in c.events],
        "fdia": fdia_to_dict(c.fdia) if c.fdia is not None else None,
        "timing": timing_to_dict(c.timing) if c.timing is not None else None,
        "calibration_runs": c.calibration_runs,
    }


def experiment_from_dict(d: dict) -> ExperimentConfig:
    return ExperimentConfig(
        sim=sim_config_from_dict(d["sim"]),
        detector=detector_from_dict(d.get("detector", {})),
        events=tuple(event_from_dict(e) for e in d.get("events", [])),
        fdia=fdia_from_dict(d["fdia"]) if d.get("fdia") else None,
        timing=timing_from_dict(d["timing"]) if d.get("timing") else None,
        seed=d.get("seed", 0),
        calibration_runs=d.get("calibration_runs", 24),
    )


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(experiment_to_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


# -- reference setup ---------------------------------------------------------

def reference_sim(seed: int = 0, duration_s: float = 6.54) -> SimConfig:
    """Six-bus scenario: three channels ride near the +180 boundary under a
    dipping slow arc, three sit safely low; the arc's post-window rise is
    what a 3 s clock shift drags across the boundary."""
    onset = 50 / 30.0
    beta, period = 24.0, 14.0
    wander = WanderSpec(
        amplitude_hz=beta * 2 * math.pi / (360.0 * period),
        period_s=period,
        walk_std_hz=0.0002,
        phase_rad=-2 * math.pi * onset / period,
    )
    return SimConfig(
        m=6,
        rate_hz=30.0,
        duration_s=duration_s,
        seed=seed,
        freq_wander=wander,
        channel_offsets_deg=(172.0, 170.5, 169.0, 80.0, 95.0, 110.0),
        noise_std_deg=0.2,
    )


def reference_experiment(seed: int = 7) -> ExperimentConfig:
    """Timing (T = 3 s) and random-vector FDIA on the reference scenario."""
    onset = 50 / 30.0
    sim = reference_sim()
    ids = sim.channel_ids
    return ExperimentConfig(
        sim=sim,
        detector=DetectorConfig(),
        fdia=RandomFdia(onset, 0.0, 30.0, (ids[3],)),
        timing=TimingSpec(onset, 3.0, ids[:3]),
        seed=seed,
    )


# -- run ----------------------------------------------------------------------

@dataclass(frozen=True)
class VariantResult:
    name: str
    channels: list[ChannelSeries]
    classifications: list[Classification]


@dataclass(frozen=True)
class ExperimentResult:
    config_sha256: str
    baseline: GateBaseline
    clean_channels: list[ChannelSeries]
    variants: list[VariantResult]
    files: dict[str, str]  # name -> content


def _resolve_fdia(
    spec: FdiaSpec | RandomFdia, channels: list[ChannelSeries], root_seed: int
) -> FdiaSpec:
    if isinstance(spec, FdiaSpec):
        return spec
    ch = next(c for c in channels if c.channel_id in spec.affected_channels)
    count = ch.n - ch.index_at(spec.onset_s)
    values = uniform_attack_values(
        count, seed_for(root_seed, "fdia"), spec.low, spec.high
    )
    return FdiaSpec(spec.onset_s, values, spec.affected_channels)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the full loop and return all artifacts as in-memory files."""
    sha = config_hash(config)
    det = replace(config.detector, seed=seed_for(config.seed, "perm"))

    # gate calibration on derived-seed clean runs, one window each
    cal_windows = []
    win_s = det.window_n / config.sim.rate_hz
    for i in range(config.calibration_runs):
        cal_sim = replace(
            config.sim,
            seed=seed_for(config.seed, f"cal{i}"),
            duration_s=win_s,
        )
        cal_windows.append(
            assemble_matrix(generate(cal_sim), 0.0, det.window_n)
        )
    baseline = calibrate_gate_windows(cal_windows, det)
    det = det.with_baseline(baseline)

    base_sim = replace(config.sim, seed=seed_for(config.seed, "sim"))
    clean = generate(base_sim)
    scenario = clean
    for ev in config.events:
        scenario = inject_event(scenario, ev)

    variants: list[VariantResult] = []
    attacked_any = config.fdia is not None or config.timing is not None
    if not attacked_any:
        variants.append(
            VariantResult("base", scenario, classify_stream(scenario, det))
        )
    if config.fdia is not None:
        spec = _resolve_fdia(config.fdia, scenario, config.seed)
        chans = inject_fdia(scenario, spec)
        variants.append(VariantResult("fdia", chans, classify_stream(chans, det)))
    if config.timing is not None:
        chans = inject_timing(scenario, config.timing)
        variants.append(
            VariantResult("timing", chans, classify_stream(chans, det))
        )

    files: dict[str, str] = {}
    names = config.outputs
    files[names.channels_clean] = channels_to_csv(scenario)
    meta_base = {
        "config_sha256": sha,
        "seed": config.seed,
        "gate_raw_median": baseline.raw_median,
        "gate_raw_iqr": baseline.raw_iqr,
    }
    for v in variants:
        files[names.channels_variant.format(variant=v.name)] = channels_to_csv(
            v.channels
        )
        files[names.unwrap_variant.format(variant=v.name)] = unwrap_to_csv(
            v.channels
        )
        files[names.verdicts_variant.format(variant=v.name)] = verdicts_to_jsonl(
            v.classifications, meta={**meta_base, "variant": v.name}
        )
    files.update(_figures(config, sha, det, scenario, variants))
    files[names.manifest] = json.dumps(
        {
            "config_sha256": sha,
            "seed": config.seed,
            "config": experiment_to_dict(config),
            "variants": [v.name for v in variants],
            "verdicts": {
                v.name: [c.verdict.value for c in v.classifications]
                for v in variants
            },
        },
        sort_keys=True,
        indent=2,
    )
    return ExperimentResult(sha, baseline, scenario, variants, files)


def _focus_window(config: ExperimentConfig, det: DetectorConfig) -> int:
    onsets = []
    if config.timing is not None:
        onsets.append(config.timing.onset_s)
    if config.fdia is not None:
        onsets.append(config.fdia.onset_s)
    if not onsets:
        return 0
    win_s = det.window_n / config.sim.rate_hz
    return int(min(onsets) // win_s)


def _figures(config, sha, det, scenario, variants) -> dict[str, str]:
    """Unwrapped-angle comparison plus raw/unwrapped error profile charts."""
    provenance = f"config_sha256={sha} seed={config.seed}"
    w = _focus_window(config, det)
    rate = config.sim.rate_hz
    start = scenario[0].t0 + w * det.window_n / rate
    names = config.outputs
    out: dict[str, str] = {}

    def window_of(channels):
        return assemble_matrix(channels, start, det.window_n)

    curve_sets = [("normal", window_of(scenario))]
    for v in variants:
        if v.name in ("fdia", "timing"):
            curve_sets.append((v.name, window_of(v.channels)))

    t = np.arange(det.window_n) / rate + start
    focus_channel = 0
    if config.timing is not None and config.timing.affected_channels:
        ids = [c.channel_id for c in scenario]
        focus_channel = ids.index(config.timing.affected_channels[0])
    angle_series = []
    raw_series = []
    unw_series = []
    for label, Y in curve_sets:
        U = unwrap_matrix(Y.values)
        angle_series.append((label, t, U[focus_channel]))
        raw_prof = error_profile(build_hankel(Y.values, L=det.hankel_L()))
        unw_prof = error_profile(build_hankel(U, L=det.hankel_L(), kind="unwrapped"))
        ranks = np.arange(1, min(11, raw_prof.r_max + 1))
        raw_series.append((label, ranks, raw_prof.errors_pct[: ranks.size]))
        unw_series.append((label, ranks, unw_prof.errors_pct[: ranks.size]))
    out[names.fig_unwrapped] = svg_line_chart(
        angle_series,
        title="Unwrapped phase angle, focus window",
        xlabel="time (s)",
        ylabel="unwrapped angle (deg)",
        provenance=provenance,
    )
    out[names.fig_profiles_raw] = svg_line_chart(
        raw_series,
        title="Low-rank error profile, raw angles",
        xlabel="rank r",
        ylabel="error (%)",
        provenance=provenance,
    )
    out[names.fig_profiles_unwrapped] = svg_line_chart(
        unw_series,
        title="Low-rank error profile, unwrapped angles",
        xlabel="rank r",
        ylabel="error (%)",
        provenance=provenance,
    )
    return out


def write_result(result: ExperimentResult, out_dir) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in result.files.items():
        (out / name).write_text(content, encoding="utf-8")
        written.append(str(out / name))
    return written


def worst_exit_code(classifications: list[Classification]) -> int:
    """0 all normal, 2 any attack verdict, 3 any event (attack wins)."""
    verdicts = {c.verdict for c in classifications}
    if Verdict.FDIA in verdicts or Verdict.TIMING_ATTACK in verdicts:
        return 2
    if Verdict.EVENT in verdicts:
        return 3
    return 0

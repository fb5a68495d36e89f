"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field


class HealthStatus(BaseModel):
    status: str
    version: str


class ChannelModel(BaseModel):
    channel_id: str
    rate_hz: float
    t0: float = 0.0
    angles_deg: list[float]
    magnitudes: Optional[list[float]] = None


class WanderModel(BaseModel):
    amplitude_hz: float = 0.02
    period_s: float = 300.0
    walk_std_hz: float = 0.001
    phase_rad: Optional[float] = None


class SimConfigModel(BaseModel):
    m: int = 6
    rate_hz: float = 30.0
    duration_s: float = 10.0
    seed: int = 0
    f_nominal_hz: float = 60.0
    f_offset_hz: float = 0.0
    freq_wander: Union[WanderModel, list[WanderModel]] = Field(
        default_factory=WanderModel
    )
    channel_offsets_deg: Optional[list[float]] = None
    noise_std_deg: float = 0.0
    channel_ids: Optional[list[str]] = None


class EventModel(BaseModel):
    onset_s: float
    shape: str
    magnitude_deg: float
    affected_channels: dict[str, float]
    duration_s: Optional[float] = None
    osc_freq_hz: float = 1.0


class FdiaModel(BaseModel):
    onset_s: float
    # constant, per-sample sequence, or {"uniform": [low, high]}
    attack_values: Union[float, list[float], dict[str, list[float]]]
    affected_channels: list[str]


class TimingModel(BaseModel):
    onset_s: float
    delay_s: float
    affected_channels: Optional[list[str]] = None


class DetectorModel(BaseModel):
    window_n: int = 100
    L: Optional[int] = None
    r_star: int = 1
    tau_perm: float = 1.0
    tau_unwrap: float = 0.5
    K_perm: int = 5
    seed: int = 0
    tau_gate: float = 3.0
    r_perm: int = 4
    r_max: Optional[int] = None
    perm_rule: str = "rank"
    agg_r_max: int = 5
    unwrap_rule: str = "divergence"
    stride: Optional[int] = None


class ExperimentModel(BaseModel):
    sim: SimConfigModel
    detector: DetectorModel = Field(default_factory=DetectorModel)
    events: list[EventModel] = Field(default_factory=list)
    fdia: Optional[FdiaModel] = None
    timing: Optional[TimingModel] = None
    seed: int = 0
    calibration_runs: int = 24


class SimulateRequest(BaseModel):
    sim: SimConfigModel


class ChannelsResponse(BaseModel):
    channels: list[ChannelModel]


class InjectEventRequest(BaseModel):
    channels: list[ChannelModel]
    event: EventModel


class InjectFdiaRequest(BaseModel):
    channels: list[ChannelModel]
    fdia: FdiaModel
    seed: int = 0  # resolves a {"uniform": ...} attack vector


class InjectTimingRequest(BaseModel):
    channels: list[ChannelModel]
    timing: TimingModel


class UnwrapRequest(BaseModel):
    channels: list[ChannelModel]


class UnwrappedChannelModel(ChannelModel):
    unwrapped_deg: list[float]
    roc: list[int]


class UnwrapResponse(BaseModel):
    channels: list[UnwrappedChannelModel]


class ProfileRequest(BaseModel):
    channels: Optional[list[ChannelModel]] = None
    matrix: Optional[list[list[float]]] = None
    domain: str = "raw"  # raw | unwrapped
    hankel: bool = True  # False profiles a given matrix directly
    permuted: bool = False
    seed: int = 0
    L: Optional[int] = None
    r_max: Optional[int] = None


class ProfileResponse(BaseModel):
    errors_pct: list[float]
    rows: int
    cols: int


class DetectRequest(BaseModel):
    channels: list[ChannelModel]
    detector: DetectorModel = Field(default_factory=DetectorModel)
    calibration_channels: Optional[list[ChannelModel]] = None


class EvidenceModel(BaseModel):
    e_r: list[float]
    e_rr: Optional[list[float]] = None
    e_ru: Optional[list[float]] = None
    gate_level: Optional[float] = None
    gate_fired: bool


class ClassificationModel(BaseModel):
    window_index: int
    window_start: float
    verdict: str
    evidence: EvidenceModel


class BaselineModel(BaseModel):
    raw_median: float
    raw_iqr: float
    unwrapped_median: float
    unwrapped_iqr: float
    n_windows: int


class DetectResponse(BaseModel):
    classifications: list[ClassificationModel]
    baseline: Optional[BaselineModel] = None
    exit_code: int


class RunRequest(BaseModel):
    experiment: ExperimentModel


class RunResponse(BaseModel):
    config_sha256: str
    files: dict[str, str]
    verdicts: dict[str, list[str]]
    exit_code: int

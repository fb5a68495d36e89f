"""Timing-attack detection for synchrophasor angle streams."""

from .angles import (
    ChannelSeries,
    MeasurementMatrix,
    PhasorSample,
    assemble_matrix,
    wrap_angle,
)
from .attack import (
    FdiaSpec,
    TimingSpec,
    inject_fdia,
    inject_timing,
    uniform_attack_values,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DataFormatError,
    DomainError,
    PhasorGuardError,
    RangeError,
    SpecError,
)
from .lowrank import (
    HankelMatrix,
    RankErrorProfile,
    SvdFactorization,
    build_hankel,
    error_profile,
    permute_columns,
    rank_error,
    svd,
    tail_error,
)
from .detector import (
    Classification,
    DetectorConfig,
    Evidence,
    GateBaseline,
    Verdict,
    anomaly_gate,
    calibrate_gate,
    calibrate_gate_windows,
    classify_stream,
    classify_window,
)
from .simulate import (
    EventSpec,
    SimConfig,
    WanderSpec,
    generate,
    inject_event,
    make_timestamps,
)
from .unwrap import UnwrapResult, step_n, unwrap_matrix, unwrap_series

__version__ = "0.1.0"

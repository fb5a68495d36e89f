"""FastAPI service wrapping the core package.

Endpoints are pure compute: JSON in, JSON out, no server-side files.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..angles import ChannelSeries, assemble_matrix
from ..attack import inject_fdia, inject_timing
from ..detector import calibrate_gate, classify_stream
from ..errors import DataFormatError, PhasorGuardError
from ..experiment import (
    RandomFdia,
    detector_from_dict,
    event_from_dict,
    experiment_from_dict,
    fdia_from_dict,
    run_experiment,
    seed_for,
    sim_config_from_dict,
    timing_from_dict,
    uniform_attack_values,
    worst_exit_code,
)
from ..lowrank import build_hankel, error_profile, permute_columns
from ..simulate import generate, inject_event
from ..unwrap import unwrap_matrix, unwrap_series
from . import schemas as S


def _to_series(models: list[S.ChannelModel]) -> list[ChannelSeries]:
    return [
        ChannelSeries(
            channel_id=m.channel_id,
            rate_hz=m.rate_hz,
            t0=m.t0,
            angles_deg=np.asarray(m.angles_deg, dtype=float),
            magnitudes=np.asarray(m.magnitudes, dtype=float)
            if m.magnitudes is not None
            else None,
        )
        for m in models
    ]


def _to_models(channels: list[ChannelSeries]) -> list[S.ChannelModel]:
    return [
        S.ChannelModel(
            channel_id=ch.channel_id,
            rate_hz=ch.rate_hz,
            t0=ch.t0,
            angles_deg=[float(v) for v in ch.angles_deg],
            magnitudes=[float(v) for v in ch.magnitudes]
            if ch.magnitudes is not None
            else None,
        )
        for ch in channels
    ]


def create_app() -> FastAPI:
    app = FastAPI(title="phasorguard", version=__version__)

    @app.exception_handler(PhasorGuardError)
    async def domain_error(request, exc: PhasorGuardError):
        status = 400 if isinstance(exc, DataFormatError) else 422
        return JSONResponse(
            status_code=status,
            content={"detail": str(exc), "error": type(exc).__name__},
        )

    @app.get("/health", response_model=S.HealthStatus)
    def health():
        return S.HealthStatus(status="ok", version=__version__)

    @app.post("/simulate", response_model=S.ChannelsResponse)
    def simulate(req: S.SimulateRequest):
        cfg = sim_config_from_dict(req.sim.model_dump())
        return S.ChannelsResponse(channels=_to_models(generate(cfg)))

    @app.post("/inject/event", response_model=S.ChannelsResponse)
    def inject_event_ep(req: S.InjectEventRequest):
        spec = event_from_dict(req.event.model_dump())
        out = inject_event(_to_series(req.channels), spec)
        return S.ChannelsResponse(channels=_to_models(out))

    @app.post("/inject/fdia", response_model=S.ChannelsResponse)
    def inject_fdia_ep(req: S.InjectFdiaRequest):
        channels = _to_series(req.channels)
        spec = fdia_from_dict(req.fdia.model_dump())
        if isinstance(spec, RandomFdia):
            ch = next(
                c for c in channels if c.channel_id in spec.affected_channels
            )
            count = ch.n - ch.index_at(spec.onset_s)
            from ..attack import FdiaSpec

            spec = FdiaSpec(
                spec.onset_s,
                uniform_attack_values(
                    count, seed_for(req.seed, "fdia"), spec.low, spec.high
                ),
                spec.affected_channels,
            )
        return S.ChannelsResponse(channels=_to_models(inject_fdia(channels, spec)))

    @app.post("/inject/timing", response_model=S.ChannelsResponse)
    def inject_timing_ep(req: S.InjectTimingRequest):
        spec = timing_from_dict(req.timing.model_dump())
        out = inject_timing(_to_series(req.channels), spec)
        return S.ChannelsResponse(channels=_to_models(out))

    @app.post("/unwrap", response_model=S.UnwrapResponse)
    def unwrap_ep(req: S.UnwrapRequest):
        out = []
        for ch in _to_series(req.channels):
            res = unwrap_series(ch.angles_deg)
            out.append(
                S.UnwrappedChannelModel(
                    channel_id=ch.channel_id,
                    rate_hz=ch.rate_hz,
                    t0=ch.t0,
                    angles_deg=[float(v) for v in ch.angles_deg],
                    magnitudes=[float(v) for v in ch.magnitudes]
                    if ch.magnitudes is not None
                    else None,
                    unwrapped_deg=[float(v) for v in res.unwrapped_deg],
                    roc=[int(v) for v in res.roc],
                )
            )
        return S.UnwrapResponse(channels=out)

    @app.post("/profile", response_model=S.ProfileResponse)
    def profile_ep(req: S.ProfileRequest):
        if req.matrix is not None:
            vals = np.asarray(req.matrix, dtype=float)
        elif req.channels:
            channels = _to_series(req.channels)
            n = min(ch.n for ch in channels)
            vals = assemble_matrix(channels, channels[0].t0, n).values
        else:
            raise DataFormatError("provide either channels or matrix")
        if req.domain == "unwrapped":
            vals = unwrap_matrix(vals)
        if not req.hankel:
            if req.permuted:
                raise DataFormatError(
                    "the shuffle contrast needs the Hankel embedding"
                )
            prof = error_profile(vals, r_max=req.r_max)
            return S.ProfileResponse(
                errors_pct=[float(v) for v in prof.errors_pct],
                rows=int(vals.shape[0]),
                cols=int(vals.shape[1]),
            )
        H = build_hankel(vals, L=req.L, kind=req.domain)
        if req.permuted:
            H = permute_columns(H, req.seed)
        prof = error_profile(H, r_max=req.r_max)
        return S.ProfileResponse(
            errors_pct=[float(v) for v in prof.errors_pct],
            rows=H.rows,
            cols=H.cols,
        )

    @app.post("/detect", response_model=S.DetectResponse)
    def detect_ep(req: S.DetectRequest):
        det = detector_from_dict(req.detector.model_dump())
        baseline_model = None
        if req.calibration_channels:
            baseline = calibrate_gate(_to_series(req.calibration_channels), det)
            det = det.with_baseline(baseline)
            baseline_model = S.BaselineModel(
                raw_median=baseline.raw_median,
                raw_iqr=baseline.raw_iqr,
                unwrapped_median=baseline.unwrapped_median,
                unwrapped_iqr=baseline.unwrapped_iqr,
                n_windows=baseline.n_windows,
            )
        classifications = classify_stream(_to_series(req.channels), det)
        out = [
            S.ClassificationModel(
                window_index=c.window_index,
                window_start=c.window_start,
                verdict=c.verdict.value,
                evidence=S.EvidenceModel(
                    e_r=[float(v) for v in c.evidence.e_r],
                    e_rr=[float(v) for v in c.evidence.e_rr]
                    if c.evidence.e_rr is not None
                    else None,
                    e_ru=[float(v) for v in c.evidence.e_ru]
                    if c.evidence.e_ru is not None
                    else None,
                    gate_level=c.evidence.gate_level,
                    gate_fired=c.evidence.gate_fired,
                ),
            )
            for c in classifications
        ]
        return S.DetectResponse(
            classifications=out,
            baseline=baseline_model,
            exit_code=worst_exit_code(classifications),
        )

    @app.post("/run", response_model=S.RunResponse)
    def run_ep(req: S.RunRequest):
        config = experiment_from_dict(req.experiment.model_dump())
        result = run_experiment(config)
        codes = [
            worst_exit_code(v.classifications) for v in result.variants
        ]
        exit_code = 0
        if 2 in codes:
            exit_code = 2
        elif 3 in codes:
            exit_code = 3
        return S.RunResponse(
            config_sha256=result.config_sha256,
            files=result.files,
            verdicts={
                v.name: [c.verdict.value for c in v.classifications]
                for v in result.variants
            },
            exit_code=exit_code,
        )

    return app


app = create_app()

import dataclasses
import warnings

import numpy as np
import pytest

import phasorguard as pg
from phasorguard.errors import ConfigError, DomainError, SpecError
from phasorguard.experiment import reference_sim

from conftest import ONSET_S, WINDOW_N, first_window


def _calibrated_config(n_runs=24, **kwargs):
    cfg = pg.DetectorConfig(**kwargs)
    windows = []
    for i in range(n_runs):
        sim = dataclasses.replace(reference_sim(seed=10_000 + i),
                                  duration_s=WINDOW_N / 30.0)
        windows.append(first_window(pg.generate(sim)))
    return cfg.with_baseline(pg.calibrate_gate_windows(windows, cfg))


@pytest.fixture(scope="module")
def calibrated():
    return _calibrated_config()


def _scenario(seed, kind):
    chans = pg.generate(reference_sim(seed=seed))
    ids = [c.channel_id for c in chans]
    if kind == "clean":
        pass
    elif kind == "event":
        chans = pg.inject_event(chans, pg.EventSpec(
            ONSET_S, "step", 12.0, {ids[3]: 1.0, ids[4]: 0.6}))
    elif kind == "fdia":
        vals = pg.uniform_attack_values(200, seed + 777)
        chans = pg.inject_fdia(chans, pg.FdiaSpec(ONSET_S, vals, (ids[3],)))
    elif kind == "timing":
        chans = pg.inject_timing(chans, pg.TimingSpec(ONSET_S, 3.0, tuple(ids[:3])))
    return first_window(chans)


class TestClassifyWindow:
    def test_clean_window_normal(self, calibrated):
        c = pg.classify_window(_scenario(1, "clean"), calibrated)
        assert c.verdict is pg.Verdict.NORMAL
        assert not c.evidence.gate_fired
        assert c.evidence.e_rr is None and c.evidence.e_ru is None

    def test_timing_window(self, calibrated):
        c = pg.classify_window(_scenario(1, "timing"), calibrated)
        assert c.verdict is pg.Verdict.TIMING_ATTACK
        r = calibrated.r_star - 1
        assert c.evidence.e_ru[r] < 0.5 * c.evidence.e_r[r]

    def test_fdia_window(self, calibrated):
        c = pg.classify_window(_scenario(1, "fdia"), calibrated)
        assert c.verdict is pg.Verdict.FDIA
        # no wrap transition touched: the two profiles coincide exactly
        assert np.array_equal(c.evidence.e_r, c.evidence.e_ru)

    def test_event_window(self, calibrated):
        c = pg.classify_window(_scenario(1, "event"), calibrated)
        assert c.verdict is pg.Verdict.EVENT

    def test_deterministic(self, calibrated):
        a = pg.classify_window(_scenario(2, "event"), calibrated, window_index=3)
        b = pg.classify_window(_scenario(2, "event"), calibrated, window_index=3)
        assert a.verdict == b.verdict
        assert np.array_equal(a.evidence.e_rr, b.evidence.e_rr)

    def test_without_baseline_never_normal(self):
        cfg = pg.DetectorConfig()
        c = pg.classify_window(_scenario(1, "clean"), cfg)
        assert c.verdict is not pg.Verdict.NORMAL

    def test_window_size_checked(self, calibrated):
        Y = pg.MeasurementMatrix(np.zeros((2, 50)) + 1.0, ("a", "b"), 0.0, 30.0)
        with pytest.raises(SpecError):
            pg.classify_window(Y, calibrated)

    def test_zero_window_rejected(self, calibrated):
        Y = pg.MeasurementMatrix(np.zeros((2, WINDOW_N)), ("a", "b"), 0.0, 30.0)
        with pytest.raises(DomainError):
            pg.classify_window(Y, calibrated)


class TestAnomalyGate:
    def test_clean_passes_quietly(self, calibrated):
        fired = [
            pg.anomaly_gate(_scenario(seed, "clean"), calibrated)
            for seed in range(30, 60)
        ]
        assert np.mean(fired) < 0.01

    def test_timing_fires(self, calibrated):
        assert pg.anomaly_gate(_scenario(3, "timing"), calibrated)

    def test_no_baseline_always_proceeds(self):
        assert pg.anomaly_gate(_scenario(3, "clean"), pg.DetectorConfig())

    def test_zero_matrix_domain_error(self, calibrated):
        Y = pg.MeasurementMatrix(np.zeros((2, WINDOW_N)), ("a", "b"), 0.0, 30.0)
        with pytest.raises(DomainError):
            pg.anomaly_gate(Y, calibrated)


class TestClassifyStream:
    def test_length_exactly_one_window(self, calibrated):
        sim = dataclasses.replace(reference_sim(seed=5),
                                  duration_s=WINDOW_N / 30.0)
        out = pg.classify_stream(pg.generate(sim), calibrated)
        assert len(out) == 1

    def test_partial_window_skipped_with_warning(self, calibrated):
        sim = dataclasses.replace(reference_sim(seed=5),
                                  duration_s=(WINDOW_N - 1) / 30.0)
        with pytest.warns(UserWarning):
            out = pg.classify_stream(pg.generate(sim), calibrated)
        assert out == []

    def test_hour_long_stream_window_count(self, calibrated):
        # 1 hour at 30 Hz with n=100 windows -> 1080 classifications
        sim = dataclasses.replace(reference_sim(seed=6), duration_s=3600.0)
        chans = pg.generate(sim)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = pg.classify_stream(chans, calibrated)
        assert len(out) == 1080
        assert out[-1].window_start == pytest.approx(1079 * 100 / 30.0)

    def test_window_indices_and_starts(self, calibrated):
        sim = dataclasses.replace(reference_sim(seed=7),
                                  duration_s=3 * WINDOW_N / 30.0)
        out = pg.classify_stream(pg.generate(sim), calibrated)
        assert [c.window_index for c in out] == [0, 1, 2]
        assert out[1].window_start == pytest.approx(WINDOW_N / 30.0)

    def test_overlap_stride(self, calibrated):
        sim = dataclasses.replace(reference_sim(seed=7),
                                  duration_s=2 * WINDOW_N / 30.0)
        chans = pg.generate(sim)
        cfg = dataclasses.replace(calibrated, stride=50)
        out = pg.classify_stream(chans, cfg)
        # hops of 50 over 200 samples: starts at 0, 50, 100
        assert len(out) == 3
        assert out[1].window_start == pytest.approx(50 / 30.0)
        # default stride reproduces the non-overlapping slicing
        assert len(pg.classify_stream(chans, calibrated)) == 2


class TestCalibration:
    def test_needs_two_windows(self):
        cfg = pg.DetectorConfig()
        sim = dataclasses.replace(reference_sim(seed=1),
                                  duration_s=WINDOW_N / 30.0)
        with pytest.raises(ConfigError):
            pg.calibrate_gate(pg.generate(sim), cfg)

    def test_stream_calibration(self):
        cfg = pg.DetectorConfig()
        sim = dataclasses.replace(reference_sim(seed=2),
                                  duration_s=4 * WINDOW_N / 30.0)
        baseline = pg.calibrate_gate(pg.generate(sim), cfg)
        assert baseline.n_windows == 4
        assert baseline.raw_iqr >= 0

    def test_gate_level_formula(self):
        b = pg.GateBaseline(1.0, 0.2, 0.5, 0.1, 10)
        assert b.gate_level(3.0) == pytest.approx(1.6)


class TestConfigValidation:
    def test_bad_values(self):
        with pytest.raises(ConfigError):
            pg.DetectorConfig(window_n=4)
        with pytest.raises(ConfigError):
            pg.DetectorConfig(r_star=0)
        with pytest.raises(ConfigError):
            pg.DetectorConfig(tau_perm=-0.1)
        with pytest.raises(ConfigError):
            pg.DetectorConfig(perm_rule="sometimes")
        with pytest.raises(ConfigError):
            pg.DetectorConfig(unwrap_rule="vibes")

    def test_clean_baseline_rule_requires_calibration(self):
        cfg = pg.DetectorConfig(unwrap_rule="clean-baseline")
        with pytest.raises(ConfigError):
            pg.classify_window(_scenario(1, "timing"), cfg)

    def test_aggregate_perm_rule_runs(self, calibrated):
        cfg = dataclasses.replace(calibrated, perm_rule="aggregate")
        c = pg.classify_window(_scenario(1, "event"), cfg)
        assert c.verdict is pg.Verdict.EVENT

    def test_literal_unwrap_rule_runs(self, calibrated):
        cfg = dataclasses.replace(calibrated, unwrap_rule="literal")
        # under the literal direction the unwrapped error can only drop,
        # so the timing window falls through to another verdict
        c = pg.classify_window(_scenario(1, "timing"), cfg)
        assert c.verdict in (pg.Verdict.EVENT, pg.Verdict.FDIA)

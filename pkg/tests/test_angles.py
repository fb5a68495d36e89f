import numpy as np
import pytest
from hypothesis import given, strategies as st

import phasorguard as pg
from phasorguard.errors import AlignmentError, DomainError, RangeError

finite_angles = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


class TestWrapAngle:
    def test_examples(self):
        assert pg.wrap_angle(181.0) == pytest.approx(-179.0)
        assert pg.wrap_angle(-180.0) == 180.0
        assert pg.wrap_angle(725.0) == pytest.approx(5.0)

    def test_boundary_belongs_to_positive_side(self):
        assert pg.wrap_angle(180.0) == 180.0
        assert pg.wrap_angle(-540.0) == 180.0

    def test_vectorized(self):
        out = pg.wrap_angle(np.array([181.0, -180.0, 725.0, 0.0]))
        assert np.allclose(out, [-179.0, 180.0, 5.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            pg.wrap_angle(float("nan"))
        with pytest.raises(DomainError):
            pg.wrap_angle(np.array([0.0, np.inf]))

    @given(finite_angles)
    def test_idempotent(self, x):
        w = pg.wrap_angle(x)
        assert -180.0 < w <= 180.0
        assert pg.wrap_angle(w) == w

    @given(finite_angles, st.integers(min_value=-100, max_value=100))
    def test_periodic_in_full_turns(self, x, k):
        assert pg.wrap_angle(x + 360.0 * k) == pytest.approx(
            pg.wrap_angle(x), abs=1e-6
        )


class TestPhasorSample:
    def test_valid(self):
        s = pg.PhasorSample(t=1.0, angle_deg=45.0, magnitude=1.02)
        assert s.angle_deg == 45.0

    def test_angle_out_of_range(self):
        with pytest.raises(DomainError):
            pg.PhasorSample(t=0.0, angle_deg=-180.0)

    def test_negative_time(self):
        with pytest.raises(DomainError):
            pg.PhasorSample(t=-1.0, angle_deg=0.0)

    def test_magnitude_positive(self):
        with pytest.raises(DomainError):
            pg.PhasorSample(t=0.0, angle_deg=0.0, magnitude=0.0)


class TestChannelSeries:
    def test_timestamps_uniform(self):
        ch = pg.ChannelSeries("a", 30.0, 0.0, np.zeros(10))
        t = ch.timestamps()
        assert np.allclose(np.diff(t), 1 / 30.0)

    def test_needs_two_samples(self):
        with pytest.raises(DomainError):
            pg.ChannelSeries("a", 30.0, 0.0, np.zeros(1))

    def test_angles_validated(self):
        with pytest.raises(DomainError):
            pg.ChannelSeries("a", 30.0, 0.0, np.array([0.0, 181.0]))

    def test_samples_materialized(self):
        ch = pg.ChannelSeries("a", 10.0, 0.0, np.array([1.0, 2.0]))
        samples = ch.samples
        assert [s.angle_deg for s in samples] == [1.0, 2.0]
        assert samples[1].t == pytest.approx(0.1)

    def test_immutable_storage(self):
        ch = pg.ChannelSeries("a", 10.0, 0.0, np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            ch.angles_deg[0] = 5.0

    def test_index_at_off_grid(self):
        ch = pg.ChannelSeries("a", 30.0, 0.0, np.zeros(10))
        with pytest.raises(RangeError):
            ch.index_at(0.02)


def _mk_channels(m, n, rate=30.0):
    rng = np.random.default_rng(0)
    return [
        pg.ChannelSeries(
            channel_id=f"c{i}", rate_hz=rate, t0=0.0,
            angles_deg=pg.wrap_angle(rng.uniform(-179.0, 180.0, n)),
        )
        for i in range(m)
    ]


class TestAssembleMatrix:
    def test_two_channels_full_window(self):
        chans = _mk_channels(2, 100)
        Y = pg.assemble_matrix(chans, 0.0, 100)
        assert Y.values.shape == (2, 100)

    def test_six_by_hundred_shape(self):
        chans = _mk_channels(6, 100)
        Y = pg.assemble_matrix(chans, 0.0, 100)
        assert Y.values.shape == (6, 100)
        assert Y.channel_ids == tuple(f"c{i}" for i in range(6))

    def test_rows_bit_exact(self):
        chans = _mk_channels(3, 50)
        Y = pg.assemble_matrix(chans, 0.0, 50)
        for i, ch in enumerate(chans):
            assert np.array_equal(Y.values[i], ch.angles_deg)

    def test_row_order_follows_input(self):
        chans = _mk_channels(3, 30)
        Y = pg.assemble_matrix(list(reversed(chans)), 0.0, 30)
        assert Y.channel_ids == ("c2", "c1", "c0")

    def test_off_grid_start_rejected(self):
        chans = _mk_channels(2, 30)
        with pytest.raises(RangeError):
            pg.assemble_matrix(chans, 0.0001, 10)

    def test_window_beyond_extent(self):
        chans = _mk_channels(2, 30)
        with pytest.raises(RangeError):
            pg.assemble_matrix(chans, 0.0, 31)

    def test_mismatched_rates(self):
        a = pg.ChannelSeries("a", 30.0, 0.0, np.zeros(10))
        b = pg.ChannelSeries("b", 60.0, 0.0, np.zeros(10))
        with pytest.raises(AlignmentError):
            pg.assemble_matrix([a, b], 0.0, 8)

    def test_misaligned_t0(self):
        a = pg.ChannelSeries("a", 30.0, 0.0, np.zeros(10))
        b = pg.ChannelSeries("b", 30.0, 0.5, np.zeros(10))
        with pytest.raises(RangeError):
            pg.assemble_matrix([a, b], 0.0, 8)

    def test_minimum_window(self):
        chans = _mk_channels(1, 10)
        with pytest.raises(DomainError):
            pg.assemble_matrix(chans, 0.0, 3)

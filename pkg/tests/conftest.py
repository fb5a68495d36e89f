"""Shared scenario builders used across the test suite.

Two tuned setups:

* boundary regime: all channels anchored on the +180 wrap boundary so the
  wrapped stream hops sign constantly (many wrap transitions) while the
  unwrapped stream is nearly flat; a slow angle arc with its extremum at
  the splice instant makes clock-shift deviations grow steeply with the
  shift size.
* reference regime (from phasorguard.experiment): three channels ride
  near the boundary under a dipping arc whose post-window rise only a
  clock shift can drag into the window; three channels sit safely low for
  event and false-data injections.
"""

import math

import numpy as np
import pytest

import phasorguard as pg
from phasorguard.experiment import reference_sim

RATE = 30.0
WINDOW_N = 100
WINDOW_S = WINDOW_N / RATE
ONSET_S = 50 / RATE  # mid-window splice


def boundary_sim(seed: int, beta: float = 9.0, period: float = 14.0,
                 noise: float = 0.5, walk: float = 0.0005,
                 duration_s: float = WINDOW_S + 3.2) -> pg.SimConfig:
    wander = pg.WanderSpec(
        amplitude_hz=beta * 2 * math.pi / (360.0 * period),
        period_s=period,
        walk_std_hz=walk,
        phase_rad=-2 * math.pi * ONSET_S / period,
    )
    return pg.SimConfig(
        m=6, rate_hz=RATE, duration_s=duration_s, seed=seed,
        freq_wander=wander, channel_offsets_deg=tuple([180.0] * 6),
        noise_std_deg=noise,
    )


def reference_channels(seed: int):
    return pg.generate(reference_sim(seed=seed))


def first_window(channels):
    return pg.assemble_matrix(channels, 0.0, WINDOW_N)


def window_transition_count(Y) -> int:
    return int(sum(
        np.count_nonzero(pg.unwrap_series(row).n_steps) for row in Y.values
    ))


@pytest.fixture(scope="session")
def detector_config():
    return pg.DetectorConfig()

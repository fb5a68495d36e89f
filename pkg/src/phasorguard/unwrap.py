"""Roll-over-counter angle unwrapping.

Consecutive wrapped samples theta_i, theta_{i+1} define an integer step
N = argmin_N |theta_{i+1} - theta_i + 360 N| (ties broken toward 0).  The
running sum of steps is the roll-over counter; the unwrapped angle is
wrapped + 360 * counter.  The counter restarts at 0 for every series passed
in, so unwrapped values stay window-scale instead of growing without bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import MeasurementMatrix
from .errors import DomainError


def _round_half_toward_zero(x: np.ndarray) -> np.ndarray:
    """Nearest integer, exact .5 ties toward zero."""
    return np.where(x >= 0, np.ceil(x - 0.5), np.floor(x + 0.5))


def step_n(theta_i: float, theta_next: float) -> int:
    """Integer roll-over step between two wrapped angles.

    Closed form round((theta_i - theta_next) / 360); for inputs in
    (-180, 180] the result is in {-1, 0, +1}.
    """
    for v in (theta_i, theta_next):
        if not (-180.0 < v <= 180.0):
            raise DomainError(f"angle {v} outside (-180, 180]")
    return int(_round_half_toward_zero(np.asarray((theta_i - theta_next) / 360.0)))


@dataclass(frozen=True)
class UnwrapResult:
    """Unwrapped series with its counter track.

    Invariants: roc[0] == 0, roc[i+1] == roc[i] + n_steps[i],
    unwrapped[i] == wrapped[i] + 360 * roc[i], and every unwrapped
    increment has magnitude <= 180.
    """

    unwrapped_deg: np.ndarray
    roc: np.ndarray
    n_steps: np.ndarray


def unwrap_series(wrapped) -> UnwrapResult:
    """Unwrap one wrapped-angle series (degrees in (-180, 180])."""
    w = np.asarray(wrapped, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise DomainError("need a 1-D series with at least one sample")
    if not np.all(np.isfinite(w)):
        raise DomainError("non-finite angle in series")
    if np.any(w <= -180.0) or np.any(w > 180.0):
        raise DomainError("angles must lie in (-180, 180]")
    steps = _round_half_toward_zero((w[:-1] - w[1:]) / 360.0).astype(int)
    roc = np.concatenate([[0], np.cumsum(steps)])
    return UnwrapResult(unwrapped_deg=w + 360.0 * roc, roc=roc, n_steps=steps)


def unwrap_matrix(Y) -> np.ndarray:
    """Row-wise unwrap of an m x n wrapped-angle matrix (or MeasurementMatrix)."""
    vals = Y.values if isinstance(Y, MeasurementMatrix) else np.asarray(Y, dtype=float)
    if vals.ndim != 2:
        raise DomainError("expected a 2-D matrix")
    return np.vstack([unwrap_series(row).unwrapped_deg for row in vals])

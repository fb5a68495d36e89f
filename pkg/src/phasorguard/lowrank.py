"""Block-Hankel construction, SVD truncation errors, and the shuffle test.

The per-channel Hankel block of a length-n stream has L rows and
C = n - L + 1 columns, entry (i, j) = stream[i + j]; blocks stack
vertically in channel order.  The default L = floor(n/2) + 2 gives the
312-row shape for 6 channels of 100 samples.

`permute_columns` is the temporal-shuffle contrast: permuting the columns
of a matrix in place is an orthogonal transform and provably cannot change
its singular values, so the operative procedure permutes the *underlying
sample order* (one shared draw across channels, preserving cross-channel
alignment) and rebuilds the block-Hankel from the shuffled streams.  For
temporally smooth data this inflates the low-rank error at small ranks;
for injected white content it changes almost nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import MeasurementMatrix
from .errors import DomainError, SpecError

# Double-precision margins used by contracts and tests.
RECONSTRUCTION_RTOL = 1e-9
FORMULA_AGREEMENT_RTOL = 1e-6
ZERO_RANK_TOL = 1e-6


@dataclass(frozen=True)
class HankelMatrix:
    """Stacked per-channel Hankel blocks of an m x n angle matrix."""

    values: np.ndarray
    m: int
    L: int
    n: int
    kind: str = "raw"  # raw | unwrapped | permuted

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    def block(self, c: int) -> np.ndarray:
        return self.values[c * self.L : (c + 1) * self.L]

    def streams(self) -> np.ndarray:
        """Recover the m x n source matrix from the blocks."""
        out = np.empty((self.m, self.n))
        C = self.cols
        for c in range(self.m):
            b = self.block(c)
            out[c, :C] = b[0]
            out[c, C:] = b[1:, -1]
        return out


def default_window(n: int) -> int:
    return n // 2 + 2


def _hankel_block(stream: np.ndarray, L: int) -> np.ndarray:
    C = stream.size - L + 1
    idx = np.arange(L)[:, None] + np.arange(C)[None, :]
    return stream[idx]


def build_hankel(Y, L: int | None = None, kind: str = "raw") -> HankelMatrix:
    """Build the block-Hankel matrix of an m x n matrix (or a single stream)."""
    if isinstance(Y, MeasurementMatrix):
        vals = Y.values
    else:
        vals = np.asarray(Y, dtype=float)
        if vals.ndim == 1:
            vals = vals[None, :]
    m, n = vals.shape
    if L is None:
        L = default_window(n)
    if L < 2:
        raise SpecError(f"Hankel window L={L} must be >= 2")
    if n - L + 1 < 2:
        raise SpecError(f"L={L} leaves fewer than 2 columns for n={n}")
    blocks = [_hankel_block(vals[c], L) for c in range(m)]
    return HankelMatrix(values=np.vstack(blocks), m=m, L=L, n=n, kind=kind)


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD with singular values sorted descending."""

    U: np.ndarray
    singular_values: np.ndarray
    Vt: np.ndarray

    def reconstruct(self, r: int | None = None) -> np.ndarray:
        if r is None:
            r = self.singular_values.size
        return (self.U[:, :r] * self.singular_values[:r]) @ self.Vt[:r]


def svd(M) -> SvdFactorization:
    vals = M.values if isinstance(M, HankelMatrix) else np.asarray(M, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("matrix has non-finite entries")
    U, s, Vt = np.linalg.svd(vals, full_matrices=False)
    return SvdFactorization(U=U, singular_values=s, Vt=Vt)


def rank_error(fac: SvdFactorization, M, r: int) -> float:
    """Relative Frobenius error (percent) of the best rank-r truncation.

    Computed by explicit truncated reconstruction; `tail_error` is the
    independent discarded-singular-value route the tests compare against.
    """
    vals = M.values if isinstance(M, HankelMatrix) else np.asarray(M, dtype=float)
    norm = np.linalg.norm(vals)
    if norm == 0.0:
        raise DomainError("rank error undefined for the zero matrix")
    if not 1 <= r <= fac.singular_values.size:
        raise DomainError(f"rank {r} outside [1, {fac.singular_values.size}]")
    return 100.0 * np.linalg.norm(fac.reconstruct(r) - vals) / norm


def tail_error(singular_values: np.ndarray, r: int) -> float:
    """Rank-r error (percent) from the discarded singular values alone."""
    s2 = np.asarray(singular_values, dtype=float) ** 2
    total = s2.sum()
    if total == 0.0:
        raise DomainError("rank error undefined for the zero matrix")
    return 100.0 * np.sqrt(s2[r:].sum() / total)


@dataclass(frozen=True)
class RankErrorProfile:
    """errors_pct[r-1] is the rank-r truncation error in percent."""

    errors_pct: np.ndarray

    @property
    def r_max(self) -> int:
        return int(self.errors_pct.size)

    def at(self, r: int) -> float:
        return float(self.errors_pct[r - 1])


def error_profile(M, r_max: int | None = None) -> RankErrorProfile:
    """Truncation-error curve for r = 1..r_max from a single SVD."""
    vals = M.values if isinstance(M, HankelMatrix) else np.asarray(M, dtype=float)
    fac = svd(vals)
    k = fac.singular_values.size
    if r_max is None:
        r_max = k
    if not 1 <= r_max <= k:
        raise DomainError(f"r_max {r_max} outside [1, {k}]")
    s2 = fac.singular_values**2
    total = s2.sum()
    if total == 0.0:
        raise DomainError("error profile undefined for the zero matrix")
    # tail sums: sum of s2[r:] for each r, exact 0 at full rank
    tails = np.concatenate([np.cumsum(s2[::-1])[::-1][1:], [0.0]])
    return RankErrorProfile(errors_pct=100.0 * np.sqrt(tails[:r_max] / total))


def permute_columns(H: HankelMatrix, seed: int) -> HankelMatrix:
    """Shuffle the temporal order of the source streams and rebuild.

    One uniformly random, non-identity permutation of the n sample
    positions, shared by every channel; deterministic per seed.
    """
    if H.cols < 2:
        raise SpecError("need at least 2 columns to permute")
    rng = np.random.default_rng(seed)
    n = H.n
    perm = rng.permutation(n)
    while np.array_equal(perm, np.arange(n)):
        perm = rng.permutation(n)
    shuffled = H.streams()[:, perm]
    return build_hankel(shuffled, L=H.L, kind="permuted")

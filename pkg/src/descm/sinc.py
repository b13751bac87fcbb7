"""Sinc basis functions and the collocated second-derivative stencil."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

_SERIES_CUTOFF = 1e-4


def sinc(z):
    """Normalised sinc, ``sin(pi z) / (pi z)`` with ``sinc(0) = 1``.

    A short Taylor series is used for ``|z| < 1e-4`` so the function is
    smooth through the removable singularity.
    """
    z = np.asarray(z, dtype=float)
    pz = np.pi * z
    small = np.abs(z) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, pz)
    series = 1.0 - pz ** 2 / 6.0 + pz ** 4 / 120.0
    out = np.where(small, series, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def sinc_basis(j, h, x):
    """Translated, scaled sinc ``S(j, h)(x) = sinc(x/h - j)``."""
    if h <= 0:
        raise ValueError("mesh size h must be positive")
    return sinc(np.asarray(x, dtype=float) / h - j)


@dataclass(frozen=True)
class ToeplitzSymmetric:
    """Symmetric Toeplitz matrix stored by its first row ``t_0 .. t_{n-1}``."""

    first_row: np.ndarray

    def __post_init__(self):
        row = np.array(self.first_row, copy=True)
        row.setflags(write=False)
        object.__setattr__(self, "first_row", row)

    @property
    def size(self) -> int:
        return len(self.first_row)

    def entry(self, j: int, k: int):
        return self.first_row[abs(j - k)]

    def scaled(self, factor) -> "ToeplitzSymmetric":
        return ToeplitzSymmetric(self.first_row * factor)

    def to_dense(self) -> np.ndarray:
        if self.first_row.dtype == object:
            n = self.size
            idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
            return self.first_row[idx]
        return toeplitz(self.first_row)


def delta2_stencil(N: int) -> ToeplitzSymmetric:
    """``delta^(2)_{j,k} = h^2 S''(j,h)(kh)`` for ``-N <= j,k <= N``.

    Diagonal ``-pi^2/3``, off-diagonal ``-2 (-1)^r / r^2`` with ``r = |j-k|``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    r = np.arange(2 * N + 1, dtype=float)
    row = np.empty_like(r)
    row[0] = -np.pi ** 2 / 3.0
    rr = r[1:]
    row[1:] = -2.0 * np.where(rr % 2 == 0, 1.0, -1.0) / rr ** 2
    return ToeplitzSymmetric(row)


def delta2_stencil_mp(N: int):
    """Same stencil with mpmath entries at the current working precision."""
    import mpmath

    row = np.empty(2 * N + 1, dtype=object)
    row[0] = -mpmath.pi ** 2 / 3
    for r in range(1, 2 * N + 1):
        row[r] = mpmath.mpf(-2 * (-1) ** r) / r ** 2
    return ToeplitzSymmetric(row)

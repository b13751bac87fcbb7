"""Generalized symmetric-definite eigenproblem with diagonal ``D^2``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh

from .discretize import GeneralizedEigenSystem


class EigenSolveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    N: int
    h: float

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]


def _reduced(system: GeneralizedEigenSystem):
    """``A = D^-1 H D^-1`` and ``D^-1``; ``D`` is the positive root of ``D^2``."""
    d2 = system.d2
    if system.is_multiprecision:
        import mpmath

        if any(v <= 0 for v in d2):
            raise EigenSolveError("D^2 must have strictly positive entries")
        dinv = np.array([1 / mpmath.sqrt(v) for v in d2], dtype=object)
    else:
        if not np.all(d2 > 0):
            raise EigenSolveError("D^2 must have strictly positive entries")
        dinv = 1.0 / np.sqrt(d2)
    A = dinv[:, None] * system.H * dinv[None, :]
    return A, dinv


def generalized_eigs(system: GeneralizedEigenSystem, count: int | None = None) -> Spectrum:
    """The ``count`` smallest eigenvalues of ``det(H - E D^2) = 0``.

    The diagonal scaling makes the problem an ordinary symmetric one, solved
    with LAPACK (``dsyevr`` through :func:`scipy.linalg.eigh`); multiprecision
    systems use :func:`mpmath.eigsy` at the precision they were built with.
    """
    n = system.size
    count = n if count is None else count
    if not 1 <= count <= n:
        raise ValueError(f"count must be in 1..{n}")
    if system.is_multiprecision:
        import mpmath

        with mpmath.workdps(system.dps):
            A, _ = _reduced(system)
            ev = mpmath.eigsy(mpmath.matrix(A.tolist()), eigvals_only=True)
            vals = sorted(ev[i] for i in range(n))[:count]
        return Spectrum(tuple(vals), system.N, system.h)
    A, _ = _reduced(system)
    try:
        vals = eigh(A, eigvals_only=True, subset_by_index=[0, count - 1], check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise EigenSolveError(str(exc)) from exc
    return Spectrum(tuple(float(v) for v in vals), system.N, system.h)


def eigenvector(system: GeneralizedEigenSystem, index: int) -> np.ndarray:
    """Eigenvector ``v`` for eigenvalue ``index`` with ``v^T D^2 v = 1``.

    The sign is fixed so the entry of largest magnitude is positive.
    """
    if system.is_multiprecision:
        raise NotImplementedError("eigenvectors are only provided in double precision")
    if not 0 <= index < system.size:
        raise ValueError("eigenvalue index out of range")
    A, dinv = _reduced(system)
    _, w = eigh(A, subset_by_index=[index, index])
    v = dinv * w[:, 0]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


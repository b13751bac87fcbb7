"""Mesh selection and assembly of the generalized eigensystem ``H v = E D^2 v``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .confmap import ConformalMap, decay_constants, phi_derivatives, transformed_potential
from .potential import RationalPotential
from .sinc import ToeplitzSymmetric, delta2_stencil, delta2_stencil_mp


def lambert_w(x):
    """Principal branch of the Lambert W function for ``x >= 0``.

    Halley iteration on ``w e^w - x`` from ``log1p(x)`` (small ``x``) or
    ``log x - log log x`` (large ``x``). Works with floats and mpmath
    numbers; iterates until the relative step is at the working precision.
    """
    mp = type(x).__module__.startswith("mpmath")
    if mp:
        import mpmath as fns

        tiny = fns.eps
    else:
        fns = math
        x = float(x)
        tiny = 2.220446049250313e-16
    if x < 0:
        raise ValueError("lambert_w is only provided for x >= 0")
    if x == 0:
        return x * 0
    if x < 3:
        w = fns.log(1 + x)
    else:
        lx = fns.log(x)
        w = lx - fns.log(lx)
    for _ in range(100):
        ew = fns.exp(w)
        f = w * ew - x
        wp1 = w + 1
        step = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= step
        if abs(step) <= 2 * tiny * (1 + abs(w)):
            break
    return w


def mesh_size(N: int, gamma, B, d):
    """Optimal mesh ``h = W(pi d gamma N / B) / (gamma N)``."""
    if N < 1:
        raise ValueError("mesh_size needs N >= 1")
    pi = math.pi
    if type(B).__module__.startswith("mpmath"):
        import mpmath

        pi = mpmath.pi
    return lambert_w(pi * d * gamma * N / B) / (gamma * N)


@dataclass(frozen=True)
class GeneralizedEigenSystem:
    """``H = -T/h^2 + diag(Vt)`` with ``T`` the sinc stencil; ``D^2`` diagonal.

    ``kinetic`` already carries the ``-1/h^2`` factor.
    """

    N: int
    h: float
    kinetic: ToeplitzSymmetric
    potential_diag: np.ndarray
    d2: np.ndarray
    dps: int | None = None

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1) * self.h

    @property
    def H(self) -> np.ndarray:
        dense = self.kinetic.to_dense()
        idx = np.arange(self.size)
        dense[idx, idx] = dense[idx, idx] + self.potential_diag
        return dense

    @property
    def is_multiprecision(self) -> bool:
        return self.dps is not None


def build_system(potential: RationalPotential, cmap: ConformalMap, N: int,
                 dps: int | None = None) -> GeneralizedEigenSystem:
    """Collocate the transformed equation at ``x_k = k h``, ``k = -N..N``.

    ``h`` comes from :func:`mesh_size` with the map's decay constants (for
    ``N = 0`` the ``N = 1`` mesh is used). With ``dps`` set, all entries are
    computed in mpmath at that many decimal digits.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    gamma, B = decay_constants(potential, cmap)
    if dps is None:
        h = mesh_size(max(N, 1), gamma, B, cmap.d)
        x = np.arange(-N, N + 1) * h
        kinetic = delta2_stencil(N).scaled(-1.0 / h ** 2)
        vt = transformed_potential(cmap, potential, x)
        d2 = phi_derivatives(cmap, x)[1] ** 2
        return GeneralizedEigenSystem(N, h, kinetic, vt, d2)

    import mpmath

    with mpmath.workdps(dps):
        d = mpmath.pi / (2 * gamma)
        B = mpmath.sqrt(potential.omega) / gamma * (mpmath.mpf(cmap.u0) / 2) ** gamma
        h = mesh_size(max(N, 1), gamma, B, d)
        kinetic = delta2_stencil_mp(N).scaled(-1 / h ** 2)
        vt = np.empty(2 * N + 1, dtype=object)
        d2 = np.empty(2 * N + 1, dtype=object)
        for i, k in enumerate(range(-N, N + 1)):
            xk = k * h
            vt[i] = transformed_potential(cmap, potential, xk)
            d2[i] = phi_derivatives(cmap, xk)[1] ** 2
    return GeneralizedEigenSystem(N, h, kinetic, vt, d2, dps)

"""Dense univariate polynomials with ascending coefficients.

Only the handful of operations the rational potentials and conformal maps
need: Horner evaluation (numpy arrays, complex and mpmath scalars all work),
differentiation, Aberth-Ehrlich root finding and construction of a real
polynomial from conjugate root pairs normalised to ``q(0) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ROOT_RESIDUAL_TOL = 1e-12
ROOT_MAX_ITER = 200


class RootFindingError(ArithmeticError):
    """Raised when the simultaneous root iteration does not settle."""


@dataclass(frozen=True)
class Polynomial:
    """Polynomial ``sum(c[i] * x**i)``.

    Trailing zero coefficients are dropped on construction so that the
    leading coefficient is nonzero unless the polynomial is identically zero.
    """

    coefficients: tuple

    def __init__(self, coefficients: Iterable):
        coeffs = list(coefficients)
        if not coeffs:
            coeffs = [0.0]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coefficients[0] == 0

    @property
    def is_real(self) -> bool:
        return all(np.isreal(c) for c in self.coefficients)

    def eval(self, x):
        """Evaluate with Horner's scheme; ``x`` may be an array."""
        acc = x * 0 + self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            acc = acc * x + c
        return acc

    __call__ = eval

    def derivative(self, order: int = 1) -> "Polynomial":
        coeffs = list(self.coefficients)
        for _ in range(order):
            if len(coeffs) == 1:
                return Polynomial([0.0])
            coeffs = [i * c for i, c in enumerate(coeffs)][1:]
        return Polynomial(coeffs)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.convolve(self.coefficients, other.coefficients))

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coefficients)!r})"


def roots(poly: Polynomial, tol: float = ROOT_RESIDUAL_TOL,
          max_iter: int = ROOT_MAX_ITER) -> list[complex]:
    """All roots of ``poly`` (with multiplicity) by Aberth-Ehrlich iteration.

    Starting points lie on a circle whose radius is the geometric mean of the
    root moduli, ``|c0/cn|**(1/n)``, clipped to the Fujiwara bound, with a
    fixed angular perturbation so that symmetric polynomials do not start on
    a symmetry line.

    Raises
    ------
    ValueError
        For the zero polynomial or a constant.
    RootFindingError
        If the iteration cap is hit or a root fails the residual check
        ``|p(r)| <= tol * (1 + max|c_i|)``.
    """
    if poly.is_zero:
        raise ValueError("the zero polynomial has no well-defined roots")
    n = poly.degree
    if n < 1:
        raise ValueError("roots() needs degree >= 1")

    c = np.asarray(poly.coefficients, dtype=complex)
    monic = c / c[-1]
    # Fujiwara bound on |root|
    bound = 2.0 * max(abs(monic[n - i]) ** (1.0 / i) for i in range(1, n + 1))
    if abs(c[0]) > 0:
        radius = min(abs(c[0] / c[-1]) ** (1.0 / n), bound)
    else:
        radius = bound
    radius = radius if radius > 0 else 1.0
    rng = np.random.default_rng(20150101 + n)
    angles = 2 * np.pi * (np.arange(n) + 0.25 + 0.5 * rng.random(n)) / n
    z = radius * np.exp(1j * angles)

    p = np.polynomial.Polynomial(c)
    dp = p.deriv()
    for _ in range(max_iter):
        pz = p(z)
        dpz = dp(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            corr = ratio / (1.0 - ratio * inv.sum(axis=1))
        corr = np.where(pz == 0, 0.0, corr)
        if not np.all(np.isfinite(corr)):
            raise RootFindingError("Aberth iteration produced non-finite corrections")
        z = z - corr
        if np.all(np.abs(corr) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(z))):
            break
    else:
        # multiple roots converge only linearly; accept if residuals are fine
        pass

    # one Newton polish per root where it helps
    for i in range(n):
        d = dp(z[i])
        if d != 0:
            cand = z[i] - p(z[i]) / d
            if abs(p(cand)) < abs(p(z[i])):
                z[i] = cand

    # absolute bound, or a backward-error bound when Horner rounding dominates
    limit = tol * (1.0 + np.max(np.abs(c)))
    rounding = 1e3 * np.finfo(float).eps * np.polynomial.Polynomial(np.abs(c))(np.abs(z))
    resid = np.abs(p(z))
    bad = resid > np.maximum(limit, rounding)
    if np.any(bad):
        raise RootFindingError(
            f"root residual {resid[bad].max():.3e} exceeds {limit:.3e} after {max_iter} iterations")
    return sorted(z.tolist(), key=lambda r: (r.real, r.imag))


def from_conjugate_roots(pairs: Sequence[complex]) -> Polynomial:
    """Real polynomial with zeros ``z_i, conj(z_i)`` and constant term 1.

    Each pair contributes the real quadratic ``1 - 2 Re(z)/|z|^2 x + x^2/|z|^2``,
    so the result is real and ``q(0) == 1`` exactly.
    """
    coeffs = np.array([1.0])
    for z in pairs:
        z = complex(z)
        if z.imag <= 0:
            raise ValueError(f"root {z} must have a positive imaginary part")
        mod2 = z.real ** 2 + z.imag ** 2
        factor = np.array([1.0, -2.0 * z.real / mod2, 1.0 / mod2])
        coeffs = np.convolve(coeffs, factor)
    coeffs[0] = 1.0
    return Polynomial(coeffs.tolist())

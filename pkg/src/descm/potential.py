"""Rational potentials ``V(x) = omega x^(2m) + p(x)/q(x)``.

The denominator is normalised so that ``q(0) = 1`` and must not vanish on the
real line; the perturbation must grow strictly slower than ``x^(2m)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .polynomial import Polynomial, from_conjugate_roots, roots

# pairs closer to the real axis than this are redrawn by random_potential
MIN_IMAG_PART = 1e-3
_DEDUP_TOL = 1e-10
_REAL_ROOT_TOL = 1e-10


class PotentialError(ValueError):
    """A potential description is malformed or outside the admissible class."""


@dataclass(frozen=True)
class RationalPotential:
    omega: float
    m: int
    numerator: Polynomial
    denominator: Polynomial
    root_pairs: Optional[tuple] = None

    @classmethod
    def from_roots(cls, omega, m, numerator, pairs) -> "RationalPotential":
        """Build ``q`` from upper-half-plane zeros ``z_i`` (conjugates implied)."""
        pairs = tuple(complex(z) for z in pairs)
        try:
            q = from_conjugate_roots(pairs) if pairs else Polynomial([1.0])
        except ValueError as exc:
            raise PotentialError(str(exc)) from None
        return cls(float(omega), int(m), _as_poly(numerator), q, pairs)

    @classmethod
    def from_coeffs(cls, omega, m, numerator, q_coeffs) -> "RationalPotential":
        return cls(float(omega), int(m), _as_poly(numerator), _as_poly(q_coeffs))

    @property
    def k(self) -> int:
        return -1 if self.numerator.is_zero else self.numerator.degree

    @property
    def l(self) -> int:
        return self.denominator.degree // 2

    def __call__(self, x):
        return evaluate(self, x)

    def to_dict(self) -> dict:
        out = {
            "omega": self.omega,
            "m": self.m,
            "lambda": [float(c) for c in self.numerator.coefficients],
        }
        if self.root_pairs is not None:
            out["q_roots"] = [[z.real, z.imag] for z in self.root_pairs]
        else:
            out["q_coeffs"] = [float(c) for c in self.denominator.coefficients]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RationalPotential":
        try:
            omega, m, lam = data["omega"], data["m"], data["lambda"]
        except (KeyError, TypeError) as exc:
            raise PotentialError(f"potential description missing field {exc}") from None
        if isinstance(m, bool) or not isinstance(m, int) and not float(m).is_integer():
            raise PotentialError("m must be an integer")
        has_c, has_r = "q_coeffs" in data, "q_roots" in data
        if has_c == has_r:
            raise PotentialError("give exactly one of q_coeffs or q_roots")
        if has_c:
            return cls.from_coeffs(omega, int(m), lam, data["q_coeffs"])
        pairs = []
        for item in data["q_roots"]:
            if len(item) != 2:
                raise PotentialError("q_roots entries must be [re, im]")
            if item[1] <= 0:
                raise PotentialError("q_roots entries need im > 0")
            pairs.append(complex(item[0], item[1]))
        return cls.from_roots(omega, int(m), lam, pairs)


def _as_poly(coeffs) -> Polynomial:
    if isinstance(coeffs, Polynomial):
        return coeffs
    return Polynomial([float(c) for c in coeffs])


def validate(candidate: RationalPotential) -> list[str]:
    """Return the violated admissibility conditions; empty means valid."""
    problems = []
    if not candidate.omega > 0:
        problems.append("omega must be positive")
    if candidate.m < 1:
        problems.append("m must be a positive integer")
    q = candidate.denominator
    if q.coefficients[0] != 1:
        problems.append("denominator constant term must be exactly 1 (normalisation q(0) = 1)")
    if not (q.is_real and candidate.numerator.is_real):
        problems.append("coefficients must be real")
    elif q.degree % 2:
        problems.append("real root: denominator has odd degree")
    elif q.degree > 0 and _has_real_root(candidate):
        problems.append("real root: denominator vanishes on the real line")
    if candidate.k - q.degree >= 2 * candidate.m:
        problems.append("degree condition violated: need k - 2l < 2m")
    return problems


def check(candidate: RationalPotential) -> RationalPotential:
    problems = validate(candidate)
    if problems:
        raise PotentialError("; ".join(problems))
    return candidate


def _has_real_root(pot: RationalPotential) -> bool:
    if pot.root_pairs is not None:
        return any(z.imag <= 0 for z in pot.root_pairs)
    for r in roots(pot.denominator):
        if abs(r.imag) <= _REAL_ROOT_TOL * max(1.0, abs(r)):
            return True
    return False


def evaluate(potential: RationalPotential, x):
    """``omega x^(2m) + p(x)/q(x)``; accepts arrays and mpmath scalars."""
    return (potential.omega * x ** (2 * potential.m)
            + potential.numerator(x) / potential.denominator(x))


def singularities(potential: RationalPotential) -> list[tuple[float, float]]:
    """Distinct upper-half-plane poles ``(Re, Im)`` of ``p/q``.

    Sorted by real part, ties by imaginary part.
    """
    if potential.root_pairs is not None:
        cand = list(potential.root_pairs)
    elif potential.denominator.degree == 0:
        cand = []
    else:
        cand = [r for r in roots(potential.denominator) if r.imag > 0]
    cand.sort(key=lambda z: (z.real, z.imag))
    out: list[complex] = []
    for z in cand:
        if all(abs(z - w) > _DEDUP_TOL * max(1.0, abs(z)) for w in out):
            out.append(z)
    return [(z.real, z.imag) for z in out]


def random_potential(m: int, l: int, seed) -> RationalPotential:
    """Random admissible potential.

    Draw order (numpy ``PCG64`` stream seeded by ``seed``): ``omega ~ U(0,10)``,
    ``k ~ U{0..2m+2l-1}``, ``lambda_0..lambda_k ~ U(-10,10)``, then for each
    pair ``Re z ~ U(-5,5)`` and ``Im z ~ U(0,10)``; an imaginary part below
    ``MIN_IMAG_PART`` is redrawn. ``omega`` is redrawn in the (measure zero)
    event that it is exactly 0.
    """
    if m < 1 or l < 1:
        raise ValueError("m and l must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    omega = 0.0
    while omega == 0.0:
        omega = rng.uniform(0.0, 10.0)
    k = int(rng.integers(0, 2 * m + 2 * l))
    lam = rng.uniform(-10.0, 10.0, size=k + 1)
    pairs = []
    for _ in range(l):
        re = rng.uniform(-5.0, 5.0)
        im = rng.uniform(0.0, 10.0)
        while im < MIN_IMAG_PART:
            im = rng.uniform(0.0, 10.0)
        pairs.append(complex(re, im))
    return RationalPotential.from_roots(omega, m, lam.tolist(), pairs)


def load_potential(source: str) -> RationalPotential:
    """Read a potential from a JSON file path or an inline JSON string."""
    text = source
    if not source.lstrip().startswith("{"):
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise PotentialError(f"cannot read potential file {source}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialError(f"malformed potential JSON: {exc}") from None
    if not isinstance(data, dict):
        raise PotentialError("potential JSON must be an object")
    pot = RationalPotential.from_dict(data)
    return check(pot)


def dump_potential(potential: RationalPotential) -> str:
    return json.dumps(potential.to_dict())


def growth_ratio(potential: RationalPotential, x) -> np.ndarray:
    """``|p(x)/q(x)| / x^(2m)``, tends to zero for admissible potentials."""
    x = np.asarray(x, dtype=float)
    return np.abs(potential.numerator(x) / potential.denominator(x)) / x ** (2 * potential.m)


"""Double-exponential conformal maps ``phi(t) = u0 sinh(t) + P(t)``.

``P`` is a real polynomial adjustment (``u_1 + u_2 t + ...``). For a
potential whose perturbation has poles ``delta_k + i eps_k`` the adjustment
is chosen so that every pole has a pre-image on the boundary line
``Im t = d = pi / (2 gamma)`` of the widest strip allowed by the decay rate
``gamma = m + 1``, with ``u0`` as large as possible.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .polynomial import Polynomial
from .potential import RationalPotential, evaluate, singularities

log = logging.getLogger(__name__)

CONSTRAINT_TOL = 1e-8
# |u0 component| of the unit tangent to the feasible curve at an accepted optimum
STATIONARITY_TOL = 1e-6
# singularities this close to the real axis are not mapped, see map_multi_singularity
MIN_SINGULARITY_IMAG = 1e-3


@dataclass(frozen=True)
class ConformalMap:
    u0: float
    adjust: Polynomial
    gamma: float
    d: float
    preimages: tuple = ()
    kind: str = "plain"
    targets: tuple = ()
    residuals: tuple = ()
    reason: Optional[str] = None
    stationarity: Optional[float] = None

    def __post_init__(self):
        if not self.u0 > 0:
            raise ValueError("u0 must be positive")

    def __call__(self, t):
        return phi_derivatives(self, t)[0]

    @property
    def coefficients(self) -> list[float]:
        """``[u0, u1, ..., un]``."""
        return [self.u0] + [float(c) for c in self.adjust.coefficients]

    def at_complex(self, z):
        return self.u0 * np.sinh(z) + self.adjust(z)

    def report(self) -> dict:
        return {
            "kind": self.kind,
            "u": self.coefficients,
            "gamma": self.gamma,
            "d": self.d,
            "preimages": list(self.preimages),
            "singularities": [list(t) for t in self.targets],
            "residuals": list(self.residuals),
            "stationarity": self.stationarity,
            "fallback_reason": self.reason,
        }


def _is_mp(t) -> bool:
    return type(t).__module__.startswith("mpmath")


def phi_derivatives(cmap: ConformalMap, t):
    """``(phi, phi', phi'', phi''')`` at ``t`` (array, float or mpmath scalar)."""
    if _is_mp(t):
        import mpmath

        s, c = mpmath.sinh(t), mpmath.cosh(t)
    else:
        t = np.asarray(t, dtype=float)
        s, c = np.sinh(t), np.cosh(t)
    p = cmap.adjust
    p1 = p.derivative()
    p2 = p1.derivative()
    p3 = p2.derivative()
    u0 = cmap.u0
    return (u0 * s + p(t), u0 * c + p1(t), u0 * s + p2(t), u0 * c + p3(t))


def decay_constants(potential: RationalPotential, cmap: ConformalMap) -> tuple[float, float]:
    """Double-exponential decay rate ``gamma = m + 1`` and amplitude ``B``."""
    gamma = potential.m + 1
    B = math.sqrt(potential.omega) / gamma * (cmap.u0 / 2.0) ** gamma
    return gamma, B


def strip_width(potential: RationalPotential) -> float:
    return math.pi / (2 * (potential.m + 1))


def map_plain_sinh(potential: RationalPotential) -> ConformalMap:
    gamma = potential.m + 1
    return ConformalMap(1.0, Polynomial([0.0]), gamma, math.pi / (2 * gamma), kind="plain")


def map_single_singularity(potential: RationalPotential) -> ConformalMap:
    """Affine sinh map placing the single pole pair on the strip boundary.

    ``phi(t) = eps / sin(d) * sinh(t) + delta`` so that ``phi(i d) = delta + i eps``.
    """
    sing = singularities(potential)
    if len(sing) != 1:
        raise ValueError(f"single-singularity map needs exactly one pole pair, got {len(sing)}")
    delta, eps = sing[0]
    gamma = potential.m + 1
    d = math.pi / (2 * gamma)
    cmap = ConformalMap(eps / math.sin(d), Polynomial([delta]), gamma, d,
                        preimages=(0.0,), kind="single", targets=((delta, eps),))
    return replace(cmap, residuals=tuple(constraint_residuals(cmap)))


def constraint_residuals(cmap: ConformalMap) -> list[float]:
    """``|phi(x_k + i d) - (delta_k + i eps_k)|`` for every recorded pole."""
    out = []
    for x, (delta, eps) in zip(cmap.preimages, cmap.targets):
        out.append(float(abs(cmap.at_complex(complex(x, cmap.d)) - complex(delta, eps))))
    return out


@dataclass
class _Problem:
    """Real formulation of ``phi(x_k + i d) = delta_k + i eps_k``.

    Unknown vector ``z = [u0, u1..un, x1..xn]``.
    """

    delta: np.ndarray
    eps: np.ndarray
    d: float
    n: int = field(init=False)

    def __post_init__(self):
        self.n = len(self.delta)

    def split(self, z):
        n = self.n
        return z[0], z[1:n + 1], z[n + 1:]

    def residual(self, z):
        u0, u, x = self.split(z)
        w = x + 1j * self.d
        val = u0 * np.sinh(w) + np.polynomial.polynomial.polyval(w, u) - (self.delta + 1j * self.eps)
        return np.concatenate([val.real, val.imag])

    def jacobian(self, z):
        n = self.n
        u0, u, x = self.split(z)
        w = x + 1j * self.d
        J = np.zeros((n, 2 * n + 1), dtype=complex)
        J[:, 0] = np.sinh(w)
        J[:, 1:n + 1] = w[:, None] ** np.arange(n)[None, :]
        du = np.polynomial.polynomial.polyder(u) if n > 1 else np.zeros(1)
        J[np.arange(n), n + 1 + np.arange(n)] = u0 * np.cosh(w) + np.polynomial.polynomial.polyval(w, du)
        return np.vstack([J.real, J.imag])

    def fit_adjustment(self, u0, x):
        """Least-squares ``u1..un`` for fixed ``u0`` and pre-images."""
        n = self.n
        w = x + 1j * self.d
        V = w[:, None] ** np.arange(n)[None, :]
        rhs = (self.delta + 1j * self.eps) - u0 * np.sinh(w)
        A = np.vstack([V.real, V.imag])
        b = np.concatenate([rhs.real, rhs.imag])
        return np.linalg.lstsq(A, b, rcond=None)[0]

    def stationarity(self, z) -> float:
        """``|t_0|`` for the unit null vector ``t`` of the constraint Jacobian.

        The feasible set is a curve; ``u0`` is stationary along it iff the
        tangent has no ``u0`` component.
        """
        J = self.jacobian(z)
        if not np.all(np.isfinite(J)):
            return math.inf
        t = np.linalg.svd(J)[2][-1]
        return float(abs(t[0]))


def _gauss_newton(prob: _Problem, z, iters=60, tol=1e-14):
    """Damped minimum-norm Gauss-Newton on the constraint residuals."""
    r = prob.residual(z)
    for _ in range(iters):
        nr = np.linalg.norm(r, np.inf)
        if not np.isfinite(nr) or nr <= tol:
            break
        try:
            step = np.linalg.lstsq(prob.jacobian(z), -r, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-4:
            trial = z + lam * step
            rt = prob.residual(trial)
            if np.all(np.isfinite(rt)) and np.linalg.norm(rt, np.inf) < nr:
                z, r = trial, rt
                break
            lam *= 0.5
        else:
            break
    return z


def _maximize_u0(prob: _Problem, z0):
    n = prob.n
    cons = [{"type": "eq", "fun": prob.residual, "jac": prob.jacobian}]
    if n > 1:
        D = np.zeros((n - 1, 2 * n + 1))
        for k in range(n - 1):
            D[k, n + 1 + k] = -1.0
            D[k, n + 2 + k] = 1.0
        cons.append({"type": "ineq", "fun": lambda z: D @ z, "jac": lambda z: D})
    grad = -np.eye(1, 2 * n + 1).ravel()
    res = minimize(lambda z: -z[0], z0, jac=lambda z: grad, method="SLSQP",
                   constraints=cons, options={"maxiter": 500, "ftol": 1e-14})
    return res.x if np.all(np.isfinite(res.x)) else z0


def _initial_guess(prob: _Problem):
    u0 = float(np.min(prob.eps) / math.sin(prob.d))
    x = np.arcsinh(prob.delta / u0)
    x = np.maximum.accumulate(x)
    u = prob.fit_adjustment(u0, x)
    return np.concatenate([[u0], u, x])


def _check_candidate(prob: _Problem, z, gamma) -> tuple[Optional[ConformalMap], str]:
    u0, u, x = prob.split(z)
    if not np.all(np.isfinite(z)):
        return None, "non-finite solution"
    if u0 <= 0:
        return None, "nonpositive u0"
    if np.any(np.diff(x) < 0):
        return None, "pre-images out of order"
    r = prob.residual(z)
    res = np.abs(r[:prob.n] + 1j * r[prob.n:])
    if res.max() > CONSTRAINT_TOL:
        return None, f"constraint residual {res.max():.2e} above {CONSTRAINT_TOL:g}"
    stat = prob.stationarity(z)
    if stat > STATIONARITY_TOL:
        return None, f"u0 not maximised (stationarity {stat:.1e})"
    cmap = ConformalMap(float(u0), Polynomial(u.tolist()), gamma, prob.d,
                        preimages=tuple(float(v) for v in x), kind="multi",
                        targets=tuple(zip(prob.delta.tolist(), prob.eps.tolist())),
                        residuals=tuple(float(v) for v in res), stationarity=stat)
    if not is_increasing(cmap):
        return None, "map not monotone on the real line"
    for delta, eps in cmap.targets:
        if interior_preimages(cmap, complex(delta, eps)) != 0:
            return None, "a pole has a pre-image inside the strip"
    return cmap, ""


def map_multi_singularity(potential: RationalPotential) -> ConformalMap:
    """Polynomial-adjusted sinh map for several pole pairs.

    Maximises ``u0`` subject to ``phi(x_k + i d) = delta_k + i eps_k`` with
    pre-images ordered like the poles (SLSQP), polishes the constraints with
    Gauss-Newton and accepts the map only if residuals are below
    ``CONSTRAINT_TOL``, ``phi`` is increasing on the real line and no pole
    has a pre-image inside the open strip. Failing that, a three-stage
    homotopy from equal imaginary parts is tried. If everything fails the
    plain sinh map is returned with ``kind="fallback"`` and the reason set.
    """
    sing = singularities(potential)
    gamma = potential.m + 1
    d = math.pi / (2 * gamma)
    if len(sing) == 1:
        return replace(map_single_singularity(potential), kind="multi")
    if len(sing) == 0:
        return replace(map_plain_sinh(potential), kind="fallback", reason="no singularities")

    delta = np.array([s[0] for s in sing])
    eps = np.array([s[1] for s in sing])
    if eps.min() < MIN_SINGULARITY_IMAG:
        return _fallback(potential, f"singularity within {MIN_SINGULARITY_IMAG:g} of the real axis")

    prob = _Problem(delta, eps, d)
    best, reason = None, ""
    z_init = _initial_guess(prob)
    with np.errstate(all="ignore"):
        for attempt, start in (("direct", z_init), ("feasible-start", _gauss_newton(prob, z_init))):
            z = _gauss_newton(prob, _maximize_u0(prob, start))
            cmap, why = _check_candidate(prob, z, gamma)
            log.debug("multi-singularity %s attempt: %s", attempt, why or "accepted")
            if cmap is not None and (best is None or cmap.u0 > best.u0):
                best = cmap
            reason = reason or why
        if best is not None:
            return best
        top = eps.max()
        z = _initial_guess(_Problem(delta, np.full_like(eps, top), d))
        for s in (0.0, 0.5, 1.0):
            stage = _Problem(delta, top + s * (eps - top), d)
            z = _gauss_newton(stage, _maximize_u0(stage, z))
        cmap, why = _check_candidate(prob, z, gamma)
        log.debug("multi-singularity homotopy attempt: %s", why or "accepted")
        if cmap is not None:
            return cmap
    return _fallback(potential, reason)


def _fallback(potential, reason) -> ConformalMap:
    log.info("falling back to plain sinh map: %s", reason)
    base = map_plain_sinh(potential)
    return replace(base, kind="fallback", reason=reason,
                   targets=tuple(singularities(potential)))


def select_map(potential: RationalPotential, strategy: str = "auto") -> ConformalMap:
    if strategy == "plain":
        return map_plain_sinh(potential)
    if strategy == "single":
        return map_single_singularity(potential)
    if strategy == "multi":
        return map_multi_singularity(potential)
    if strategy != "auto":
        raise ValueError(f"unknown map strategy {strategy!r}")
    n = len(singularities(potential))
    if n == 0:
        return map_plain_sinh(potential)
    if n == 1:
        return map_single_singularity(potential)
    return map_multi_singularity(potential)


def is_increasing(cmap: ConformalMap, half_width: float = 30.0, num: int = 6001) -> bool:
    t = np.linspace(-half_width, half_width, num)
    return bool(np.all(phi_derivatives(cmap, t)[1] > 0))


def interior_preimages(cmap: ConformalMap, target: complex, shrink: float = 0.05) -> int:
    """Number of solutions of ``phi(z) = target`` with ``|Im z| < (1 - shrink) d``.

    Winding number of ``phi - target`` around a rectangle wide enough that the
    sinh term dominates outside it.
    """
    coeff = np.abs(np.asarray(cmap.adjust.coefficients, dtype=float))
    R = 1.0
    while R < 700:
        bound = abs(target) + np.polynomial.polynomial.polyval(R + cmap.d, coeff)
        if cmap.u0 * math.sinh(R) > 2.0 * bound:
            break
        R *= 1.5
    y = (1.0 - shrink) * cmap.d
    num = 4096
    while True:
        xs = np.linspace(-R, R, num)
        ys = np.linspace(-y, y, max(num // 8, 64))
        path = np.concatenate([xs - 1j * y, R + 1j * ys, xs[::-1] + 1j * y, -R + 1j * ys[::-1]])
        vals = cmap.at_complex(path) - target
        jumps = np.diff(np.unwrap(np.angle(vals)))
        if np.abs(jumps).max() < 0.5 or num > 2 ** 20:
            break
        num *= 4
    return int(round(jumps.sum() / (2 * np.pi)))


def transformed_potential(cmap: ConformalMap, potential: RationalPotential, x):
    """Effective potential after the symmetrising substitution.

    ``-phi'''/(2 phi') + 3/4 (phi''/phi')^2 + phi'^2 V(phi)``.
    """
    f, f1, f2, f3 = phi_derivatives(cmap, x)
    return -f3 / (2 * f1) + 0.75 * (f2 / f1) ** 2 + f1 ** 2 * evaluate(potential, f)


def kinetic_term_fd(cmap: ConformalMap, x, step: float = 1e-4):
    """``-sqrt(phi') d/dx((1/phi') d/dx sqrt(phi'))`` by nested 5-point differences.

    Independent of :func:`transformed_potential`; uses only ``phi'``.
    """
    def dphi(t):
        return phi_derivatives(cmap, t)[1]

    def d5(fun, t):
        return (fun(t - 2 * step) - 8 * fun(t - step) + 8 * fun(t + step) - fun(t + 2 * step)) / (12 * step)

    def inner(t):
        return d5(lambda s: np.sqrt(dphi(s)), t) / dphi(t)

    x = np.asarray(x, dtype=float)
    return -np.sqrt(dphi(x)) * d5(inner, x)

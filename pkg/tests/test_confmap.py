import math

import numpy as np
import pytest

from descm.confmap import (CONSTRAINT_TOL, ConformalMap, constraint_residuals, decay_constants,
                           interior_preimages, is_increasing, kinetic_term_fd,
                           map_multi_singularity, map_plain_sinh, map_single_singularity,
                           phi_derivatives, select_map, transformed_potential)
from descm.discretize import build_system
from descm.eigensolve import eigenvector, generalized_eigs
from descm.polynomial import Polynomial
from descm.potential import RationalPotential, random_potential


def harmonic(m=1, omega=1.0):
    return RationalPotential.from_coeffs(omega, m, [0.0], [1.0])


def rational(g=1.0, lam=-6.0):
    return RationalPotential.from_coeffs(1.0, 1, [0, 0, lam], [1, 0, g])


def test_u0_must_be_positive():
    with pytest.raises(ValueError):
        ConformalMap(0.0, Polynomial([0.0]), 2, math.pi / 4)


@pytest.mark.parametrize("u0, adjust, expect", [
    (1.0, [0.0], (0, 1, 0, 1)),
    (2.0, [0.0], (0, 2, 0, 2)),
    (1.0, [3.0], (3, 1, 0, 1)),
])
def test_phi_derivatives_at_zero(u0, adjust, expect):
    cmap = ConformalMap(u0, Polynomial(adjust), 2, math.pi / 4)
    np.testing.assert_allclose(phi_derivatives(cmap, 0.0), expect, atol=1e-15)


def test_phi_derivatives_against_finite_differences(rng):
    cmap = ConformalMap(1.3, Polynomial([0.2, 0.5, -0.1, 0.03]), 2, math.pi / 4)
    h = 1e-4
    for t in rng.uniform(-2, 2, 10):
        f = lambda s, i=0: phi_derivatives(cmap, s)[i]
        for i in range(3):
            fd = (f(t + h, i) - f(t - h, i)) / (2 * h)
            assert abs(fd - f(t, i + 1)) <= 1e-6 * max(1, abs(fd))


@pytest.mark.parametrize("m, omega, u0, gamma, B", [
    (1, 1.0, math.sqrt(2), 2, 0.25), (1, 1.0, 2.0, 2, 0.5), (3, 4.0, 2.0, 4, 0.5),
])
def test_decay_constants(m, omega, u0, gamma, B):
    cmap = ConformalMap(u0, Polynomial([0.0]), m + 1, math.pi / (2 * (m + 1)))
    g, b = decay_constants(harmonic(m, omega), cmap)
    assert g == gamma and b == pytest.approx(B, rel=1e-15)


def test_decay_amplitude_increases_with_u0():
    pot = harmonic(2, 3.0)
    Bs = [decay_constants(pot, ConformalMap(u, Polynomial([0.0]), 3, math.pi / 6))[1]
          for u in np.linspace(0.1, 5, 50)]
    assert np.all(np.diff(Bs) > 0)


def test_plain_map():
    cmap = map_plain_sinh(harmonic(1))
    assert cmap.d == pytest.approx(math.pi / 4)
    assert cmap(1.0) == pytest.approx(1.17520, abs=1e-5)
    c4 = map_plain_sinh(harmonic(4))
    assert c4.gamma == 5 and c4.d == pytest.approx(math.pi / 10)


def test_single_map_examples():
    c = map_single_singularity(rational(1.0))
    assert c.u0 == pytest.approx(math.sqrt(2), rel=1e-14)
    assert c.coefficients[1] == pytest.approx(0, abs=1e-14)
    shifted = RationalPotential.from_roots(1.0, 1, [1.0], [1 + 1j])
    c = map_single_singularity(shifted)
    assert c.u0 == pytest.approx(math.sqrt(2)) and c.coefficients[1] == pytest.approx(1.0)
    c = map_single_singularity(rational(4.0))
    assert c.u0 == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
    assert max(c.residuals) <= 1e-12


def test_single_map_general_m():
    pot = RationalPotential.from_roots(2.0, 3, [1.0], [0.5 + 2j])
    c = map_single_singularity(pot)
    assert c.d == pytest.approx(math.pi / 8)
    assert max(constraint_residuals(c)) <= 1e-12


def test_single_map_requires_one_pair():
    with pytest.raises(ValueError):
        map_single_singularity(harmonic())


def test_multi_duplicate_reduces_to_single():
    pot = RationalPotential.from_roots(1.0, 1, [1.0], [1j, 1j])
    multi = map_multi_singularity(pot)
    single = map_single_singularity(rational())
    np.testing.assert_allclose(multi.coefficients, single.coefficients, atol=1e-8)


def test_multi_symmetric_pair():
    pot = RationalPotential.from_roots(1.0, 1, [1.0], [-2 + 1j, 2 + 1j])
    c = map_multi_singularity(pot)
    assert c.kind == "multi"
    assert max(c.residuals) <= CONSTRAINT_TOL
    x1, x2 = c.preimages
    assert x1 == pytest.approx(-x2, abs=1e-6)
    # odd symmetry of the adjustment: even-index coefficients of u vanish
    assert abs(c.coefficients[1]) <= 1e-6
    assert is_increasing(c)
    # the maximum of u0 along the feasible family
    assert c.u0 == pytest.approx(0.135977, abs=1e-5)


def test_multi_near_real_falls_back():
    pot = RationalPotential.from_roots(1.0, 1, [1.0], [1e-4j + 1, -1 + 1e-4j])
    c = map_multi_singularity(pot)
    assert c.kind == "fallback" and c.reason


def test_multi_never_silently_bad():
    for seed in range(30):
        pot = random_potential(2, 2, seed)
        c = map_multi_singularity(pot)
        if c.kind == "multi":
            assert max(c.residuals) <= CONSTRAINT_TOL
            assert max(constraint_residuals(c)) <= CONSTRAINT_TOL
            assert is_increasing(c)
            for delta, eps in c.targets:
                assert interior_preimages(c, complex(delta, eps)) == 0
        else:
            assert c.kind == "fallback" and c.reason


def test_preimages_on_strip_boundary():
    pot = RationalPotential.from_roots(1.0, 1, [1.0], [-1 + 2j, 1 + 1j])
    c = map_multi_singularity(pot)
    if c.kind == "multi":
        for x, (delta, eps) in zip(c.preimages, c.targets):
            assert abs(c.at_complex(x + 1j * c.d) - complex(delta, eps)) <= CONSTRAINT_TOL


def test_select_map_strategies():
    assert select_map(harmonic()).kind == "plain"
    assert select_map(rational()).kind == "single"
    assert select_map(random_potential(1, 2, 0)).kind in {"multi", "fallback"}
    with pytest.raises(ValueError):
        select_map(rational(), "other")


def test_transformed_potential_plain_at_zero():
    cmap = map_plain_sinh(harmonic())
    assert transformed_potential(cmap, harmonic(), 0.0) == pytest.approx(-0.5, abs=1e-15)


def test_transformed_potential_asymptotics():
    cmap = map_plain_sinh(harmonic())
    x = np.array([4.0, 6.0, 8.0])
    ratio = transformed_potential(cmap, harmonic(), x) / (np.cosh(x) ** 2 * np.sinh(x) ** 2)
    np.testing.assert_allclose(ratio, 1.0, rtol=1e-5)


def test_transformed_potential_scaled_map():
    cmap = ConformalMap(2.0, Polynomial([0.7]), 2, math.pi / 4)
    x = np.array([-1.0, 0.0, 1.0])
    kin = transformed_potential(cmap, harmonic(), x) - (2 * np.cosh(x)) ** 2 * cmap(x) ** 2
    # for a pure sinh map the derivative terms reduce to -1/2 + 3/4 tanh^2
    np.testing.assert_allclose(kin, -0.5 + 0.75 * np.tanh(x) ** 2, atol=1e-12)
    np.testing.assert_allclose(kinetic_term_fd(cmap, x), kin, atol=1e-6)


def test_transformed_potential_fd_oracle(rng):
    for seed in range(5):
        pot = random_potential(2, 1, seed)
        cmap = ConformalMap(rng.uniform(0.5, 3), Polynomial(
            [rng.uniform(-2, 2), rng.uniform(0, 1), 0.0, rng.uniform(0, 0.05)]), 3, math.pi / 6)
        x = rng.uniform(-3, 3, 100)
        f1 = phi_derivatives(cmap, x)[1]
        kin = transformed_potential(cmap, pot, x) - f1 ** 2 * pot(cmap(x))
        assert np.max(np.abs(kin - kinetic_term_fd(cmap, x))) <= 1e-5


def test_ground_state_double_exponential_decay():
    pot = rational()
    cmap = map_single_singularity(pot)
    system = build_system(pot, cmap, 30)
    v = np.abs(eigenvector(system, 0))
    gamma, _ = decay_constants(pot, cmap)
    t = system.nodes
    # fit log|v| = log A - B exp(gamma |t|) through two interior points and
    # check the tail stays below the fitted envelope
    i1, i2 = 30 + 8, 30 + 14
    e1, e2 = math.exp(gamma * t[i1]), math.exp(gamma * t[i2])
    Bfit = (math.log(v[i1]) - math.log(v[i2])) / (e2 - e1)
    logA = math.log(v[i1]) + Bfit * e1
    assert Bfit > 0
    tail = slice(i2, 2 * 30 + 1)
    assert np.all(np.log(v[tail]) <= logA - Bfit * np.exp(gamma * t[tail]) + 1.0)
    assert generalized_eigs(system, 1)[0] == pytest.approx(-1.0, abs=1e-9)

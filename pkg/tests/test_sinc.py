import math

import numpy as np
import pytest

from descm.confmap import map_plain_sinh, phi_derivatives
from descm.potential import RationalPotential
from descm.sinc import ToeplitzSymmetric, delta2_stencil, delta2_stencil_mp, sinc, sinc_basis


def test_sinc_values():
    assert sinc(0.0) == 1.0
    assert abs(sinc(1.0)) < 1e-16
    assert sinc(0.5) == pytest.approx(2 / math.pi, rel=1e-15)


def test_sinc_continuous_near_zero():
    z = np.array([-2e-4, -1e-4 + 1e-9, 1e-6, 1e-4 - 1e-9, 2e-4])
    np.testing.assert_allclose(sinc(z), np.sin(np.pi * z) / (np.pi * z), rtol=1e-15)


def test_sinc_basis_values():
    assert sinc_basis(3, 0.5, 1.5) == 1.0
    assert abs(sinc_basis(0, 1.0, 4.0)) < 1e-15
    assert sinc_basis(0, 1.0, 0.5) == pytest.approx(2 / math.pi)
    with pytest.raises(ValueError):
        sinc_basis(0, 0.0, 1.0)


def test_stencil_entries():
    t = delta2_stencil(3).first_row
    assert t[0] == pytest.approx(-math.pi**2 / 3, abs=1e-15)
    assert t[1] == 2.0 and t[2] == -0.5


def _fd_second(h, j, k, step):
    f = lambda x: sinc_basis(j, h, x)
    x = k * h
    # 5-point second difference
    return (-f(x + 2 * step) + 16 * f(x + step) - 30 * f(x)
            + 16 * f(x - step) - f(x - 2 * step)) / (12 * step**2)


@pytest.mark.parametrize("h", [0.3, 1.7])
def test_stencil_matches_finite_differences(h):
    t = delta2_stencil(20).first_row
    for r in range(21):
        fd = h**2 * _fd_second(h, 0, r, 1e-3 * h)
        assert abs(fd - t[r]) <= 1e-6


def test_toeplitz_structure():
    T = delta2_stencil(4)
    dense = T.to_dense()
    assert dense.shape == (9, 9)
    np.testing.assert_array_equal(dense, dense.T)
    for j in range(9):
        for k in range(9):
            assert dense[j, k] == T.entry(j, k) == T.first_row[abs(j - k)]


def test_toeplitz_read_only():
    T = ToeplitzSymmetric(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        T.first_row[0] = 3.0


def test_mp_stencil_agrees():
    import mpmath

    with mpmath.workdps(30):
        t = delta2_stencil_mp(5).first_row
        assert abs(t[0] + mpmath.pi**2 / 3) < mpmath.mpf(10) ** -28
    np.testing.assert_allclose([float(v) for v in t], delta2_stencil(5).first_row, rtol=1e-15)


def test_trapezoidal_identity():
    # h * sum f(phi(kh)) phi'(kh) with a sinh map, f = exp(-x^2)
    pot = RationalPotential.from_coeffs(1.0, 1, [0.0], [1.0])
    cmap = map_plain_sinh(pot)
    N = 30
    h = math.log(4 * N) / N
    t = np.arange(-N, N + 1) * h
    phi, dphi = phi_derivatives(cmap, t)[:2]
    total = h * np.sum(np.exp(-phi**2) * dphi)
    assert abs(total - math.sqrt(math.pi)) <= 1e-12

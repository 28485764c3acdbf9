import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import lpmv, sph_harm_y

from sdwavelets.special_functions import (adaptive_simpson, assoc_legendre, euler_angles,
                                          legendre_poly, mehler_dirichlet, rotation_matrix,
                                          sph_legendre_normalized, spin_sph_harm, wigner_D_matrix,
                                          wigner_d_recursion, wigner_d_slice)

angles = st.floats(0.05, np.pi - 0.05)


def test_legendre_trivial():
    assert legendre_poly(0, 0.37) == 1.0
    for x in (-1.0, -0.3, 0.0, 0.81, 1.0):
        assert legendre_poly(1, x) == pytest.approx(x, abs=1e-15)


def test_legendre_domain():
    with pytest.raises(ValueError):
        legendre_poly(3, 1.2)


def test_legendre_vs_mehler_dirichlet():
    th = np.arccos(0.5)
    ref = mehler_dirichlet(10, th, tol=1e-10)
    assert legendre_poly(10, 0.5) == pytest.approx(ref, abs=1e-6)


@given(st.integers(0, 40), st.floats(-1, 1))
def test_legendre_matches_numpy(ell, x):
    ref = np.polynomial.legendre.Legendre.basis(ell)(x)
    assert legendre_poly(ell, x) == pytest.approx(ref, abs=1e-12)


def test_assoc_legendre_simple():
    th = np.linspace(0.1, 3.0, 7)
    np.testing.assert_allclose(assoc_legendre(1, 1, th), np.sin(th), atol=1e-15)
    for ell in (0, 3, 8):
        np.testing.assert_allclose(assoc_legendre(ell, 0, th),
                                   [legendre_poly(ell, np.cos(t)) for t in th], atol=1e-13)


def test_assoc_legendre_finite_difference():
    # (1-x^2)^{3/2} d^3/dx^3 P_5 with a 7-point stencil, exact for quintics up to rounding
    x, h = 0.5, 0.05
    c = np.array([1 / 8, -1, 13 / 8, 0, -13 / 8, 1, -1 / 8])
    pts = x + h * np.arange(-3, 4)
    d3 = np.dot(c, [legendre_poly(5, p) for p in pts]) / h**3
    ref = (1 - x * x) ** 1.5 * d3
    assert assoc_legendre(5, 3, np.pi / 3) == pytest.approx(ref, abs=1e-6)


def test_assoc_legendre_errors():
    with pytest.raises(ValueError):
        assoc_legendre(2, 3, 0.4)


@given(st.integers(0, 30), st.data(), angles)
def test_assoc_legendre_vs_scipy(ell, data, th):
    m = data.draw(st.integers(0, ell))
    # scipy carries the Condon-Shortley phase
    ref = (-1) ** m * lpmv(m, ell, np.cos(th))
    assert assoc_legendre(ell, m, th) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_normalised_legendre_large_degree_finite():
    v = sph_legendre_normalized(2048, 1000, np.array([0.3, 1.5]))
    assert np.all(np.isfinite(v))


def test_wigner_slice_identity_at_zero():
    for ell in (0, 1, 4, 9):
        np.testing.assert_allclose(wigner_d_slice(ell, 0.0).values, np.eye(2 * ell + 1), atol=1e-15)


@given(st.integers(0, 25), angles)
def test_wigner_slice_zero_entry(ell, b):
    assert wigner_d_slice(ell, b).values[0, 0] == pytest.approx(legendre_poly(ell, np.cos(b)), abs=1e-12)


def test_wigner_half_angle():
    assert wigner_d_slice(2, np.pi / 2).values[2, 2] == pytest.approx(0.25, abs=1e-15)
    S = wigner_d_slice(6, 0.9)
    assert S.values[6, 6] == pytest.approx(np.cos(0.45) ** 12, rel=1e-13)
    assert S.values[-6, -6] == pytest.approx(np.cos(0.45) ** 12, rel=1e-13)


def _d_explicit(ell, m, n, b):
    # Wigner sum formula, fine at small degree
    tot = 0.0
    for k in range(max(0, n - m), min(ell + n, ell - m) + 1):
        num = (-1) ** (m - n + k) * math.sqrt(math.factorial(ell + m) * math.factorial(ell - m)
                                             * math.factorial(ell + n) * math.factorial(ell - n))
        den = (math.factorial(ell + n - k) * math.factorial(k) * math.factorial(m - n + k)
               * math.factorial(ell - m - k))
        tot += num / den * np.cos(b / 2) ** (2 * ell + n - m - 2 * k) * np.sin(b / 2) ** (m - n + 2 * k)
    return tot


@given(st.integers(0, 8), angles)
def test_wigner_slice_vs_sum_formula(ell, b):
    C = wigner_d_slice(ell, b).centred()
    for m in range(-ell, ell + 1):
        for n in range(-ell, ell + 1):
            assert C[m + ell, n + ell] == pytest.approx(_d_explicit(ell, m, n, b), abs=1e-12)


@given(st.integers(0, 20), angles)
def test_wigner_slice_orthogonal(ell, b):
    d = wigner_d_slice(ell, b).values
    np.testing.assert_allclose(d @ d.T, np.eye(2 * ell + 1), atol=1e-12)


def test_recursion_high_degree_orthogonality():
    # selected rows only: a full table at L = 2048 costs O(l^3)
    L = 2048
    ms = np.array([-2047, -300, 0, 5, 1800])
    ns = np.arange(-2, 3)
    b = np.array([0.2, 1.3, 2.9])
    last = None
    for ell, d in wigner_d_recursion(L, ms, ns, b):
        last = d
    assert np.all(np.isfinite(last))
    # column n = 0, row m = 0 gives P_l(cos b)
    np.testing.assert_allclose(last[2, :, 2], [legendre_poly(L - 1, np.cos(x)) for x in b], atol=1e-10)


def test_wigner_D_group_property(rng):
    ell = 4
    a1, b1, g1, a2, b2, g2 = rng.uniform(0.1, 3.0, 6)
    R = rotation_matrix(a1, b1, g1) @ rotation_matrix(a2, b2, g2)
    a3, b3, g3 = euler_angles(R)
    lhs = wigner_D_matrix(ell, a1, b1, g1) @ wigner_D_matrix(ell, a2, b2, g2)
    np.testing.assert_allclose(lhs, wigner_D_matrix(ell, a3, b3, g3), atol=1e-12)


def test_spin_harmonic_constant():
    assert spin_sph_harm(0, 0, 0, 0.7, 2.1) == pytest.approx(1 / np.sqrt(4 * np.pi), abs=1e-15)


@given(st.integers(0, 20), st.data(), angles, st.floats(0, 2 * np.pi))
def test_spin0_matches_associated_legendre(ell, data, th, ph):
    m = data.draw(st.integers(-ell, ell))
    am = abs(m)
    norm = math.sqrt((2 * ell + 1) / (4 * np.pi) * math.factorial(ell - am) / math.factorial(ell + am))
    ref = norm * lpmv(am, ell, np.cos(th)) * np.exp(1j * am * ph)
    if m < 0:
        ref = (-1) ** am * np.conj(ref)
    assert spin_sph_harm(ell, m, 0, th, ph) == pytest.approx(ref, abs=1e-12)
    assert spin_sph_harm(ell, m, 0, th, ph) == pytest.approx(sph_harm_y(ell, m, th, ph), abs=1e-12)


@given(st.integers(2, 15), st.sampled_from([-2, -1, 0, 1, 2]), angles, st.floats(0, 2 * np.pi))
def test_spin_addition_theorem(ell, s, th, ph):
    tot = sum(abs(spin_sph_harm(ell, m, s, th, ph)) ** 2 for m in range(-ell, ell + 1))
    assert tot == pytest.approx((2 * ell + 1) / (4 * np.pi), rel=1e-12)


def test_spin_harmonic_domain():
    with pytest.raises(ValueError):
        spin_sph_harm(2, 3, 0, 0.1, 0.2)
    with pytest.raises(ValueError):
        spin_sph_harm(1, 0, 2, 0.1, 0.2)


def test_adaptive_simpson():
    assert adaptive_simpson(np.sin, 0.0, np.pi, tol=1e-12) == pytest.approx(2.0, abs=1e-10)


def test_mehler_dirichlet_classical_kernel():
    for ell in (0, 3, 17, 50):
        for th in (0.1, 1.0, 2.5, 3.0):
            assert mehler_dirichlet(ell, th) == pytest.approx(legendre_poly(ell, np.cos(th)), abs=1e-4)


def test_mehler_dirichlet_printed_kernel_differs():
    # sin(l(phi + 1/2)) in place of sin((l + 1/2) phi) does not reproduce P_l
    errs = [abs(mehler_dirichlet(ell, 1.0, "printed") - legendre_poly(ell, np.cos(1.0)))
            for ell in range(1, 20)]
    assert max(errs) > 1e-2

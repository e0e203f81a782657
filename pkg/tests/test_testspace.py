import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhs_spectra import (BarrierConfig, QuadratureSpec, ket_action, make_position_bump,
                         make_spectral_test_function, membership_report, phi_norm)
from rhs_spectra.errors import SupportError
from rhs_spectra.functions import r_exp
from rhs_spectra.testspace import (boundary_terms, ket_bound, ket_eigen_check, one_sided_derivative,
                                   random_test_family, schwartz_delta_check)
from rhs_spectra.spectral import sigma_delta

CFG = BarrierConfig()
FREE = BarrierConfig(v0=0.0)
QUAD = QuadratureSpec()


@pytest.fixture(scope="module")
def spectral():
    return make_spectral_test_function(CFG, 2.0, 6.0, (1.0, -0.3, 0.2), amplitude=1.5)


@pytest.fixture(scope="module")
def bump():
    return make_position_bump(CFG, 3.5, 1.0, amplitude=0.7)


def test_norm_free_anchor():
    assert phi_norm(FREE, r_exp(), 1, 0, QUAD) == pytest.approx(math.sqrt(1.75), rel=1e-12)
    assert phi_norm(FREE, r_exp(), 0, 0, QUAD) == pytest.approx(0.5, rel=1e-12)


@settings(max_examples=20)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.integers(0, 2), st.integers(0, 2))
def test_norm_homogeneity(alpha, n, m):
    f = make_position_bump(CFG, 3.5, 1.0)
    assert phi_norm(CFG, alpha * f, n, m, QUAD) == pytest.approx(abs(alpha) * phi_norm(CFG, f, n, m, QUAD),
                                                                 rel=1e-13)


@settings(max_examples=20)
@given(st.floats(2.8, 6.0), st.floats(2.8, 6.0), st.floats(0.3, 0.7), st.integers(0, 2), st.integers(0, 2))
def test_norm_triangle(c1, c2, hw, n, m):
    f, g = make_position_bump(CFG, c1, hw), make_position_bump(CFG, c2, hw, amplitude=-0.6)
    assert phi_norm(CFG, f + g, n, m, QUAD) <= phi_norm(CFG, f, n, m, QUAD) + phi_norm(CFG, g, n, m, QUAD)


def test_bump_inside_barrier_is_allowed():
    assert make_position_bump(CFG, 1.5, 0.2).support() == pytest.approx((1.3, 1.7))


def test_support_errors():
    with pytest.raises(SupportError):
        make_position_bump(CFG, 1.0, 0.2)        # straddles r = a
    with pytest.raises(SupportError):
        make_position_bump(CFG, 0.5, 0.6)        # reaches r <= 0
    with pytest.raises(SupportError):
        make_spectral_test_function(CFG, -1.0, 2.0)


def test_one_sided_derivative_exact_on_polynomials():
    p = np.polynomial.Polynomial([1.0, -2.0, 0.5, 0.25])
    for order in (1, 2, 3):
        for side in (-1, 1):
            want = p.deriv(order)(1.3)
            # the stencil is exact on cubics; a wide step keeps rounding out of the way
            assert one_sided_derivative(p, 1.3, order, side, step=0.1) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_membership(spectral, bump):
    for phi in (spectral, bump):
        rep = membership_report(CFG, phi, max_order=3, quad=QUAD)
        assert rep.passed, rep.failed()
    assert not membership_report(CFG, r_exp(), max_order=2, quad=QUAD).passed


def test_spectral_function_vanishes_at_interfaces(spectral):
    for x in (CFG.a, CFG.b):
        for order in range(3):
            for side in (-1, 1):
                assert abs(one_sided_derivative(spectral, x, order, side)) < 1e-5 * 10 ** order


def test_ket_paths_agree(spectral):
    for E in (2.5, 4.0):
        direct = ket_action(CFG, spectral, E, QUAD, path="direct")
        cached = ket_action(CFG, spectral, E, QUAD)
        assert abs(direct - cached) <= 1e-8 * max(abs(cached), 1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ket_generalized_eigenvector(bump, spectral, n):
    assert ket_eigen_check(CFG, bump, 2.5, n, QUAD) < 1e-7
    assert ket_eigen_check(CFG, spectral, 3.3, n, QUAD) < 1e-7


def test_ket_bound_is_sup_of_sigma():
    r = np.linspace(0, 40, 40001)
    for E in (0.3, 0.9, 1.5, 6.0):
        sup = np.max(np.abs(sigma_delta(CFG, E, r)))
        M = ket_bound(CFG, E)
        assert sup <= M * (1 + 1e-12)
        assert sup >= 0.99 * M


def test_ket_bound_inequality(bump):
    nrm = phi_norm(CFG, bump, 1, 0, QUAD)
    for E in (0.4, 2.0, 7.5):
        assert abs(ket_action(CFG, bump, E, QUAD)) < ket_bound(CFG, E) * nrm


def test_schwartz_delta(bump):
    for E in (0.7, 3.0):
        assert schwartz_delta_check(CFG, bump, E, QUAD) < 1e-8


def test_boundary_terms_vanish_for_bumps(bump):
    assert max(boundary_terms(CFG, bump, 2.0, 10.0)) < 1e-12


def test_random_family_reproducible():
    a = random_test_family(CFG, np.random.default_rng(7), 4)
    b = random_test_family(CFG, np.random.default_rng(7), 4)
    assert [f.kind for f in a] == ["SpectralProfile", "PositionBump"] * 2
    r = np.linspace(0.0, 10.0, 11)
    for f, g in zip(a, b):
        np.testing.assert_array_equal(f(r), g(r))

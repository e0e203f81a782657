import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad as scipy_quad

from rhs_spectra import (BarrierConfig, QuadratureSpec, dispersion, evolve, make_position_bump,
                         parseval, round_trip, sigma_delta, to_energy, to_position)
from rhs_spectra.errors import NormalizationError
from rhs_spectra.functions import r_exp
from rhs_spectra.transform import (diagonalization_residual, matrix_element_hn, position_inner,
                                   position_norm)

CFG = BarrierConfig()
FREE = BarrierConfig(v0=0.0)
QUAD = QuadratureSpec()


def test_free_transform_closed_form():
    # int r e^-r sin(k r) dr = 2k / (1 + k^2)^2 and sigma = sin(k r) / (sqrt(pi) E^(1/4))
    fhat = to_energy(FREE, r_exp(), QUAD)
    E = np.array([0.1, 1.0, 4.0, 30.0])
    k = np.sqrt(E)
    want = 2 * k / (1 + k ** 2) ** 2 / (np.sqrt(np.pi) * E ** 0.25)
    np.testing.assert_allclose(fhat(E), want, rtol=1e-12)


def test_closed_form_and_quadrature_transforms_agree():
    f = r_exp(1.0, 1.3, 2)
    exact = to_energy(CFG, f, QUAD)
    # the pointwise values below E = 20 do not need the algebraic spectral tail
    numeric = to_energy(CFG, f, QUAD.replace(e_cutoff=400.0), method="quadrature")
    E = np.array([0.3, 0.8, 1.7, 5.0, 20.0])
    np.testing.assert_allclose(numeric(E), exact(E), rtol=1e-7, atol=1e-12)


@settings(max_examples=10)
@given(st.floats(0.5, 3.0), st.integers(1, 3), st.floats(0.05, 20.0).filter(lambda e: abs(e - 1) > 1e-3))
def test_exppoly_transform_against_adaptive_quadrature(beta, power, E):
    f = r_exp(1.0, beta, power)
    got = to_energy(CFG, f, QUAD)(E)
    R = (40 + 10 * power) / beta      # f(R) is far below the tolerance
    want = scipy_quad(lambda r: f(r) * sigma_delta(CFG, E, r), 0, R, points=[CFG.a, CFG.b],
                      limit=1000, epsabs=1e-15)[0]
    assert abs(got - want) <= 1e-9 * max(abs(want), 1e-6)


def test_free_anchor_inner_products():
    f = r_exp()
    assert position_inner(FREE, f, f, QUAD).real == pytest.approx(0.25, abs=1e-14)
    assert position_inner(FREE, f, f.apply_h(FREE), QUAD).real == pytest.approx(0.25, abs=1e-14)
    assert matrix_element_hn(FREE, f, f, 1, QUAD).real == pytest.approx(0.25, abs=1e-6)


def test_round_trip_and_diagonalization_bump():
    f = make_position_bump(CFG, 3.5, 1.0)
    rt = round_trip(CFG, f, QUAD)
    assert rt.round_trip < 1e-5 and rt.isometry < 1e-5
    assert diagonalization_residual(CFG, f, QUAD) < 1e-5


def test_to_position_inverts_to_energy():
    f = make_position_bump(CFG, 0.5, 0.4)
    back = to_position(CFG, to_energy(CFG, f, QUAD), QUAD, f.decay_hint)
    r = np.array([0.15, 0.3, 0.5, 0.7, 1.5, 3.0])
    np.testing.assert_allclose(back(r), f(r), atol=1e-7)


def test_parseval_bumps():
    phi = make_position_bump(CFG, 3.0, 0.8)
    psi = make_position_bump(CFG, 3.5, 1.0, amplitude=0.5 + 0.5j)
    res = parseval(CFG, phi, psi, QUAD)
    assert res.residual < 1e-5


def test_dispersion_free_state():
    d = dispersion(FREE, r_exp(2.0), QUAD)
    assert d.mean == pytest.approx(1.0, abs=1e-6)
    assert d.delta == pytest.approx(2.0, abs=1e-6)


def test_dispersion_needs_normalized_state():
    with pytest.raises(NormalizationError):
        dispersion(FREE, r_exp(), QUAD)


def test_evolution_norm_and_identity():
    from rhs_spectra import make_spectral_test_function
    phi = make_spectral_test_function(CFG, 2.0, 5.0, (1.0, 0.2))
    n0 = position_norm(CFG, phi, QUAD)
    r = np.linspace(0.0, 30.0, 61)
    np.testing.assert_allclose(evolve(CFG, phi, 0.0, QUAD)(r), phi(r), atol=1e-12)
    assert position_norm(CFG, evolve(CFG, phi, 1.0, QUAD), QUAD) == pytest.approx(n0, rel=1e-6)

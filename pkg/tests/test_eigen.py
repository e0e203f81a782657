import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from rhs_spectra import (BarrierConfig, Family, closed_form_coefficients, eval_eigenfunction,
                         potential_value, transfer_matrix_coefficients, wronskian)
from rhs_spectra.eigen import VALID_REGIONS, continuity_residual
from rhs_spectra.errors import DomainError, IncompatibleRegion
from rhs_spectra.model import Region

CFG = BarrierConfig()


def _energy(region, mag, angle):
    """An energy inside ``region`` with modulus ``mag``; ``angle`` in (0, 1) picks the direction."""
    if region is Region.POSITIVE_REAL:
        return complex(mag)
    if region is Region.UPPER_HALF:
        return mag * np.exp(1j * angle * np.pi / 2)
    if region is Region.LOWER_HALF:
        return mag * np.exp(-1j * angle * np.pi / 2)
    return mag * np.exp(1j * np.pi * (0.5 + angle))


family_region = st.sampled_from([(f, r) for f in Family for r in sorted(VALID_REGIONS[f], key=lambda x: x.value)])
mags = st.floats(1e-2, 1e2)
angles = st.floats(0.02, 0.98)


def _ode_chi(cfg, E, r_end):
    """Independent oracle: integrate -(1/kappa) u'' + V u = E u from u(0)=0, u'(0)=k."""
    k = np.sqrt(cfg.kappa * E + 0j)

    def rhs(r, y):
        return [y[1], cfg.kappa * (potential_value(cfg, r) - E) * y[0]]

    # integrate region by region so the jumps in V fall on step boundaries
    y = np.array([0.0, k], dtype=complex)
    edges = [0.0] + [x for x in (cfg.a, cfg.b) if x < r_end] + [r_end]
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        sol = solve_ivp(lambda r, y: rhs(mid if r in (lo, hi) else r, y), (lo, hi), y,
                        method="DOP853", rtol=1e-12, atol=1e-14)
        y = sol.y[:, -1]
    return y[0]


@pytest.mark.parametrize("E", [0.3, 2.0, 0.5 + 0.3j, 3.0 - 1.0j])
@pytest.mark.parametrize("r", [0.7, 1.5, 3.2])
def test_chi_matches_ode_oracle(E, r):
    got = eval_eigenfunction(CFG, Family.CHI, E, r)
    want = _ode_chi(CFG, E, r)
    assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_free_chi_is_sine():
    free = BarrierConfig(v0=0.0)
    r = np.linspace(0, 10, 51)
    for E in (0.01, 1.0, 50.0):
        np.testing.assert_allclose(eval_eigenfunction(free, Family.CHI, E, r).real, np.sin(np.sqrt(E) * r),
                                   atol=1e-12)


def test_chi_initial_conditions():
    for E in (2.0, 1 + 1j, 0.5 - 2j):
        k = np.sqrt(E + 0j)
        assert abs(eval_eigenfunction(CFG, Family.CHI, E, 0.0)) < 1e-15
        assert eval_eigenfunction(CFG, Family.CHI, E, 0.0, 1) == pytest.approx(k, rel=1e-14)


@given(family_region, mags, angles)
def test_closed_form_agrees_with_transfer_matrix(fr, mag, angle):
    fam, region = fr
    E = _energy(region, mag, angle)
    if abs(E - CFG.v0) < 1e-6:
        return
    a = closed_form_coefficients(CFG, fam, E).as_array()
    b = transfer_matrix_coefficients(CFG, fam, E).as_array()
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))
    assert continuity_residual(CFG, fam, E) < 1e-10


@given(family_region, mags, angles)
def test_eigen_equation(fr, mag, angle):
    fam, region = fr
    E = _energy(region, mag, angle)
    if abs(E - CFG.v0) < 1e-6:
        return
    r = np.array([0.4, 1.3, 1.8, 2.6])
    u = eval_eigenfunction(CFG, fam, E, r)
    d2 = eval_eigenfunction(CFG, fam, E, r, 2)
    resid = -d2 / CFG.kappa + potential_value(CFG, r) * u - E * u
    scale = np.maximum(np.abs(E * u), np.abs(d2))
    assert np.all(np.abs(resid) <= 1e-10 * np.maximum(scale, 1e-300))


@given(mags, angles, st.floats(0.05, 5.0))
def test_wronskian_constant(mag, angle, r):
    E = _energy(Region.UPPER_HALF, mag, angle)
    if r in (CFG.a, CFG.b) or abs(E - CFG.v0) < 1e-6:
        return
    w0 = wronskian(CFG, Family.CHI, Family.THETA_PLUS, E, 0.5)
    w = wronskian(CFG, Family.CHI, Family.THETA_PLUS, E, r)
    assert abs(w - w0) <= 1e-9 * abs(w0)


def test_wronskian_rejects_jump_points():
    with pytest.raises(DomainError):
        wronskian(CFG, Family.CHI, Family.THETA_PLUS, 2.0, CFG.a)


@pytest.mark.parametrize("fam,E", [(Family.CHI_TILDE, 2.0), (Family.THETA_PLUS, 1 - 1j),
                                   (Family.THETA_MINUS, 1 + 1j), (Family.CHI, -1.0)])
def test_incompatible_region(fam, E):
    with pytest.raises(IncompatibleRegion):
        closed_form_coefficients(CFG, fam, E)


def test_faulty_a2_breaks_continuity():
    E = -2.0
    good = continuity_residual(CFG, Family.THETA_TILDE, E)
    bad = continuity_residual(CFG, Family.THETA_TILDE, E,
                              closed_form_coefficients(CFG, Family.THETA_TILDE, E, faulty_a2=True))
    assert good < 1e-12
    assert bad > 1e-3


def test_real_on_positive_axis():
    r = np.linspace(0, 6, 61)
    for E in (0.2, 1.7, 40.0):
        assert np.max(np.abs(eval_eigenfunction(CFG, Family.CHI, E, r).imag)) < 1e-12
        co = closed_form_coefficients(CFG, Family.CHI, E)
        assert abs(co.c3 - np.conj(co.c4)) < 1e-12 * abs(co.c4)


def test_family_parse():
    assert Family.parse("chi") is Family.CHI
    assert Family.parse("ThetaPlus") is Family.THETA_PLUS
    with pytest.raises(ValueError):
        Family.parse("nope")

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad as scipy_quad
from scipy.integrate import solve_ivp

from rhs_spectra import BarrierConfig, potential_value, rho, rho_values, sigma_delta, spectrum_info, stone_measure
from rhs_spectra import theta_matrices
from rhs_spectra.errors import DegenerateEnergy, DomainError
from rhs_spectra.spectral import ThetaHalf, rho_integral, wronskian_w

CFG = BarrierConfig()


def _rho_oracle(cfg, E):
    """rho from an ODE solve: read J4 off the plane-wave decomposition beyond b."""
    k = np.sqrt(cfg.kappa * E)
    r_end = cfg.b + 1.0

    def rhs(r, y):
        return [y[1], cfg.kappa * (potential_value(cfg, r) - E) * y[0]]

    y = np.array([0.0, k])
    for lo, hi in ((0.0, cfg.a), (cfg.a, cfg.b), (cfg.b, r_end)):
        mid = 0.5 * (lo + hi)
        y = solve_ivp(lambda r, y: rhs(mid, y), (lo, hi), y, method="DOP853", rtol=1e-12, atol=1e-14).y[:, -1]
    u, du = y
    J4 = (1j * k * u - du) / (2j * k) * np.exp(1j * k * r_end)
    return cfg.kappa / (4 * np.pi * k * abs(J4) ** 2)


@pytest.mark.parametrize("E", [0.05, 0.7, 1.3, 4.0, 25.0])
def test_rho_matches_ode_oracle(E):
    assert rho_values(CFG, E) == pytest.approx(_rho_oracle(CFG, E), rel=1e-9)


def test_rho_free():
    free = BarrierConfig(v0=0.0)
    E = np.logspace(-3, 3, 40)
    np.testing.assert_allclose(rho_values(free, E), 1 / (np.pi * np.sqrt(E)), rtol=1e-13)
    assert rho(free, 1.0).rho == pytest.approx(1 / np.pi, rel=1e-15)


def test_rho_rejects_bad_energies():
    for E in (-1.0, 0.0, 1 + 1j):
        with pytest.raises(DomainError):
            rho_values(CFG, E)
    with pytest.raises(DegenerateEnergy):
        rho_values(CFG, 1.0)


def test_rho_high_energy_limit():
    # far above the barrier the density approaches the free one
    E = 1e4
    assert rho_values(CFG, E) * np.pi * np.sqrt(E) == pytest.approx(1.0, abs=1e-3)


@given(st.floats(0.01, 50.0).filter(lambda e: abs(e - 1.0) > 1e-6))
def test_sigma_is_real_and_scaled(E):
    r = np.array([0.3, 1.5, 4.0])
    from rhs_spectra import Family, eval_eigenfunction
    chi = eval_eigenfunction(CFG, Family.CHI, E, r).real
    np.testing.assert_allclose(sigma_delta(CFG, E, r), np.sqrt(rho_values(CFG, E)) * chi, rtol=1e-13, atol=1e-300)


def test_stone_matches_density():
    st_ = stone_measure(CFG, 1.5, 3.0)
    exact = rho_integral(CFG, 1.5, 3.0)
    assert abs(st_.rho11 - exact) / exact < 1e-4
    assert max(st_.rho12, st_.rho21, st_.rho22) < 1e-6


def test_rho_integral_against_adaptive_quadrature():
    want = scipy_quad(lambda e: rho_values(CFG, e), 0.2, 0.9, epsabs=1e-14, epsrel=1e-12)[0]
    assert rho_integral(CFG, 0.2, 0.9) == pytest.approx(want, rel=1e-10)


def test_stone_argument_checks():
    with pytest.raises(DomainError):
        stone_measure(CFG, 2.0, 1.0)
    with pytest.raises(DomainError):
        stone_measure(CFG, 1.0, 2.0, eps_sequence=(1e-2,))


def test_wronskian_w_is_i_over_two():
    for E in (0.5, 2.0, 1 + 1j, 3 - 2j):
        assert wronskian_w(CFG, E) == pytest.approx(0.5j, abs=1e-12)


def test_theta_halves():
    assert theta_matrices(CFG, -1.0).half is ThetaHalf.MINUS_REGION
    assert theta_matrices(CFG, 1 + 1j).half is ThetaHalf.UPPER_HALF
    assert theta_matrices(CFG, 1 - 1j).half is ThetaHalf.LOWER_HALF
    with pytest.raises(DomainError):
        theta_matrices(CFG, 2.0)


def test_theta_conjugation():
    up = theta_matrices(CFG, 2 + 0.5j).entries
    lo = theta_matrices(CFG, 2 - 0.5j).entries
    np.testing.assert_allclose(lo, np.conj(up), rtol=1e-12, atol=1e-15)


def test_spectrum_info():
    info = spectrum_info(CFG)
    assert info.continuous == (0.0, float("inf"))
    assert info.point == ()
    assert set(info.as_dict()) == {"continuous", "point", "resolvent_set"}

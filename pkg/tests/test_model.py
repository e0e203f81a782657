import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhs_spectra import BarrierConfig, ComplexEnergy, Region, branch_sqrt, potential_value, wavenumbers
from rhs_spectra.errors import DegenerateEnergy, DomainError
from rhs_spectra.model import classify

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_defaults():
    cfg = BarrierConfig()
    assert (cfg.kappa, cfg.hbar, cfg.v0, cfg.a, cfg.b) == (1.0, 1.0, 1.0, 1.0, 2.0)
    assert cfg.eps_energy == 1e-9
    assert BarrierConfig(v0=10.0).eps_energy == pytest.approx(1e-8)


@pytest.mark.parametrize("kw", [dict(a=2.0, b=1.0), dict(a=0.0), dict(v0=-1.0), dict(kappa=0.0)])
def test_invalid_config(kw):
    with pytest.raises(DomainError):
        BarrierConfig(**kw)


def test_replace_recomputes_eps():
    assert BarrierConfig().replace(v0=4.0).eps_energy == pytest.approx(4e-9)


def test_branch_values():
    assert branch_sqrt(-1.0) == 1j
    assert branch_sqrt(complex(-1.0, -0.0)) == 1j
    assert branch_sqrt(4.0) == 2.0
    assert branch_sqrt(1j) == pytest.approx(cmath.exp(1j * cmath.pi / 4))


@given(finite, finite)
def test_branch_square_and_half_plane(x, y):
    z = complex(x, y)
    w = branch_sqrt(z)
    assert abs(w * w - z) <= 1e-12 * max(1.0, abs(z))
    # arg(w) in (-pi/2, pi/2], stated without the rounding of cmath.phase
    assert w.real > 0 or (w.real == 0 and w.imag >= 0)


def test_classify():
    assert classify(-1.0) is Region.NEGATIVE_RE
    assert classify(-1 + 1j) is Region.NEGATIVE_RE
    assert classify(1 + 1j) is Region.UPPER_HALF
    assert classify(1 - 1j) is Region.LOWER_HALF
    assert classify(2.0) is Region.POSITIVE_REAL
    assert classify(1j) is Region.UPPER_HALF
    with pytest.raises(DegenerateEnergy):
        classify(0.0)


def test_complex_energy_signed_zero():
    e = ComplexEnergy(2.0, -0.0)
    assert np.copysign(1.0, e.im) == 1.0
    assert e.region is Region.POSITIVE_REAL


def test_potential():
    cfg = BarrierConfig()
    r = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 2.5])
    assert potential_value(cfg, r).tolist() == [0, 0, 1, 1, 1, 0]
    with pytest.raises(DomainError):
        potential_value(cfg, -0.1)


def test_wavenumbers_free_and_thresholds():
    cfg = BarrierConfig()
    wn = wavenumbers(cfg, 2.0)
    assert wn.k == pytest.approx(np.sqrt(2.0))
    assert wn.q == pytest.approx(1.0)
    assert wn.q_tilde == pytest.approx(1j)
    for E in (0.0, 1.0, 1.0 + 1e-10):
        with pytest.raises(DegenerateEnergy):
            wavenumbers(cfg, E)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhs_spectra import BarrierConfig, QuadratureSpec, apply_resolvent, green_function, make_position_bump
from rhs_spectra.errors import DegenerateEnergy, OnSpectrum
from rhs_spectra.green import green_evaluation, resolvent_residual
from rhs_spectra.model import Region

CFG = BarrierConfig()
QUAD = QuadratureSpec()

radii = st.floats(0.01, 6.0)
off_axis = st.one_of(
    st.builds(complex, st.floats(-5.0, -0.05), st.floats(-3.0, 3.0)),
    st.builds(complex, st.floats(0.0, 5.0), st.floats(0.05, 3.0)),
    st.builds(complex, st.floats(0.0, 5.0), st.floats(-3.0, -0.05)),
)


def test_free_value():
    free = BarrierConfig(v0=0.0)
    assert green_function(free, 0.5, 1.5, -1.0) == pytest.approx(-np.sinh(0.5) * np.exp(-1.5), rel=1e-14)


@given(radii, radii, off_axis)
def test_symmetry_and_conjugation(r, s, E):
    g = green_function(CFG, r, s, E)
    assert green_function(CFG, s, r, E) == g
    gc = green_function(CFG, r, s, np.conj(E))
    assert abs(gc - np.conj(g)) <= 1e-10 * max(abs(g), 1e-300)


@given(st.floats(0.1, 4.0), off_axis)
def test_derivative_jump_is_kappa(s, E):
    # (E - h) G = delta  means  d/dr G jumps by kappa across r = s
    if min(abs(s - CFG.a), abs(s - CFG.b)) < 1e-3:
        return
    h = 1e-6
    right = (green_function(CFG, s + 2 * h, s, E) - green_function(CFG, s + h, s, E)) / h
    left = (green_function(CFG, s - h, s, E) - green_function(CFG, s - 2 * h, s, E)) / h
    assert abs((right - left) - CFG.kappa) < 1e-4


def test_boundary_and_decay():
    assert green_function(CFG, 0.0, 1.2, -1.0) == 0
    g = [abs(green_function(CFG, 0.5, s, -1 + 0.5j)) for s in (5.0, 10.0, 20.0)]
    assert g[0] > g[1] > g[2]


def test_evaluation_metadata():
    ev = green_evaluation(CFG, 0.5, 3.0, 2 + 1j)
    assert ev.region is Region.UPPER_HALF and ev.ordered
    assert green_evaluation(CFG, 3.0, 0.5, -2.0).region is Region.NEGATIVE_RE


def test_rejects_spectrum_and_thresholds():
    with pytest.raises(OnSpectrum):
        green_function(CFG, 0.5, 1.0, 2.0)
    with pytest.raises(DegenerateEnergy):
        green_function(CFG, 0.5, 1.0, 0.0)


@pytest.mark.parametrize("E", [-1.0, 2 + 1j, 2 - 1j])
def test_resolvent_identity(E):
    f = make_position_bump(CFG, 4.0, 1.0)
    assert resolvent_residual(CFG, f, E, np.linspace(3.1, 4.9, 10), QUAD) < 1e-6


def test_resolvent_first_resolvent_identity():
    # (z - H)^{-1} - (w - H)^{-1} = (w - z) (z - H)^{-1} (w - H)^{-1}
    f = make_position_bump(CFG, 0.5, 0.3)
    z, w = -1.0, -2.0
    r = np.array([0.3, 0.6, 1.5, 3.0])
    gz = apply_resolvent(CFG, f, z, QUAD)
    gw = apply_resolvent(CFG, f, w, QUAD)
    lhs = gz(r) - gw(r)
    # apply the resolvent to gw by direct quadrature of the kernel
    s = np.linspace(0.0, 40.0, 80001)
    ws = np.full(s.size, s[1] - s[0])
    ws[0] = ws[-1] = 0.5 * ws[0]
    inner = gw(s)
    rhs = np.array([(w - z) * np.sum(ws * green_function(CFG, ri, s, z) * inner) for ri in r])
    np.testing.assert_allclose(lhs, rhs, rtol=1e-6, atol=1e-9)

"""Constructible test functions, the (n, m) norm family, kets and their checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.linalg import null_space

from .errors import CapabilityError, SupportError
from .functions import (BumpCombination, EnergyFunction, ProfileBump, RadialFunction, Synthesized,
                        bump_template, k_nodes)
from .model import BarrierConfig, potential_value
from .quadrature import QuadratureSpec
from .spectral import ChiKernel, rho_values, sigma_delta
from .transform import energy_representation, position_norm, r_grid, to_energy


# ---------------------------------------------------------------- test functions

class SpectralTestFunction(Synthesized):
    """phi(r) = int g(E) sigma(r; E) dE for a smooth profile g of compact support.

    h acts on it as multiplication of the profile by E, so h-powers stay in
    the family and the energy representation is ``g`` itself.
    """

    kind = "SpectralProfile"

    def __init__(self, cfg, profile: EnergyFunction, quad=None, decay_hint=None):
        super().__init__(cfg, profile, quad, decay_hint)
        self.profile = profile
        self.cached_transform = profile
        base = getattr(profile, "base", profile)
        self.is_real = bool(np.isrealobj(base.coeffs)) and getattr(profile, "tau", 0.0) == 0.0
        self.k_scale = profile.k_range()[1]

    def derivative(self, r, order, oversample: int = 1):
        out = super().derivative(r, order, oversample)
        return out.real if self.is_real and np.iscomplexobj(out) else out

    def char_wavenumber(self):
        return self.k_scale

    def apply_poly_h(self, cfg, coeffs):
        return SpectralTestFunction(cfg, self.profile.scaled_by_polynomial(coeffs), self.quad,
                                    self.decay_hint)

    def __add__(self, other):
        if isinstance(other, SpectralTestFunction):
            from .functions import EnergySum
            prof = EnergySum([self.profile, other.profile], [1.0, 1.0])
            out = SpectralTestFunction(self.cfg, prof, self.quad,
                                       max(self.decay_hint, other.decay_hint))
            out.is_real = self.is_real and other.is_real
            out.k_scale = max(self.k_scale, other.k_scale)
            return out
        return super().__add__(other)

    def __rmul__(self, alpha):
        from .functions import EnergySum
        out = SpectralTestFunction(self.cfg, EnergySum([self.profile], [alpha]), self.quad,
                                   self.decay_hint)
        out.is_real = self.is_real and np.isrealobj(alpha)
        out.k_scale = self.k_scale
        return out


def _check_profile_support(cfg, e_lo, e_hi):
    eps = cfg.eps_energy
    if not (eps < e_lo < e_hi):
        raise SupportError(f"profile support ({e_lo}, {e_hi}) must lie in ({eps}, inf)")
    if cfg.v0 > 0 and e_lo < cfg.v0 + eps and e_hi > cfg.v0 - eps:
        raise SupportError(f"profile support ({e_lo}, {e_hi}) touches the band around v0={cfg.v0}")


def _constraint_rows(cfg, e_lo, e_hi, nbasis, vanish_order):
    """Rows A[c, i] = int T_i-weighted bump * E^j sigma^(d)(x; E) dE for x in {a, b}."""
    k_lo, k_hi = np.sqrt(cfg.kappa * e_lo), np.sqrt(cfg.kappa * e_hi)
    k, w = k_nodes(cfg, k_lo, k_hi, (k_hi - k_lo) / 96, 16)
    E = k ** 2 / cfg.kappa
    x = (2 * E - e_lo - e_hi) / (e_hi - e_lo)
    basis = bump_template(x)[None, :] * cheb.chebvander(x, nbasis - 1).T   # (nbasis, nk)
    kern = ChiKernel(cfg, k)
    uk_factor = np.sqrt(2 * k / cfg.kappa) * w
    rows = []
    for point in (cfg.a, cfg.b):
        for d in range(vanish_order + 1):
            j = d // 2
            s = kern.block(np.array([point]), d % 2)[0]     # sigma or sigma' (continuous at a, b)
            rows.append((basis * (E ** j * s * uk_factor)[None, :]).sum(axis=1))
    return np.array(rows)


def make_spectral_test_function(cfg: BarrierConfig, e_lo: float, e_hi: float, coeffs=(1.0,),
                                amplitude: float = 1.0, vanish_order: int | None = 3,
                                quad: QuadratureSpec | None = None) -> SpectralTestFunction:
    """Spectral test function with profile ``amplitude * bump * Chebyshev(coeffs)``.

    With ``vanish_order = m`` (default 3) the Chebyshev coefficients are
    projected (least change) onto the subspace where phi and its first m
    derivatives vanish at r = a and r = b, so the result also meets the
    interface conditions.  ``None`` keeps the coefficients as given.
    """
    _check_profile_support(cfg, e_lo, e_hi)
    c = amplitude * np.asarray(coeffs, dtype=np.result_type(np.asarray(coeffs), float))
    if vanish_order is not None:
        nbasis = max(c.size, 2 * (vanish_order + 1) + 6)
        c = np.concatenate([c, np.zeros(nbasis - c.size, dtype=c.dtype)])
        A = _constraint_rows(cfg, e_lo, e_hi, nbasis, vanish_order)
        A = A / np.linalg.norm(A, axis=1, keepdims=True)
        # least-change projection onto the null space of A (SVD keeps it stable)
        N = null_space(A, rcond=1e-14)
        c = N @ (N.T @ c)
    profile = ProfileBump(cfg, e_lo, e_hi, c)
    return SpectralTestFunction(cfg, profile, quad)


class PositionBump(BumpCombination):
    kind = "PositionBump"

    def char_wavenumber(self):
        return 1.0 / self.halfwidth


def make_position_bump(cfg: BarrierConfig, center: float, halfwidth: float,
                       amplitude: complex = 1.0) -> PositionBump:
    if not halfwidth > 0:
        raise SupportError("halfwidth must be positive")
    lo, hi = center - halfwidth, center + halfwidth
    if lo <= 0:
        raise SupportError(f"bump support [{lo}, {hi}] reaches r = 0")
    for x, name in ((cfg.a, "a"), (cfg.b, "b")):
        if lo <= x <= hi:
            raise SupportError(f"bump support [{lo}, {hi}] contains {name}={x}")
    return PositionBump(center, halfwidth, (amplitude,))


# ---------------------------------------------------------------- norms

def _h_plus_one_power(m):
    return [math.comb(m, j) for j in range(m + 1)]


def phi_norm(cfg: BarrierConfig, phi: RadialFunction, n: int, m: int,
             quad: QuadratureSpec | None = None) -> float:
    """||phi||_{n,m} = sqrt(int |(r+1)^n (h+1)^m phi|^2 dr)."""
    if n < 0 or m < 0:
        raise ValueError("norm indices must be non-negative")
    quad = quad or QuadratureSpec()
    g = phi if m == 0 else phi.apply_poly_h(cfg, _h_plus_one_power(m))
    weight = None if n == 0 else (lambda r: (r + 1.0) ** n)
    return position_norm(cfg, g, quad, weight)


# ---------------------------------------------------------------- membership

def _fornberg(x0, xs, order):
    """Finite-difference weights (Fornberg's recursion) for derivative ``order`` at x0."""
    n = len(xs)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5 = 1.0, c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for kk in range(mn, 0, -1):
                    c[i, kk] = c1 * (kk * c[i - 1, kk - 1] - c5 * c[i - 1, kk]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for kk in range(mn, 0, -1):
                c[j, kk] = (c4 * c[j, kk] - kk * c[j, kk - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def one_sided_derivative(f, x0, order, side, step=1e-3, accuracy=6):
    """order-th derivative of f at x0 from one side only (side = -1 or +1)."""
    npts = order + accuracy
    xs = x0 + side * step * np.arange(npts)
    w = _fornberg(x0, xs, order)
    return complex(np.dot(w, f(xs)))


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class MembershipReport:
    checks: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def get(self, name):
        return next(c for c in self.checks if c.name == name)


def _char_wavenumber(phi):
    f = getattr(phi, "char_wavenumber", None)
    if f is not None:
        return float(f())
    pieces = getattr(phi, "pieces", None)
    if pieces is not None:
        return float(max(abs(b) for _, _, t in pieces for _, _, b in t))
    return float(phi.k_scale)


def membership_report(cfg: BarrierConfig, phi: RadialFunction, max_order: int = 3,
                      quad: QuadratureSpec | None = None, rel_tol: float = 1e-5,
                      step: float = 1e-3) -> MembershipReport:
    """Numerical diagnostics for the domain and interface conditions.

    Every check is a necessary condition evaluated up to ``max_order``; a
    pass is not a proof of membership.
    """
    quad = quad or QuadratureSpec()
    rep = MembershipReport()
    lo, hi = phi.support()
    probe = np.linspace(lo, min(hi, lo + 200.0), 4001)
    sup = float(np.max(np.abs(phi(probe)))) or 1.0
    c = max(1.0, _char_wavenumber(phi))

    val0 = abs(complex(phi(np.array([0.0]))[0]))
    rep.checks.append(Check("phi(0)=0", val0, rel_tol * sup, val0 <= rel_tol * sup))
    for point, name in ((cfg.a, "a"), (cfg.b, "b")):
        for order in range(max_order + 1):
            thr = rel_tol * sup * c ** order
            for side, tag in ((-1, "-"), (1, "+")):
                d = abs(one_sided_derivative(phi, point, order, side, step))
                rep.checks.append(Check(f"phi^({order})({name}{tag})=0", d, thr, d <= thr))
    for m in range(max_order + 1):
        try:
            hm = phi if m == 0 else phi.apply_h(cfg, m)
        except CapabilityError:
            rep.flags[f"h^{m} phi"] = "unavailable"
            continue
        v = abs(complex(np.atleast_1d(hm(np.array([0.0])))[0]))
        thr = rel_tol * sup * c ** (2 * m)
        rep.checks.append(Check(f"h^{m} phi(0)=0", v, thr, v <= thr))
        for n in range(max_order + 1):
            val = phi_norm(cfg, phi, n, m, quad)
            rep.checks.append(Check(f"||phi||_{n},{m} finite", val, np.inf, bool(np.isfinite(val))))
    kind = getattr(phi, "kind", None)
    rep.flags["smooth_by_construction"] = kind in ("SpectralProfile", "PositionBump")
    rep.flags["ac2_by_construction"] = kind in ("SpectralProfile", "PositionBump")
    return rep


# ---------------------------------------------------------------- kets

def _direct_ket(cfg, phi, E, quad):
    k = np.sqrt(cfg.kappa * E)
    r, w = r_grid(cfg, [phi], quad, k_max=max(k, phi.k_scale))
    vals = np.conj(phi(r))
    u = ChiKernel(cfg, np.array([k])).project(r, w * vals)[0]
    return complex(u / np.sqrt(2 * k / cfg.kappa))


def _h_power_sigma(cfg, k, r, j):
    """h^j sigma(r; E) from the r-derivatives of sigma (V constant on each piece)."""
    kern = ChiKernel(cfg, np.array([k]))
    V = potential_value(cfg, r)
    # h = V - D/kappa with D = d^2/dr^2; expand (V - D/kappa)^j binomially
    out = np.zeros(r.shape)
    for i in range(j + 1):
        d = kern.block(r, 2 * i)[:, 0]
        out += math.comb(j, i) * V ** (j - i) * (-1.0 / cfg.kappa) ** i * d
    return out / np.sqrt(2 * k / cfg.kappa)


def _split_ket(cfg, phi, E, n, quad):
    """<h^n phi|E> as int conj(h^(n-j) phi) h^j sigma dr with j = n // 2.

    Moving half of the derivatives onto sigma (integration by parts, no
    boundary terms) keeps the integrand's dynamic range moderate; the
    unsplit integral of h^n phi loses digits to cancellation for narrow
    bumps once n >= 3.
    """
    j = n // 2
    k = np.sqrt(cfg.kappa * E)
    g = phi.apply_h(cfg, n - j) if n - j else phi
    r, w = r_grid(cfg, [g], quad, k_max=max(k, g.k_scale))
    return complex(np.sum(w * np.conj(g(r)) * _h_power_sigma(cfg, k, r, j)))


def ket_action(cfg: BarrierConfig, phi: RadialFunction, E: float, quad: QuadratureSpec | None = None,
               path: str = "auto") -> complex:
    """<phi|E> = int conj(phi) sigma(r; E) dr = conj(phihat(E)).

    ``path='auto'`` reads a cached energy profile when the function carries
    one and integrates over r otherwise; ``'direct'`` always integrates.
    """
    quad = quad or QuadratureSpec()
    rho_values(cfg, E)  # validates E > 0 off the excluded bands
    if path == "auto" and phi.cached_transform is not None:
        return complex(np.conj(phi.cached_transform(E)))
    if path not in ("auto", "direct"):
        raise ValueError(f"unknown path {path!r}")
    return _direct_ket(cfg, phi, E, quad)


def ket_eigen_check(cfg: BarrierConfig, phi: RadialFunction, E: float, n: int,
                    quad: QuadratureSpec | None = None) -> float:
    """|<h^n phi|E> - E^n <phi|E>| / (|E^n <phi|E>| + eps), both by r-integration.

    The left side never multiplies by E: it integrates h-powers of phi
    against r-derivatives of sigma.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    quad = quad or QuadratureSpec()
    prof = phi.cached_transform
    if prof is not None:
        lo, hi = prof.k_range()
        k = np.sqrt(cfg.kappa * E)
        if not lo < k < hi:
            return 0.0
    lhs = _split_ket(cfg, phi, E, n, quad)
    rhs = E ** n * _direct_ket(cfg, phi, E, quad)
    r, w = r_grid(cfg, [phi], quad)
    scale = float(np.sum(w * np.abs(phi(r)))) * ket_bound(cfg, E) * max(1.0, E ** n)
    return abs(lhs - rhs) / (abs(rhs) + 1e-13 * scale + 1e-300)


def ket_bound(cfg: BarrierConfig, E: float, quad: QuadratureSpec | None = None) -> float:
    """M(E) = sup_r |sigma(r; E)| from the per-region closed forms."""
    from .eigen import Family, closed_form_coefficients

    E = float(E)
    co = closed_form_coefficients(cfg, Family.CHI, E)
    k = np.sqrt(cfg.kappa * E)
    srho = float(np.sqrt(rho_values(cfg, E)))
    # region 1: sin(kr) on [0, a]
    m1 = 1.0 if k * cfg.a >= np.pi / 2 else abs(np.sin(k * cfg.a))
    # region 3: 2 Re(J3 e^{ikr}) on [b, inf) reaches its amplitude
    m3 = 2 * abs(co.c3)
    # region 2
    ends = np.abs(np.asarray(sigma_delta(cfg, E, np.array([cfg.a, cfg.b])))) / srho
    m2 = float(np.max(ends))
    if E > cfg.v0:
        q = np.sqrt(cfg.kappa * (E - cfg.v0))
        # 2 Re(J1 e^{iqr}) peaks where q r + arg J1 is a multiple of pi
        phase0 = np.angle(co.c1)
        n_lo = np.ceil((q * cfg.a + phase0) / np.pi)
        if n_lo * np.pi <= q * cfg.b + phase0:
            m2 = max(m2, 2 * abs(co.c1))
    # below v0 the region-2 piece is a sum of real exponentials: |f| peaks at the ends
    return srho * max(m1, m2, m3)


def schwartz_delta_check(cfg: BarrierConfig, phi: RadialFunction, E: float,
                         quad: QuadratureSpec | None = None, fhat: EnergyFunction | None = None) -> float:
    """|<phi|E> - conj(phihat(E))| with phihat from the energy representation."""
    quad = quad or QuadratureSpec()
    if fhat is None:
        fhat = energy_representation(cfg, phi, quad)
    lo, hi = fhat.k_range()
    k = np.sqrt(cfg.kappa * E)
    if not lo < k < hi:
        return abs(ket_action(cfg, phi, E, quad))
    return abs(ket_action(cfg, phi, E, quad) - np.conj(complex(fhat(E))))


def boundary_terms(cfg: BarrierConfig, phi: RadialFunction, E: float, R: float | None = None):
    """Surface terms [phi' sigma] and [phi sigma'] between r = 0 and r = R.

    These are what integration by parts drops when moving h from phi onto
    sigma; R defaults to just beyond the support.
    """
    if R is None:
        R = phi.support()[1] + 1.0
    ends = np.array([0.0, float(R)])
    s0 = sigma_delta(cfg, E, ends)
    s1 = sigma_delta(cfg, E, ends, order=1)
    p0 = phi(ends)
    p1 = phi.derivative(ends, 1)
    t1 = abs(complex(p1[1] * s0[1] - p1[0] * s0[0]))
    t2 = abs(complex(p0[1] * s1[1] - p0[0] * s1[0]))
    return t1, t2


def random_test_family(cfg: BarrierConfig, rng: np.random.Generator, count: int,
                       kinds=("spectral", "bump")):
    """Random spectral test functions and position bumps, alternating kinds."""
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        if kind == "spectral":
            lo = cfg.v0 + 0.3 + rng.uniform(0.0, 1.5)
            hi = lo + rng.uniform(3.0, 6.0)
            coeffs = np.concatenate([[1.0], rng.normal(scale=0.3, size=3)])
            out.append(make_spectral_test_function(cfg, lo, hi, coeffs, amplitude=rng.uniform(0.5, 2)))
        else:
            hw = rng.uniform(0.6, 1.2)
            center = cfg.b + hw + rng.uniform(0.2, 3.0)
            out.append(make_position_bump(cfg, center, hw, rng.uniform(0.5, 2.0)))
    return out

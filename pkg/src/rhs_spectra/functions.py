"""Function descriptors in the position and energy representations.

Position side (:class:`RadialFunction`): closed forms with analytic
derivatives (:class:`ExpPoly`, :class:`BumpCombination`), cubic-spline samples
(:class:`SampledRadial`), linear combinations, and functions synthesized from
an energy profile (:class:`Synthesized`).

Energy side (:class:`EnergyFunction`): every object exposes the k-normalized
amplitude ``uk(k) = fhat(E(k)) * sqrt(dE/dk)`` with ``E = k^2 / kappa``, which
is what all energy integrals use.  Calling the object with energies returns
``fhat(E)`` (or the rho-normalized ``f~(E)`` when flagged so).
"""
from __future__ import annotations

import functools
import math

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import chebyshev as cheb

from .errors import CapabilityError, DomainError, QuadratureFailure
from .model import BarrierConfig
from .quadrature import PanelInterpolant, QuadratureSpec, composite_nodes, gauss_legendre, split_interval
from .spectral import ChiKernel, rho_values

DECAY_LEVEL = 1e-12


# ---------------------------------------------------------------- position side

class RadialFunction:
    """Function on [0, inf) with a truncation radius ``decay_hint``."""

    decay_hint: float = np.inf
    k_scale: float = 50.0          # wavenumber beyond which the transform is negligible
    cached_transform = None
    is_real: bool = True

    def support(self):
        return 0.0, self.decay_hint

    def breaks(self):
        return ()

    def resolution(self) -> float:
        """Largest panel width that still resolves the envelope."""
        return np.inf

    def __call__(self, r):
        return self.derivative(r, 0)

    def derivative(self, r, order: int):
        raise CapabilityError(f"{type(self).__name__} has no analytic derivatives")

    def apply_h(self, cfg: BarrierConfig, n: int = 1) -> "RadialFunction":
        return self.apply_poly_h(cfg, [0.0] * n + [1.0])

    def apply_poly_h(self, cfg: BarrierConfig, coeffs) -> "RadialFunction":
        """sum_j coeffs[j] h^j applied to this function."""
        raise CapabilityError(f"h cannot be applied to {type(self).__name__}")

    def __add__(self, other):
        return LinearCombination([self, other], [1.0, 1.0])

    def __rmul__(self, alpha):
        return LinearCombination([self], [alpha])


class LinearCombination(RadialFunction):
    def __init__(self, funcs, coeffs):
        self.funcs = list(funcs)
        self.coeffs = [complex(c) if np.iscomplexobj(c) else float(c) for c in coeffs]
        self.decay_hint = max(f.decay_hint for f in self.funcs)
        self.k_scale = max(f.k_scale for f in self.funcs)
        self.is_real = all(f.is_real for f in self.funcs) and not any(
            isinstance(c, complex) for c in self.coeffs)
        cached = [f.cached_transform for f in self.funcs]
        if all(c is not None for c in cached):
            self.cached_transform = EnergySum(cached, self.coeffs)

    def support(self):
        sup = [f.support() for f in self.funcs]
        return min(s[0] for s in sup), max(s[1] for s in sup)

    def breaks(self):
        out = set()
        for f in self.funcs:
            out.update(f.breaks())
            out.update(f.support())
        return tuple(sorted(out))

    def resolution(self):
        return min(f.resolution() for f in self.funcs)

    def derivative(self, r, order):
        return sum(c * f.derivative(r, order) for c, f in zip(self.coeffs, self.funcs))

    def apply_poly_h(self, cfg, coeffs):
        return LinearCombination([f.apply_poly_h(cfg, coeffs) for f in self.funcs], self.coeffs)


class SampledRadial(RadialFunction):
    """Cubic-spline interpolant of samples; no h-application."""

    def __init__(self, nodes, values):
        from scipy.interpolate import CubicSpline

        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values)
        if nodes.ndim != 1 or nodes.size < 4 or np.any(np.diff(nodes) <= 0):
            raise DomainError("sampled nodes must be strictly increasing (at least 4)")
        if nodes[0] != 0:
            raise DomainError("sampled radial grids start at r = 0")
        if not np.all(np.isfinite(values)):
            raise DomainError("sampled values must be finite")
        self.nodes, self.values = nodes, values
        self.is_real = not np.iscomplexobj(values)
        self._spline = CubicSpline(nodes, values)
        self.decay_hint = float(nodes[-1])
        self.k_scale = np.pi / float(np.min(np.diff(nodes)))

    def derivative(self, r, order):
        if order > 2:
            raise CapabilityError("cubic spline samples carry at most two derivatives")
        r = np.asarray(r, dtype=float)
        inside = (r >= 0) & (r <= self.nodes[-1])
        out = np.where(inside, self._spline(np.clip(r, 0, self.nodes[-1]), order), 0.0)
        return out if out.ndim else out[()]

    def resolution(self):
        return float(np.max(np.diff(self.nodes))) * 4


# ---- exponential polynomials

def _exppoly_integral(p: int, mu, x0: float, x1: float):
    """int_x0^x1 r^p exp(mu r) dr for an array of mu (x1 may be inf, then Re mu < 0)."""
    mu = np.asarray(mu, dtype=complex)
    out = np.empty_like(mu)
    length = (x1 - x0) if np.isfinite(x1) else np.inf
    small = np.abs(mu) * length < 2.0
    big = ~small
    if big.any():
        m = mu[big]
        def anti(x):
            s = 0.0
            for j in range(p + 1):
                s = s + (-1) ** j * (math.factorial(p) / math.factorial(p - j)) * x ** (p - j) / m ** (j + 1)
            return np.exp(m * x) * s
        upper = 0.0 if not np.isfinite(x1) else anti(x1)
        out[big] = upper - anti(x0)
    if small.any():
        xg, wg = gauss_legendre(24)
        xs = 0.5 * (x1 + x0) + 0.5 * (x1 - x0) * xg
        out[small] = 0.5 * (x1 - x0) * (np.exp(np.outer(mu[small], xs)) * xs ** p) @ wg
    return out


class ExpPoly(RadialFunction):
    """Piecewise sum of ``c r^p exp(-beta r)`` terms.

    ``pieces`` is a list of ``(lo, hi, terms)`` with ``terms`` a tuple of
    ``(c, p, beta)``; the pieces tile [0, inf).  Values at piece edges use the
    left piece.  Transforms against the eigenfunctions are done in closed form.
    """

    def __init__(self, terms=None, pieces=None, decay_level=DECAY_LEVEL):
        if pieces is None:
            pieces = [(0.0, np.inf, tuple(terms))]
        self.pieces = [(float(lo), float(hi), tuple((c, int(p), b) for c, p, b in t))
                       for lo, hi, t in pieces]
        for _, _, t in self.pieces:
            for _, p, b in t:
                if p < 0:
                    raise DomainError("ExpPoly powers must be non-negative")
        last = self.pieces[-1][2]
        if any(np.real(b) <= 0 for _, _, b in last):
            raise DomainError("ExpPoly tail terms must decay (Re beta > 0)")
        self.is_real = all(np.isrealobj(c) and np.isrealobj(b) for _, _, t in self.pieces for c, _, b in t)
        self.decay_hint = self._decay_radius(decay_level)
        self.k_scale = 50.0

    def _decay_radius(self, level):
        lo = self.pieces[-1][0]
        r = max(lo, 1.0)
        peak = max(np.max(np.abs(self.derivative(np.linspace(0, r, 200), 0))), 1e-300)
        while np.max(np.abs(self.derivative(np.linspace(r, 2 * r, 50), 0))) > level * peak:
            r *= 1.25
        return float(r)

    def breaks(self):
        return tuple(lo for lo, _, _ in self.pieces[1:])

    def derivative(self, r, order):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        for i, (lo, hi, terms) in enumerate(self.pieces):
            mask = (r > lo) & (r <= hi) if i else (r >= lo) & (r <= hi)
            if not mask.any():
                continue
            rr = r[mask]
            acc = np.zeros(rr.shape, dtype=complex)
            for c, p, b in terms:
                poly = Polynomial.basis(p) * c
                # d/dr [P(r) e^{-b r}] = (P' - b P) e^{-b r}
                for _ in range(order):
                    poly = poly.deriv() - b * poly
                acc += poly(rr) * np.exp(-b * rr)
            out[mask] = acc
        if self.is_real:
            out = out.real
        return out if out.ndim else out[()]

    def apply_poly_h(self, cfg, coeffs):
        result = None
        current = self
        for j, c in enumerate(coeffs):
            if j:
                current = current._h_once(cfg)
            if c != 0:
                term = current._scale(c)
                result = term if result is None else result._add(term)
        return result if result is not None else self._scale(0.0)

    def __add__(self, other):
        if isinstance(other, ExpPoly):
            return self._add(other)
        return super().__add__(other)

    def __rmul__(self, alpha):
        return self._scale(alpha)

    def _scale(self, c):
        return ExpPoly(pieces=[(lo, hi, tuple((c * a, p, b) for a, p, b in t)) for lo, hi, t in self.pieces])

    def _refined(self, cuts):
        out = []
        for lo, hi, t in self.pieces:
            pts = [lo] + [x for x in sorted(cuts) if lo < x < hi] + [hi]
            out.extend((x0, x1, t) for x0, x1 in zip(pts[:-1], pts[1:]))
        return out

    def _add(self, other):
        cuts = {lo for lo, _, _ in self.pieces} | {lo for lo, _, _ in other.pieces}
        mine, theirs = self._refined(cuts), other._refined(cuts)
        return ExpPoly(pieces=[(lo, hi, t1 + t2) for (lo, hi, t1), (_, _, t2) in zip(mine, theirs)])

    def _h_once(self, cfg):
        pieces = []
        for lo, hi, terms in self._refined({cfg.a, cfg.b}):
            v = cfg.v0 if (lo >= cfg.a and hi <= cfg.b) else 0.0
            new = []
            for c, p, b in terms:
                # -(1/kappa) (c r^p e^{-br})'' + v c r^p e^{-br}
                new.append((-(c * b * b) / cfg.kappa + v * c, p, b))
                if p >= 1:
                    new.append((2 * c * p * b / cfg.kappa, p - 1, b))
                if p >= 2:
                    new.append((-c * p * (p - 1) / cfg.kappa, p - 2, b))
            pieces.append((lo, hi, tuple(new)))
        return ExpPoly(pieces=pieces)

    def transform_k(self, cfg: BarrierConfig, k):
        """u(k) = int f(r) s(r, k) dr in closed form (k-normalized kernel)."""
        k = np.asarray(k, dtype=float)
        K = ChiKernel(cfg, k)
        lam = (1j * k, 1j * K.q, 1j * k)
        # coefficients of e^{+lam r}, e^{-lam r} in each spatial region
        plus = (np.full(k.shape, 1 / 2j), K.J1, K.J3)
        minus = (np.full(k.shape, -1 / 2j), K.J2, np.conj(K.J3))
        bounds = ((0.0, cfg.a), (cfg.a, cfg.b), (cfg.b, np.inf))
        total = np.zeros(k.shape, dtype=complex)
        for lo, hi, terms in self.pieces:
            for j, (x0, x1) in enumerate(bounds):
                s0, s1 = max(lo, x0), min(hi, x1)
                if s1 <= s0:
                    continue
                for c, p, b in terms:
                    total += c * (plus[j] * _exppoly_integral(p, lam[j] - b, s0, s1)
                                  + minus[j] * _exppoly_integral(p, -lam[j] - b, s0, s1))
        total = total * K.norm
        return total.real if self.is_real else total


def r_exp(amplitude=1.0, beta=1.0, power=1) -> ExpPoly:
    """amplitude * r^power * exp(-beta r)."""
    return ExpPoly([(amplitude, power, beta)])


# ---- compactly supported bumps

def bump_template(x, order: int = 0):
    """order-th derivative of psi = exp(-1/(1-x^2)) (zero outside |x| < 1).

    With g = log psi = -(1/(1-x) + 1/(1+x))/2 every g^(m) is a sum of two
    same-scale terms, and psi^(n) = psi B_n(g', ..., g^(n)) follows from the
    complete Bell recursion.  This keeps full relative accuracy near the
    edges, where expanding psi^(n) as a polynomial over (1-x^2)^(2n) loses
    several digits for n >= 4.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    a, b = 1 - x, 1 + x
    # psi underflows long before the powers of 1/(1-x) overflow
    inside = (np.abs(x) < 1) & (a * b > 1.0 / 700)
    if inside.any():
        a, b = a[inside], b[inside]
        g = [None] + [-0.5 * math.factorial(m) * (a ** -(m + 1) + (-1) ** m * b ** -(m + 1))
                      for m in range(1, order + 1)]
        B = [np.ones_like(a)]
        for m in range(order):
            B.append(sum(math.comb(m, j) * g[j + 1] * B[m - j] for j in range(m + 1)))
        out[inside] = np.exp(-1 / (a * b)) * B[order]
    return out if out.ndim else out[()]


class BumpCombination(RadialFunction):
    """sum_j d_j psi^(j)((r - center) / halfwidth) / halfwidth^j, psi the bump template."""

    def __init__(self, center, halfwidth, deriv_coeffs):
        if halfwidth <= 0:
            raise DomainError("halfwidth must be positive")
        self.center, self.halfwidth = float(center), float(halfwidth)
        self.deriv_coeffs = tuple(deriv_coeffs)
        self.is_real = all(np.isrealobj(d) for d in self.deriv_coeffs)
        self.decay_hint = self.center + self.halfwidth
        self.k_scale = 40.0 / self.halfwidth

    def support(self):
        return self.center - self.halfwidth, self.center + self.halfwidth

    def resolution(self):
        # higher derivatives of the template sharpen toward the support edges
        return self.halfwidth / (8 + 20 * (len(self.deriv_coeffs) - 1))

    def derivative(self, r, order):
        x = (np.asarray(r, dtype=float) - self.center) / self.halfwidth
        out = 0.0
        for j, d in enumerate(self.deriv_coeffs):
            if d != 0:
                out = out + d * bump_template(x, j + order) / self.halfwidth ** (j + order)
        return out if np.ndim(out) else (out + 0.0)

    def apply_poly_h(self, cfg, coeffs):
        lo, hi = self.support()
        if lo < cfg.a < hi or lo < cfg.b < hi:
            raise CapabilityError("bump support straddles a potential step")
        v = float(cfg.v0 if lo >= cfg.a and hi <= cfg.b else 0.0)
        # h acts as v - (1/kappa) d^2 on the support: polynomial in d^2
        op = Polynomial([0.0])
        hop = Polynomial([v, 0.0, -1.0 / cfg.kappa])
        for j, c in enumerate(coeffs):
            op = op + c * hop ** j
        d_op = np.asarray(op.coef)
        new = np.zeros(len(self.deriv_coeffs) + len(d_op), dtype=np.result_type(d_op, *self.deriv_coeffs))
        for i, d in enumerate(self.deriv_coeffs):
            new[i:i + len(d_op)] += d * d_op
        return BumpCombination(self.center, self.halfwidth, tuple(new))


def position_bump(center, halfwidth, amplitude=1.0) -> BumpCombination:
    return BumpCombination(center, halfwidth, (amplitude,))


# ------------------------------------------------------------------ energy side

class EnergyFunction:
    """Energy-representation function, accessed through ``uk(k)``."""

    normalization = "delta"
    cfg: BarrierConfig

    def uk(self, k):
        raise NotImplementedError

    def k_range(self):
        """(k_lo, k_hi) outside which uk vanishes; k_hi may be inf."""
        raise NotImplementedError

    def k_breaks(self):
        return ()

    def native_width(self):
        return np.inf

    def phase_rate(self):
        """Extra k-oscillation rate carried by time phases."""
        return 0.0

    def energy_cutoff(self):
        lo, hi = self.k_range()
        return hi ** 2 / self.cfg.kappa

    def __call__(self, E):
        E = np.asarray(E, dtype=float)
        k = np.sqrt(self.cfg.kappa * E)
        val = self.uk(k) / np.sqrt(2 * k / self.cfg.kappa)
        if self.normalization == "rho":
            val = val / np.sqrt(rho_values(self.cfg, E))
        return val if np.ndim(val) else val[()]

    def as_rho_normalized(self):
        return _RhoView(self)

    def scaled_by_polynomial(self, poly):
        """Profile multiplied by a polynomial in E (h^n acts like E^n)."""
        return ModifiedEnergy(self, Polynomial(poly), 0.0)

    def evolved(self, t, hbar):
        return ModifiedEnergy(self, Polynomial([1.0]), t / hbar)


class _RhoView(EnergyFunction):
    normalization = "rho"

    def __init__(self, base):
        self.base, self.cfg = base, base.cfg

    def uk(self, k):
        return self.base.uk(k)

    def k_range(self):
        return self.base.k_range()

    def k_breaks(self):
        return self.base.k_breaks()

    def native_width(self):
        return self.base.native_width()


class ProfileBump(EnergyFunction):
    """g(E) = bump((E - c)/w) * sum_j coeffs_j T_j((E - c)/w) on (e_lo, e_hi)."""

    def __init__(self, cfg, e_lo, e_hi, coeffs=(1.0,)):
        if not 0 < e_lo < e_hi:
            raise DomainError("profile support must satisfy 0 < e_lo < e_hi")
        self.cfg = cfg
        self.e_lo, self.e_hi = float(e_lo), float(e_hi)
        self.coeffs = np.asarray(coeffs)

    def g(self, E):
        E = np.asarray(E, dtype=float)
        x = (2 * E - self.e_lo - self.e_hi) / (self.e_hi - self.e_lo)
        val = bump_template(x) * cheb.chebval(np.clip(x, -1, 1), self.coeffs)
        return val

    def uk(self, k):
        k = np.asarray(k, dtype=float)
        return self.g(k ** 2 / self.cfg.kappa) * np.sqrt(2 * k / self.cfg.kappa)

    def k_range(self):
        return np.sqrt(self.cfg.kappa * self.e_lo), np.sqrt(self.cfg.kappa * self.e_hi)

    def native_width(self):
        lo, hi = self.k_range()
        return (hi - lo) / 24

    def edge_scale(self):
        """Smallest k-halfwidth equivalent of the bump edges (sets decay in r)."""
        lo, hi = self.k_range()
        w = (self.e_hi - self.e_lo) / 2
        return min(w * self.cfg.kappa / (2 * hi), (hi - lo) / 2)


class ModifiedEnergy(EnergyFunction):
    """base(E) * poly(E) * exp(-i E tau)."""

    def __init__(self, base, poly, tau):
        self.base, self.cfg, self.poly, self.tau = base, base.cfg, poly, float(tau)

    def uk(self, k):
        k = np.asarray(k, dtype=float)
        E = k ** 2 / self.cfg.kappa
        val = self.base.uk(k) * self.poly(E)
        if self.tau:
            val = val * np.exp(-1j * E * self.tau)
        return val

    def k_range(self):
        return self.base.k_range()

    def k_breaks(self):
        return self.base.k_breaks()

    def native_width(self):
        return self.base.native_width()

    def phase_rate(self):
        return self.base.phase_rate() + 2 * self.k_range()[1] * abs(self.tau) / self.cfg.kappa

    def scaled_by_polynomial(self, poly):
        return ModifiedEnergy(self.base, self.poly * Polynomial(poly), self.tau)

    def evolved(self, t, hbar):
        return ModifiedEnergy(self.base, self.poly, self.tau + t / hbar)


class EnergySum(EnergyFunction):
    def __init__(self, parts, coeffs):
        self.parts, self.coeffs, self.cfg = list(parts), list(coeffs), parts[0].cfg

    def uk(self, k):
        return sum(c * p.uk(k) for c, p in zip(self.coeffs, self.parts))

    def k_range(self):
        rs = [p.k_range() for p in self.parts]
        return min(r[0] for r in rs), max(r[1] for r in rs)

    def k_breaks(self):
        out = set()
        for p in self.parts:
            out.update(p.k_breaks())
            out.update(x for x in p.k_range() if np.isfinite(x))
        return tuple(sorted(out))

    def native_width(self):
        return min(p.native_width() for p in self.parts)

    def phase_rate(self):
        return max(p.phase_rate() for p in self.parts)


class KGridEnergy(EnergyFunction):
    """u(k) tabulated at Gauss-Legendre panel nodes; panel-polynomial interpolation."""

    def __init__(self, cfg, edges, n, values, info=None):
        self.cfg = cfg
        self.interp = PanelInterpolant(edges, n, values, slack=1e-12)
        self.info = dict(info or {})

    @property
    def edges(self):
        return self.interp.edges

    @property
    def values(self):
        return self.interp.values.ravel()

    def nodes_weights(self):
        return composite_nodes(self.interp.edges, self.interp.n)

    def uk(self, k):
        return self.interp(k)

    def k_range(self):
        return float(self.interp.edges[0]), float(self.interp.edges[-1])

    def k_breaks(self):
        return tuple(self.info.get("breaks", ()))

    def native_width(self):
        return float(np.max(np.diff(self.interp.edges)))


class AnalyticEnergy(EnergyFunction):
    """Closed-form u(k) (from ExpPoly); unbounded k-range with an algebraic tail."""

    def __init__(self, cfg, func, k_min, info=None):
        self.cfg, self.func, self.k_min = cfg, func, float(k_min)
        self.info = dict(info or {})

    def uk(self, k):
        k = np.asarray(k, dtype=float)
        ok = k >= self.k_min
        vals = self.func(k[ok]) if ok.any() else np.zeros(0)
        out = np.zeros(k.shape, dtype=np.result_type(vals, float))
        out[ok] = vals
        return out

    def k_range(self):
        return self.k_min, np.inf

    def k_breaks(self):
        return (np.sqrt(self.cfg.kappa * self.cfg.v0),) if self.cfg.v0 > 0 else ()

    def native_width(self):
        return np.pi / (2 * self.cfg.b)

    def tail_cutoff(self, tol, start=16.0):
        """k beyond which the L1 tail of |u| is below tol * max|u| (power-law fit)."""
        k0 = np.linspace(self.k_min, start, 400)
        peak = float(np.max(np.abs(self.uk(k0))))
        K = start
        while K < 1e7:
            u1 = float(np.max(np.abs(self.uk(np.linspace(K, 1.1 * K, 64)))))
            u2 = float(np.max(np.abs(self.uk(np.linspace(2 * K, 2.2 * K, 64)))))
            p = max(np.log2(max(u1, 1e-300) / max(u2, 1e-300)), 1.05)
            if u1 * K / (p - 1) < tol * peak:
                return K
            K *= 2
        raise QuadratureFailure("energy profile decays too slowly to truncate", u1)


class SampledEnergy(EnergyFunction):
    """Cubic spline of fhat(E) on an increasing grid with first node > 0."""

    def __init__(self, cfg, nodes, values, normalization="delta"):
        from scipy.interpolate import CubicSpline

        nodes = np.asarray(nodes, dtype=float)
        if nodes.size < 4 or nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
            raise DomainError("energy nodes must be increasing, positive, at least 4")
        values = np.asarray(values)
        if not np.all(np.isfinite(values)):
            raise DomainError("energy samples must be finite")
        if normalization == "rho":
            values = values * np.sqrt(rho_values(cfg, nodes))
        self.cfg, self.nodes = cfg, nodes
        self._spline = CubicSpline(nodes, values)

    def uk(self, k):
        k = np.asarray(k, dtype=float)
        E = k ** 2 / self.cfg.kappa
        inside = (E >= self.nodes[0]) & (E <= self.nodes[-1])
        val = np.where(inside, self._spline(np.clip(E, self.nodes[0], self.nodes[-1])), 0.0)
        return val * np.sqrt(2 * k / self.cfg.kappa)

    def k_range(self):
        return float(np.sqrt(self.cfg.kappa * self.nodes[0])), float(np.sqrt(self.cfg.kappa * self.nodes[-1]))

    def native_width(self):
        k = np.sqrt(self.cfg.kappa * self.nodes)
        return float(np.max(np.diff(k))) * 4


# ------------------------------------------------------------------ synthesis

def k_band_breaks(cfg: BarrierConfig):
    """Panel breaks that keep k-nodes out of the excluded energy bands."""
    out = [np.sqrt(cfg.kappa * cfg.eps_energy)]
    if cfg.v0 > 0:
        lo = cfg.v0 - cfg.eps_energy
        if lo > 0:
            out.append(np.sqrt(cfg.kappa * lo))
        out.append(np.sqrt(cfg.kappa * (cfg.v0 + cfg.eps_energy)))
    return out


def k_panels(cfg: BarrierConfig, k_lo, k_hi, width, extra_breaks=()):
    """Panel edges on [k_lo, k_hi] with the excluded bands removed.

    Returns a list of edge arrays (one per contiguous interval).
    """
    bands = [(0.0, np.sqrt(cfg.kappa * cfg.eps_energy))]
    if cfg.v0 > 0:
        bands.append((np.sqrt(cfg.kappa * max(cfg.v0 - cfg.eps_energy, 0.0)),
                      np.sqrt(cfg.kappa * (cfg.v0 + cfg.eps_energy))))
    pieces = [(k_lo, k_hi)]
    for b0, b1 in bands:
        nxt = []
        for x0, x1 in pieces:
            if b1 <= x0 or b0 >= x1:
                nxt.append((x0, x1))
                continue
            if x0 < b0:
                nxt.append((x0, b0))
            if b1 < x1:
                nxt.append((b1, x1))
        pieces = nxt
    return [split_interval(x0, x1, width, extra_breaks) for x0, x1 in pieces if x1 > x0]


def k_nodes(cfg, k_lo, k_hi, width, n, extra_breaks=()):
    xs, ws = [], []
    for edges in k_panels(cfg, k_lo, k_hi, width, extra_breaks):
        x, w = composite_nodes(edges, n)
        xs.append(x)
        ws.append(w)
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def synthesize(cfg: BarrierConfig, fhat: EnergyFunction, r, quad: QuadratureSpec,
               order: int = 0, oversample: int = 1):
    """f^(order)(r) = int uk(k) s^(order)(r, k) dk on a phase-limited k-grid."""
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = r.ravel()
    if r.size == 0:
        return np.zeros(shape)
    R = max(float(np.max(r)), 1.0)
    k_lo, k_hi = fhat.k_range()
    if not np.isfinite(k_hi):
        k_hi = quad.e_cutoff and np.sqrt(cfg.kappa * quad.e_cutoff) or fhat.tail_cutoff(quad.tol)
    width = min(quad.integration_phase / (R + fhat.phase_rate()), fhat.native_width()) / oversample
    if isinstance(fhat, KGridEnergy) and oversample == 1 and width >= 0.999 * fhat.native_width() \
            and fhat.phase_rate() == 0:
        k, w = fhat.nodes_weights()
        u = fhat.values
    else:
        k, w = k_nodes(cfg, k_lo, k_hi, width, quad.nodes_per_panel, fhat.k_breaks())
        u = fhat.uk(k)
    work = float(k.size) * r.size * (1 + order)
    if work > quad.max_work:
        raise QuadratureFailure(
            f"synthesis needs {k.size} k-nodes x {r.size} points, beyond the work budget", work)
    keep = u != 0
    K = ChiKernel(cfg, k[keep])
    out = K.synthesize(r, (w * u)[keep], order)
    return out.reshape(shape)


class Synthesized(RadialFunction):
    """f(r) = int fhat(E) sigma(r; E) dE, evaluated on demand."""

    def __init__(self, cfg: BarrierConfig, fhat: EnergyFunction, quad: QuadratureSpec | None = None,
                 decay_hint: float | None = None):
        self.cfg, self.fhat = cfg, fhat
        self.quad = quad or QuadratureSpec()
        self.is_real = False
        lo, hi = fhat.k_range()
        self.k_scale = hi if np.isfinite(hi) else 50.0
        self.decay_hint = decay_hint if decay_hint is not None else self._estimate_decay()

    def _estimate_decay(self):
        f = self.fhat
        base = getattr(f, "base", f)
        if isinstance(base, ProfileBump):
            h = base.edge_scale()
            # |FT of a bump of half-width h| ~ (h r)^{-3/4} exp(-sqrt(2 h r))
            target = -np.log(DECAY_LEVEL)
            z = (target + 6) ** 2 / 2
            R = z / h
            return float(R + 2 * self.k_scale * abs(getattr(f, "tau", 0.0)) / self.cfg.kappa
                         + self.cfg.b)
        if isinstance(f, KGridEnergy) and "r_cutoff" in f.info:
            return float(f.info["r_cutoff"])
        return 50.0

    def derivative(self, r, order, oversample: int = 1):
        return synthesize(self.cfg, self.fhat, r, self.quad, order, oversample)

    def resolution(self):
        return np.pi / max(self.k_scale, 1e-3)

    def breaks(self):
        return (self.cfg.a, self.cfg.b)

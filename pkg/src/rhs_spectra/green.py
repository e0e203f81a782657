"""Resolvent kernel G(r, s; E) of (E - H)^{-1} and its action on radial functions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import Family, closed_form_coefficients, eval_eigenfunction
from .errors import CapabilityError, OnSpectrum, QuadratureFailure
from .functions import RadialFunction
from .model import BarrierConfig, Region, as_energy, check_energy, classify, wavenumbers
from .quadrature import QuadratureSpec, composite_nodes, gauss_legendre, split_interval


@dataclass(frozen=True)
class GreenEvaluation:
    value: complex
    region: Region
    ordered: bool      # True when r < s, i.e. chi was evaluated at r


@dataclass(frozen=True)
class _Kernel:
    """G(r, s) = pref * regular(min(r, s)) * outgoing(max(r, s))."""

    regular: Family
    outgoing: Family
    pref: complex
    region: Region
    decay: float       # exponential decay rate of the outgoing solution


def _kernel(cfg: BarrierConfig, E) -> _Kernel:
    E = as_energy(E)
    region = classify(E)  # raises DegenerateEnergy at 0
    if region is Region.POSITIVE_REAL:
        raise OnSpectrum(f"E={E} lies on the spectrum [0, inf)")
    check_energy(cfg, E)
    wn = wavenumbers(cfg, E)
    kap = cfg.kappa
    if region is Region.NEGATIVE_RE:
        J3 = complex(closed_form_coefficients(cfg, Family.CHI_TILDE, E).c3)
        pref = -(kap / wn.k_tilde) / (2 * J3)
        return _Kernel(Family.CHI_TILDE, Family.THETA_TILDE, pref, region, float(np.real(wn.k_tilde)))
    co = closed_form_coefficients(cfg, Family.CHI, E)
    if region is Region.UPPER_HALF:
        pref = (kap / wn.k) / (2j * complex(co.c4))
        return _Kernel(Family.CHI, Family.THETA_PLUS, pref, region, float(abs(np.imag(wn.k))))
    pref = -(kap / wn.k) / (2j * complex(co.c3))
    return _Kernel(Family.CHI, Family.THETA_MINUS, pref, region, float(abs(np.imag(wn.k))))


def green_function(cfg: BarrierConfig, r, s, E):
    """G(r, s; E), the kernel of (E - H)^{-1}; vectorized over broadcastable r, s.

    Symmetric in (r, s) by construction: the regular solution is always taken
    at min(r, s) and the outgoing one at max(r, s).
    """
    ker = _kernel(cfg, E)
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(r < 0) or np.any(s < 0):
        raise ValueError("radii must be non-negative")
    lo, hi = np.minimum(r, s), np.maximum(r, s)
    E = as_energy(E)
    out = ker.pref * np.asarray(eval_eigenfunction(cfg, ker.regular, E, lo)) \
        * np.asarray(eval_eigenfunction(cfg, ker.outgoing, E, hi))
    return complex(out) if out.ndim == 0 else out


def green_evaluation(cfg: BarrierConfig, r: float, s: float, E) -> GreenEvaluation:
    ker = _kernel(cfg, E)
    return GreenEvaluation(green_function(cfg, r, s, E), ker.region, bool(r < s))


# ---------------------------------------------------------------- resolvent

class ResolventImage(RadialFunction):
    """g = (E - H)^{-1} f, evaluated on demand by composite quadrature in s."""

    def __init__(self, cfg: BarrierConfig, f: RadialFunction, E, quad: QuadratureSpec):
        self.cfg, self.f, self.quad = cfg, f, quad
        self.E = as_energy(E)
        self.kernel = _kernel(cfg, self.E)
        self.is_real = False
        self.k_scale = f.k_scale
        lo, hi = f.support()
        if quad.r_cutoff is not None:
            hi = min(hi, quad.r_cutoff)
        if not np.isfinite(hi):
            raise QuadratureFailure("source has no finite support or decay hint", np.inf)
        self.s_lo, self.s_hi = max(lo, 0.0), float(hi)
        if self.kernel.decay * self.s_hi > 600:
            raise QuadratureFailure("kernel growth over the source support overflows", np.inf)
        self.error_estimate = None

    def resolution(self):
        return self.f.resolution()

    def _edges(self, refine):
        E = self.E
        k = abs(complex(np.sqrt(self.cfg.kappa * E + 0j)))
        width = min(self.quad.integration_phase / max(k, 1e-3), 1.0 / max(self.kernel.decay, 1e-3),
                    self.f.resolution(), (self.s_hi - self.s_lo) or 1.0) / refine
        breaks = {self.cfg.a, self.cfg.b, *self.f.breaks()}
        return split_interval(self.s_lo, self.s_hi, width, breaks)

    def _evaluate(self, r, refine):
        cfg, E, ker = self.cfg, self.E, self.kernel
        n = self.quad.nodes_per_panel
        edges = self._edges(refine)
        s, w = composite_nodes(edges, n)
        fs = self.f(s)
        reg = (w * eval_eigenfunction(cfg, ker.regular, E, s) * fs).reshape(-1, n).sum(axis=1)
        out = (w * eval_eigenfunction(cfg, ker.outgoing, E, s) * fs).reshape(-1, n).sum(axis=1)
        # A[p] = int_{lo}^{edge_p} chi f,  B[p] = int_{edge_p}^{hi} theta f
        A = np.concatenate([[0.0], np.cumsum(reg)])
        B = np.concatenate([np.cumsum(out[::-1])[::-1], [0.0]])
        p = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, len(edges) - 2)
        inside = (r > edges[0]) & (r < edges[-1])
        x, wx = gauss_legendre(n)
        left = np.where(r <= edges[0], 0.0, np.where(r >= edges[-1], A[-1], A[p]))
        right = np.where(r <= edges[0], B[0], np.where(r >= edges[-1], 0.0, B[p + 1]))
        if inside.any():
            ri, e0, e1 = r[inside], edges[p[inside]], edges[p[inside] + 1]
            # partial panels [e0, r] and [r, e1]
            for (x0, x1), target in (((e0, ri), "left"), ((ri, e1), "right")):
                mid, half = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
                nodes = mid[:, None] + half[:, None] * x[None, :]
                fam = ker.regular if target == "left" else ker.outgoing
                vals = eval_eigenfunction(cfg, fam, E, nodes) * self.f(nodes)
                part = half * (vals * wx[None, :]).sum(axis=1)
                if target == "left":
                    left = left.astype(complex)
                    left[inside] = left[inside] + part
                else:
                    right = right.astype(complex)
                    right[inside] = right[inside] + part
        g_out = eval_eigenfunction(cfg, ker.outgoing, E, r)
        g_reg = eval_eigenfunction(cfg, ker.regular, E, r)
        return ker.pref * (g_out * left + g_reg * right)

    def derivative(self, r, order=0):
        if order != 0:
            raise CapabilityError("resolvent images are available as values only")
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        g1 = self._evaluate(flat, 1)
        g2 = self._evaluate(flat, 2)
        scale = max(float(np.max(np.abs(g2))), 1e-300)
        err = float(np.max(np.abs(g1 - g2))) / scale
        self.error_estimate = err
        if err > self.quad.tol:
            raise QuadratureFailure(f"resolvent quadrature did not converge (estimate {err:.2e})", err)
        return g2.reshape(r.shape)


def apply_resolvent(cfg: BarrierConfig, f: RadialFunction, E, quad: QuadratureSpec | None = None
                    ) -> ResolventImage:
    """g(r) = int G(r, s; E) f(s) ds = ((E - H)^{-1} f)(r)."""
    return ResolventImage(cfg, f, E, quad or QuadratureSpec())


def fd_second_derivative(g, r, step=1e-4):
    """Centered 5-point stencil for g''(r)."""
    r = np.asarray(r, dtype=float)
    pts = np.concatenate([r - 2 * step, r - step, r, r + step, r + 2 * step])
    v = g(pts).reshape(5, -1)
    return (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * step ** 2)


def resolvent_residual(cfg: BarrierConfig, f: RadialFunction, E, probes,
                       quad: QuadratureSpec | None = None, step: float = 1e-4) -> float:
    """max |(E - h) g - f| at the probes over sup |f|, g = (E - H)^{-1} f.

    Probes must keep 2*step away from a, b and the kinks of f.
    """
    from .model import potential_value

    probes = np.asarray(probes, dtype=float)
    g = apply_resolvent(cfg, f, E, quad)
    gv = g(probes)
    lhs = as_energy(E) * gv - (potential_value(cfg, probes) * gv
                               - fd_second_derivative(g, probes, step) / cfg.kappa)
    fv = f(probes)
    lo, hi = f.support()
    sup = float(np.max(np.abs(f(np.linspace(lo, hi, 2001)))))
    return float(np.max(np.abs(lhs - fv)) / max(sup, 1e-300))

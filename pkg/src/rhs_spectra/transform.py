"""Generalized Fourier transform pair, spectral identities and time evolution.

All energy integrals run over the wavenumber k with the k-normalized kernel
``s(r, k)``, so ``int fhat ghat dE = int u_f u_g dk`` with no 1/sqrt(E)
weight near threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, CutoffTooSmall, DomainError, NormalizationError, QuadratureFailure
from .functions import (AnalyticEnergy, EnergyFunction, ExpPoly, KGridEnergy, LinearCombination,
                        RadialFunction,
                        Synthesized, k_nodes, k_panels, synthesize)
from .model import BarrierConfig
from .quadrature import QuadratureSpec, composite_nodes, split_interval
from .spectral import ChiKernel, rho_values

MAX_K = 2e4


# ---------------------------------------------------------------- position side

def r_extent(funcs, quad: QuadratureSpec):
    lo = min(f.support()[0] for f in funcs)
    hi = quad.r_cutoff if quad.r_cutoff is not None else max(f.support()[1] for f in funcs)
    if not np.isfinite(hi):
        raise DomainError("function has no decay hint; set quad.r_cutoff")
    return max(lo, 0.0), float(hi)


def _leaves(funcs):
    out = []
    for f in funcs:
        out.extend(_leaves(f.funcs) if isinstance(f, LinearCombination) else [f])
    return out


def r_grid(cfg: BarrierConfig, funcs, quad: QuadratureSpec, k_max: float | None = None,
           refine: int = 1, hi: float | None = None):
    """Composite nodes/weights over the joint support with the phase rule in r.

    Each segment between breakpoints takes the finest resolution among the
    functions whose support covers it, so a narrow bump does not force fine
    panels over a long-tailed partner.
    """
    lo, top = r_extent(funcs, quad)
    if hi is not None:
        top = hi
    if k_max is None:
        k_max = max(f.k_scale for f in funcs)
    phase_width = quad.integration_phase / max(k_max, 1e-3)
    breaks = {cfg.a, cfg.b}
    for f in funcs:
        breaks.update(f.breaks())
        breaks.update(f.support())
    pts = sorted({lo, top, *(b for b in breaks if lo < b < top)})
    leaves = _leaves(funcs)
    edges = [pts[0]]
    for x0, x1 in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (x0 + x1)
        res = [f.resolution() for f in leaves if f.support()[0] <= mid <= f.support()[1]]
        width = min([phase_width, *res]) / refine
        edges.extend(split_interval(x0, x1, width)[1:])
    return composite_nodes(np.asarray(edges), quad.nodes_per_panel)


def position_inner(cfg, f: RadialFunction, g: RadialFunction, quad: QuadratureSpec, weight=None):
    """int conj(f) g w dr on the joint r-grid."""
    r, w = r_grid(cfg, [f, g], quad)
    fv = f(r)
    gv = fv if g is f else g(r)
    if weight is not None:
        w = w * weight(r)
    return complex(np.sum(w * np.conj(fv) * gv))


def position_norm(cfg, f: RadialFunction, quad: QuadratureSpec, weight=None) -> float:
    r, w = r_grid(cfg, [f], quad)
    fv = f(r)
    if weight is not None:
        fv = fv * weight(r)
    return float(np.sqrt(np.sum(w * np.abs(fv) ** 2)))


# ---------------------------------------------------------------- transforms

@dataclass
class TransformInfo:
    r_cutoff: float
    k_cutoff: float
    e_cutoff: float
    r_nodes: int
    k_nodes: int
    tail_estimate: float
    quadrature_estimate: float

    def as_dict(self):
        return dict(self.__dict__)


def _project(cfg, f, k, r, w, values=None):
    fv = f(r) if values is None else values
    return ChiKernel(cfg, k).project(r, w * fv)


def to_energy(cfg: BarrierConfig, f: RadialFunction, quad: QuadratureSpec | None = None,
              method: str = "auto") -> EnergyFunction:
    """fhat(E) = int f(r) sigma(r; E) dr (delta-normalized).

    ``method='auto'`` integrates exponential polynomials in closed form and
    everything else by composite quadrature; ``'quadrature'`` forces the latter.
    """
    quad = quad or QuadratureSpec()
    k_min = float(np.sqrt(cfg.kappa * cfg.eps_energy))
    if method == "auto" and isinstance(f, ExpPoly):
        return AnalyticEnergy(cfg, lambda k: f.transform_k(cfg, k), k_min,
                              info=dict(method="closed-form"))
    if method not in ("auto", "quadrature"):
        raise DomainError(f"unknown transform method {method!r}")

    lo, R = r_extent([f], quad)
    K = float(f.k_scale)
    if quad.e_cutoff is not None:
        K = float(np.sqrt(cfg.kappa * quad.e_cutoff))
    width_k = quad.max_panel_phase / max(R, 1.0)
    while True:
        r, w = r_grid(cfg, [f], quad, k_max=K)
        fv = f(r)
        edges_list = k_panels(cfg, 0.0, K, width_k)
        k = np.concatenate([composite_nodes(e, quad.nodes_per_panel)[0] for e in edges_list])
        kw = np.concatenate([composite_nodes(e, quad.nodes_per_panel)[1] for e in edges_list])
        u = _project(cfg, f, k, r, w, fv)
        total = np.sum(kw * np.abs(u) ** 2)
        tail_mask = k > 0.75 * K
        tail = float(np.sqrt(np.sum(kw[tail_mask] * np.abs(u[tail_mask]) ** 2) / max(total, 1e-300)))
        if tail <= quad.tol or quad.e_cutoff is not None:
            break
        if K >= MAX_K:
            raise CutoffTooSmall(f"transform still carries weight {tail:.2e} at k = {K:.3g}", tail)
        K *= 2
    # r-quadrature check on the highest-k panel with halved r-panels
    top = slice(max(0, k.size - quad.nodes_per_panel), k.size)
    r2, w2 = r_grid(cfg, [f], quad, k_max=K, refine=2)
    u2 = _project(cfg, f, k[top], r2, w2)
    scale = max(float(np.max(np.abs(u))), 1e-300)
    q_err = float(np.max(np.abs(u2 - u[top]))) / scale
    if q_err > max(quad.tol, 1e-12) * 1e3:
        raise QuadratureFailure("r-quadrature of the transform did not converge", q_err)
    if len(edges_list) == 1:
        edges = edges_list[0]
        info = TransformInfo(R, K, K ** 2 / cfg.kappa, r.size, k.size, tail, q_err)
        return KGridEnergy(cfg, edges, quad.nodes_per_panel, u, info=dict(info.as_dict()))
    # stitch the contiguous pieces; the excluded bands become zero-width gaps
    parts = []
    start = 0
    for e in edges_list:
        n = (len(e) - 1) * quad.nodes_per_panel
        parts.append(KGridEnergy(cfg, e, quad.nodes_per_panel, u[start:start + n]))
        start += n
    info = TransformInfo(R, K, K ** 2 / cfg.kappa, r.size, k.size, tail, q_err)
    return PiecewiseKGrid(cfg, parts, info.as_dict())


class PiecewiseKGrid(KGridEnergy):
    """Several KGridEnergy pieces separated by excluded bands."""

    def __init__(self, cfg, parts, info):
        self.cfg, self.parts, self.info = cfg, parts, dict(info)

    @property
    def edges(self):
        return np.concatenate([p.edges for p in self.parts])

    @property
    def values(self):
        return np.concatenate([p.values for p in self.parts])

    def nodes_weights(self):
        ks, ws = zip(*(p.nodes_weights() for p in self.parts))
        return np.concatenate(ks), np.concatenate(ws)

    def uk(self, k):
        k = np.asarray(k, dtype=float)
        out = np.zeros(k.shape, dtype=np.result_type(*(p.values for p in self.parts)))
        bounds = [p.k_range() for p in self.parts]
        # each query goes to the piece whose range is nearest
        for i, p in enumerate(self.parts):
            lo = bounds[i][0] if i else -np.inf
            hi = bounds[i + 1][0] if i + 1 < len(self.parts) else np.inf
            mask = (k >= lo) & (k < hi)
            if mask.any():
                kk = np.clip(k[mask], *p.k_range())
                out[mask] = p.interp(kk)
        out = np.where((k < bounds[0][0]) | (k > bounds[-1][1] * (1 + 1e-12)), 0.0, out)
        return out if out.ndim else out[()]

    def k_range(self):
        return self.parts[0].k_range()[0], self.parts[-1].k_range()[1]

    def native_width(self):
        return max(p.native_width() for p in self.parts)


def to_energy_rho(cfg, f, quad=None, method="auto") -> EnergyFunction:
    """f~(E) = int f(r) chi(r; E) dr = fhat(E) / sqrt(rho(E))."""
    return to_energy(cfg, f, quad, method).as_rho_normalized()


def to_position(cfg: BarrierConfig, fhat: EnergyFunction, quad: QuadratureSpec | None = None,
                decay_hint: float | None = None) -> Synthesized:
    """f(r) = int fhat(E) sigma(r; E) dE, evaluated lazily at requested radii."""
    quad = quad or QuadratureSpec()
    if decay_hint is None and quad.r_cutoff is not None:
        decay_hint = quad.r_cutoff
    return Synthesized(cfg, fhat, quad, decay_hint)


def energy_representation(cfg, f: RadialFunction, quad: QuadratureSpec | None = None) -> EnergyFunction:
    """Cached transform when the function carries one, else :func:`to_energy`."""
    if f.cached_transform is not None:
        return f.cached_transform
    return to_energy(cfg, f, quad)


# ---------------------------------------------------------------- energy integrals

def _finite_energy_integral(cfg, fhats, weight_power, quad, k_hi, oversample=1):
    k_lo = min(f.k_range()[0] for f in fhats)
    width = min(min(f.native_width() for f in fhats), np.pi / 2) / oversample
    breaks = set()
    for f in fhats:
        breaks.update(f.k_breaks())
        breaks.update(x for x in f.k_range() if np.isfinite(x))
    k, w = k_nodes(cfg, k_lo, k_hi, width, quad.nodes_per_panel, breaks)
    E = k ** 2 / cfg.kappa
    a = fhats[0].uk(k)
    b = a if len(fhats) == 1 or fhats[1] is fhats[0] else fhats[1].uk(k)
    return complex(np.sum(w * E ** weight_power * np.conj(a) * b))


def energy_inner(cfg: BarrierConfig, fhat: EnergyFunction, ghat: EnergyFunction, n: int = 0,
                 quad: QuadratureSpec | None = None):
    """int E^n conj(fhat) ghat dE; returns (value, error_estimate)."""
    quad = quad or QuadratureSpec()
    his = [f.k_range()[1] for f in (fhat, ghat)]
    if all(np.isfinite(h) for h in his):
        val = _finite_energy_integral(cfg, [fhat, ghat], n, quad, min(his))
        fine = _finite_energy_integral(cfg, [fhat, ghat], n, quad, min(his), oversample=2)
        return val, abs(fine - val)
    if any(np.isfinite(h) for h in his):
        return _finite_energy_integral(cfg, [fhat, ghat], n, quad, min(his)), 0.0
    # both unbounded: partial integrals on doubling cutoffs, Aitken-accelerated
    K = 64.0
    partial = []
    prev_total = 0.0
    k_prev = min(f.k_range()[0] for f in (fhat, ghat))
    estimates = []
    while K <= 2 ** 17:
        width = min(fhat.native_width(), ghat.native_width(), np.pi / 2)
        k, w = k_nodes(cfg, k_prev, K, width, quad.nodes_per_panel,
                       set(fhat.k_breaks()) | set(ghat.k_breaks()))
        E = k ** 2 / cfg.kappa
        a = fhat.uk(k)
        b = a if ghat is fhat else ghat.uk(k)
        prev_total += complex(np.sum(w * E ** n * np.conj(a) * b))
        partial.append(prev_total)
        k_prev = K
        K *= 2
        if len(partial) >= 3:
            s0, s1, s2 = partial[-3:]
            den = s2 - 2 * s1 + s0
            acc = s2 if abs(den) < 1e-300 else s2 - (s2 - s1) ** 2 / den
            estimates.append(acc)
            if len(estimates) >= 2:
                err = abs(estimates[-1] - estimates[-2])
                if err <= quad.tol * max(abs(acc), 1e-300) or abs(s2 - s1) <= 1e-15 * abs(s2):
                    return acc, err
    raise CutoffTooSmall("energy integral tail did not settle", abs(estimates[-1] - estimates[-2]))


@dataclass(frozen=True)
class ParsevalResult:
    lhs: complex
    rhs: complex
    residual: float


def parseval(cfg: BarrierConfig, phi: RadialFunction, psi: RadialFunction,
             quad: QuadratureSpec | None = None) -> ParsevalResult:
    """(phi, psi) on the position side against int conj(phihat) psihat dE."""
    quad = quad or QuadratureSpec()
    lhs = position_inner(cfg, phi, psi, quad)
    rhs, _ = energy_inner(cfg, energy_representation(cfg, phi, quad),
                          energy_representation(cfg, psi, quad), 0, quad)
    scale = max(abs(lhs), 1e-300)
    return ParsevalResult(lhs, rhs, abs(lhs - rhs) / scale if abs(lhs) > 1e-14 else abs(lhs - rhs))


def matrix_element_hn(cfg: BarrierConfig, phi, psi, n: int, quad: QuadratureSpec | None = None) -> complex:
    """(phi, H^n psi) = int E^n conj(phihat) psihat dE."""
    if n < 0:
        raise DomainError("n must be non-negative")
    quad = quad or QuadratureSpec()
    val, _ = energy_inner(cfg, energy_representation(cfg, phi, quad),
                          energy_representation(cfg, psi, quad), n, quad)
    return val


@dataclass(frozen=True)
class Dispersion:
    mean: float
    disp: float
    delta: float


def dispersion(cfg: BarrierConfig, phi: RadialFunction, quad: QuadratureSpec | None = None) -> Dispersion:
    quad = quad or QuadratureSpec()
    norm = position_norm(cfg, phi, quad)
    if abs(norm - 1) > 1e-8:
        raise NormalizationError(f"state norm is {norm!r}, expected 1")
    fhat = energy_representation(cfg, phi, quad)
    mean = energy_inner(cfg, fhat, fhat, 1, quad)[0].real
    second = energy_inner(cfg, fhat, fhat, 2, quad)[0].real
    disp = second - mean ** 2
    if disp < -1e-10 * max(1.0, second):
        raise QuadratureFailure(f"negative dispersion {disp:.3g}", abs(disp))
    disp = max(disp, 0.0)
    return Dispersion(mean, disp, float(np.sqrt(disp)))


def evolve(cfg: BarrierConfig, phi: RadialFunction, t: float, quad: QuadratureSpec | None = None,
           fhat: EnergyFunction | None = None) -> Synthesized:
    """phi(r, t) = int exp(-i E t / hbar) phihat(E) sigma(r; E) dE (lazy samples)."""
    quad = quad or QuadratureSpec()
    if fhat is None:
        fhat = energy_representation(cfg, phi, quad)
    lo, hi = fhat.k_range()
    if not np.isfinite(hi):
        raise QuadratureFailure("evolution needs an energy profile with bounded support", np.inf)
    moved = fhat.evolved(t, cfg.hbar)
    base_r = phi.decay_hint
    spread = 2 * hi * abs(t) / (cfg.kappa * cfg.hbar)
    out = Synthesized(cfg, moved, quad, decay_hint=float(base_r + 1.2 * spread))
    # oscillation budget: nodes needed in k times nodes needed in r
    k_count = (hi - lo) * (out.decay_hint + moved.phase_rate()) / quad.integration_phase * quad.nodes_per_panel
    r_count = out.decay_hint * hi / quad.integration_phase * quad.nodes_per_panel
    if k_count * r_count > quad.max_work:
        raise QuadratureFailure(
            f"evolution to t={t} exceeds the oscillation budget ({k_count:.3g} x {r_count:.3g} nodes)",
            k_count * r_count)
    return out


def diagonalization_residual(cfg: BarrierConfig, f: RadialFunction, quad: QuadratureSpec | None = None) -> float:
    """||U(h f) - E U f|| / ||E U f|| on the E-grid of U f.

    Both transforms are computed independently (closed form for exponential
    polynomials, quadrature otherwise); h f comes from analytic derivatives or,
    for synthesized functions, from the profile multiplied by E.
    """
    quad = quad or QuadratureSpec()
    hf = f.apply_h(cfg)
    fhat = to_energy(cfg, f, quad)
    hfhat = to_energy(cfg, hf, quad.replace(e_cutoff=fhat.energy_cutoff()) if
                      isinstance(fhat, KGridEnergy) else quad)
    if isinstance(fhat, KGridEnergy):
        k, w = fhat.nodes_weights()
    else:
        k, w = k_nodes(cfg, fhat.k_range()[0], 200.0, fhat.native_width(), quad.nodes_per_panel,
                       fhat.k_breaks())
    E = k ** 2 / cfg.kappa
    a = hfhat.uk(k)
    b = E * fhat.uk(k)
    den = np.sqrt(np.sum(w * np.abs(b) ** 2))
    if den == 0:
        return 0.0
    return float(np.sqrt(np.sum(w * np.abs(a - b) ** 2)) / den)


def delta_normalization_check(cfg: BarrierConfig, phi, psi, quad: QuadratureSpec | None = None,
                              rho_normalized: bool = False) -> float:
    """(phi, psi) directly versus after re-synthesis from the energy profiles.

    With ``rho_normalized`` the profiles are f~ = fhat / sqrt(rho) and the
    synthesis uses chi with the measure rho dE, which is the same integral
    after a change of variables.
    """
    quad = quad or QuadratureSpec()
    direct = position_inner(cfg, phi, psi, quad)
    fhat = to_energy(cfg, phi, quad, method="quadrature")
    ghat = fhat if psi is phi else to_energy(cfg, psi, quad, method="quadrature")
    if rho_normalized:
        fhat, ghat = fhat.as_rho_normalized(), ghat.as_rho_normalized()
        phi_s = _RhoSynthesized(cfg, fhat, quad, phi.decay_hint)
        psi_s = phi_s if psi is phi else _RhoSynthesized(cfg, ghat, quad, psi.decay_hint)
    else:
        phi_s = Synthesized(cfg, fhat, quad, phi.decay_hint)
        psi_s = phi_s if psi is phi else Synthesized(cfg, ghat, quad, psi.decay_hint)
    lo = min(phi.support()[0], psi.support()[0])
    hi = max(phi.support()[1], psi.support()[1])
    r, w = r_grid(cfg, [phi_s, psi_s], quad.replace(r_cutoff=hi),
                  k_max=max(fhat.k_range()[1], ghat.k_range()[1]))
    r_mask = r >= lo
    a = phi_s(r[r_mask])
    b = a if psi_s is phi_s else psi_s(r[r_mask])
    resynth = complex(np.sum(w[r_mask] * np.conj(a) * b))
    scale = max(abs(direct), 1e-300)
    return abs(direct - resynth) / scale if abs(direct) > 1e-14 else abs(direct - resynth)


class _RhoSynthesized(Synthesized):
    """f(r) = int f~(E) chi(r; E) rho(E) dE, evaluated on an explicit E-grid."""

    def derivative(self, r, order, oversample: int = 1):
        cfg, f = self.cfg, self.fhat
        r = np.asarray(r, dtype=float)
        lo, hi = f.k_range()
        width = min(self.quad.integration_phase / max(float(np.max(r)), 1.0), f.native_width())
        k, w = k_nodes(cfg, lo, hi, width, self.quad.nodes_per_panel, f.k_breaks())
        E = k ** 2 / cfg.kappa
        ftilde = f(E)                                     # fhat / sqrt(rho)
        rho = rho_values(cfg, E)
        dE = 2 * k / cfg.kappa
        from .eigen import Family, eval_eigenfunction
        out = np.zeros(r.shape, dtype=complex)
        step = max(1, 2_000_000 // max(r.size, 1))
        for j in range(0, k.size, step):
            sl = slice(j, j + step)
            chi = np.real(eval_eigenfunction(cfg, Family.CHI, E[sl][None, :], r[:, None], order))
            out += chi @ (ftilde[sl] * rho[sl] * dE[sl] * w[sl])
        return out.real if np.isrealobj(ftilde) else out


@dataclass(frozen=True)
class RoundTrip:
    round_trip: float      # ||U^{-1} U f - f|| / ||f||
    isometry: float        # | ||f|| - ||U f|| | / ||f||
    norm: float


def round_trip(cfg: BarrierConfig, f: RadialFunction, quad: QuadratureSpec | None = None) -> RoundTrip:
    """Transform by r-quadrature, synthesize back, and compare on the r-grid.

    The quadrature path is forced even when ``f`` carries its own energy
    profile, so both directions are exercised.
    """
    quad = quad or QuadratureSpec()
    fhat = to_energy(cfg, f, quad, method="quadrature")
    back = Synthesized(cfg, fhat, quad, f.decay_hint)
    r, w = r_grid(cfg, [f], quad, k_max=max(fhat.k_range()[1], f.k_scale))
    fv = f(r)
    norm = float(np.sqrt(np.sum(w * np.abs(fv) ** 2)))
    diff = float(np.sqrt(np.sum(w * np.abs(back(r) - fv) ** 2)))
    k, kw = fhat.nodes_weights()
    unorm = float(np.sqrt(np.sum(kw * np.abs(fhat.uk(k)) ** 2)))
    return RoundTrip(diff / norm, abs(norm - unorm) / norm, norm)

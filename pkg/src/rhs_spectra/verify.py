"""Invariant suites behind ``rhs-spectra verify`` and the acceptance tests.

Each suite returns a list of :class:`Record`; a record passes when the
achieved value is within its tolerance (or, for inequality checks, when the
achieved margin is not positive).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad as scipy_quad

from .eigen import (VALID_REGIONS, Family, closed_form_coefficients, continuity_residual,
                    eval_eigenfunction, transfer_matrix_coefficients, wronskian)
from .functions import r_exp
from .green import green_function, resolvent_residual
from .model import BarrierConfig, Region
from .quadrature import QuadratureSpec
from .spectral import rho_integral, rho_values, sigma_delta, stone_measure
from .testspace import (boundary_terms, ket_action, ket_bound, ket_eigen_check, make_position_bump,
                        make_spectral_test_function, phi_norm, random_test_family,
                        schwartz_delta_check)
from .transform import (diagonalization_residual, energy_representation, evolve, matrix_element_hn,
                        parseval, position_inner, position_norm, r_grid, round_trip)


@dataclass(frozen=True)
class Record:
    name: str
    ref: str
    tolerance: float
    achieved: float
    passed: bool
    suite: str = ""

    def as_dict(self):
        return {"suite": self.suite, "name": self.name, "ref": self.ref, "tolerance": self.tolerance,
                "achieved": self.achieved, "pass": self.passed}


def _rec(name, ref, tol, achieved):
    achieved = float(achieved)
    return Record(name, ref, float(tol), achieved, bool(np.isfinite(achieved) and achieved <= tol))


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


# energies used to sample each region
_MAGS = np.logspace(-3, 3, 50)
REGION_SAMPLES = {
    Region.POSITIVE_REAL: _MAGS.astype(complex),
    Region.UPPER_HALF: _MAGS * np.exp(1j * np.pi / 4),
    Region.LOWER_HALF: _MAGS * np.exp(-1j * np.pi / 4),
    Region.NEGATIVE_RE: np.concatenate([-_MAGS + 0j, _MAGS * np.exp(3j * np.pi / 4)]),
}


def _region_energies(cfg, region):
    E = REGION_SAMPLES[region]
    keep = (np.abs(E) >= cfg.eps_energy) & (np.abs(E - cfg.v0) >= 1e-6 * max(1.0, cfg.v0))
    return E[keep]


# ---------------------------------------------------------------- suites

def suite_free(cfg, quad, seed):
    """Free-particle reductions (v0 = 0, kappa = 1)."""
    free = cfg.replace(v0=0.0, kappa=1.0)
    E = np.logspace(-2, 2, 30)
    co = closed_form_coefficients(free, Family.CHI, E)
    r = np.linspace(0.0, 10.0, 101)
    chi = eval_eigenfunction(free, Family.CHI, E[None, :], r[:, None])
    exact = np.sin(np.sqrt(E)[None, :] * r[:, None])
    ref = "free-particle reduction"
    return [
        _rec("free: J3 = -i/2", ref, 1e-12, _rel(co.c3, np.full(E.shape, -0.5j))),
        _rec("free: J4 = i/2", ref, 1e-12, _rel(co.c4, np.full(E.shape, 0.5j))),
        _rec("free: chi = sin(sqrt(E) r)", ref, 1e-12,
             float(np.max(np.abs(chi - exact)) / np.max(np.abs(exact)))),
        _rec("free: rho = 1/(pi sqrt(E))", ref, 1e-12, _rel(rho_values(free, E), 1 / (np.pi * np.sqrt(E)))),
    ]


def suite_coefficients(cfg, quad, seed, faulty_a2: bool = False):
    """Closed-form against transfer-matrix coefficients, and continuity at a, b."""
    out = []
    ref = "closed-form coefficients versus transfer-matrix propagation"
    worst_agree, worst_cont = 0.0, 0.0
    for fam in Family:
        for region in sorted(VALID_REGIONS[fam], key=lambda x: x.value):
            E = _region_energies(cfg, region)
            cf = closed_form_coefficients(cfg, fam, E, faulty_a2=faulty_a2)
            tm = transfer_matrix_coefficients(cfg, fam, E)
            a, b = cf.as_array(), tm.as_array()
            scale = np.max(np.abs(b), axis=-1, keepdims=True)
            agree = float(np.max(np.abs(a - b) / scale))
            cont = max(continuity_residual(cfg, fam, e, closed_form_coefficients(
                cfg, fam, e, faulty_a2=faulty_a2)) for e in E)
            worst_agree, worst_cont = max(worst_agree, agree), max(worst_cont, cont)
            out.append(_rec(f"coefficients {fam.value} {region.value}", ref, 1e-10, agree))
            out.append(_rec(f"continuity {fam.value} {region.value}", "continuity of value and slope at a and b",
                            1e-10, cont))
    return out


def suite_wronskian(cfg, quad, seed):
    """W(chi, Theta+) = 2ik J4, W(chi, Theta-) = -2ik J3, W(chi~, Theta~) = -2k~ J~3."""
    r = np.array([0.5, 1.5, 3.0])
    kap = cfg.kappa
    out = []
    cases = [
        (Family.THETA_PLUS, Region.UPPER_HALF, lambda E, k, J, Jt: 2j * k * J.c4),
        (Family.THETA_PLUS, Region.POSITIVE_REAL, lambda E, k, J, Jt: 2j * k * J.c4),
        (Family.THETA_MINUS, Region.LOWER_HALF, lambda E, k, J, Jt: -2j * k * J.c3),
        (Family.THETA_MINUS, Region.POSITIVE_REAL, lambda E, k, J, Jt: -2j * k * J.c3),
    ]
    for other, region, expect in cases:
        worst = 0.0
        for E in _region_energies(cfg, region)[::5]:
            k = np.sqrt(kap * E + 0j)
            J = closed_form_coefficients(cfg, Family.CHI, E)
            w = wronskian(cfg, Family.CHI, other, E, r)
            worst = max(worst, _rel(w, np.full(3, expect(E, k, J, None))))
        out.append(_rec(f"W(chi, {other.value}) {region.value}", "Wronskian of the regular and outgoing solutions",
                        1e-10, worst))
    worst = 0.0
    for E in _region_energies(cfg, Region.NEGATIVE_RE)[::5]:
        kt = np.sqrt(-kap * E + 0j)
        Jt = closed_form_coefficients(cfg, Family.CHI_TILDE, E)
        w = wronskian(cfg, Family.CHI_TILDE, Family.THETA_TILDE, E, r)
        worst = max(worst, _rel(w, np.full(3, -2 * kt * Jt.c3)))
    out.append(_rec("W(chi~, Theta~) NegativeRe", "Wronskian of the regular and outgoing solutions", 1e-10, worst))
    return out


def suite_green(cfg, quad, seed):
    """Resolvent identity, kernel symmetry, conjugation and analyticity."""
    ref = "resolvent (E - H)^{-1} as an integral operator"
    out = []
    bumps = [make_position_bump(cfg, cfg.b + 2.0, 1.0),
             make_position_bump(cfg, 0.5 * cfg.a, 0.3 * cfg.a)]
    for f in bumps:
        lo, hi = f.support()
        probes = np.linspace(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo), 10)
        for E in (-1.0, -2.0, 2 + 1j, 2 - 1j):
            res = resolvent_residual(cfg, f, E, probes, quad)
            out.append(_rec(f"(E-h)(E-H)^-1 f = f, bump at {f.center:g}, E={E}", ref, 1e-6, res))
    pts = [(0.5, 2.5), (1.2, 0.7), (3.0, 1.5)]
    energies = (-1.0, -2 + 0.5j, 2 + 1j, 2 - 1j, 0.5 + 0.1j)
    sym = max(abs(green_function(cfg, r, s, E) - green_function(cfg, s, r, E)) for r, s in pts for E in energies)
    out.append(_rec("G(r,s) = G(s,r)", ref, 0.0, sym))
    conj = max(abs(green_function(cfg, r, s, np.conj(E)) - np.conj(green_function(cfg, r, s, E)))
               / abs(green_function(cfg, r, s, E)) for r, s in pts for E in energies if np.imag(E) != 0)
    out.append(_rec("G(conj E) = conj G(E)", ref, 1e-10, conj))
    cr = 0.0
    h = 1e-5
    for r, s in pts:
        for E in (-2 + 0.5j, 2 + 1j, 2 - 1j):
            dx = (green_function(cfg, r, s, E + h) - green_function(cfg, r, s, E - h)) / (2 * h)
            dy = (green_function(cfg, r, s, E + 1j * h) - green_function(cfg, r, s, E - 1j * h)) / (2 * h)
            cr = max(cr, abs(dy - 1j * dx) / max(abs(dx), 1e-300))
    out.append(_rec("Cauchy-Riemann residual of E -> G", ref, 1e-5, cr))
    return out


def suite_stone(cfg, quad, seed):
    ref = "spectral measure from the jump of the resolvent"
    E1, E2 = 1.0, 2.0
    st = stone_measure(cfg, E1, E2)
    exact = rho_integral(cfg, E1, E2)
    return [
        _rec("stone rho11 versus integral of rho", ref, 1e-4, abs(st.rho11 - exact) / exact),
        _rec("stone rho12", ref, 1e-6, abs(st.rho12)),
        _rec("stone rho21", ref, 1e-6, abs(st.rho21)),
        _rec("stone rho22", ref, 1e-6, abs(st.rho22)),
    ]


def suite_conjugate(cfg, quad, seed):
    E = np.logspace(-2.5, 2.5, 50)
    E = E[np.abs(E - cfg.v0) > 1e-6]
    co = closed_form_coefficients(cfg, Family.CHI, E)
    r = np.linspace(0.0, 3 * cfg.b, 61)
    chi = eval_eigenfunction(cfg, Family.CHI, E[None, :], r[:, None])
    imag = float(np.max(np.abs(np.imag(chi)) / np.maximum(1.0, np.abs(chi))))
    ref = "real eigenfunctions on the continuous spectrum"
    return [_rec("J3 = conj(J4)", ref, 1e-10, _rel(co.c3, np.conj(co.c4))),
            _rec("Im chi", ref, 1e-12, imag)]


def _family(cfg, seed, count=10):
    return random_test_family(cfg, np.random.default_rng(seed), count)


def suite_unitarity(cfg, quad, seed):
    ref = "generalized Fourier transform is an isometric isomorphism"
    rt, iso = 0.0, 0.0
    for f in _family(cfg, seed):
        res = round_trip(cfg, f, quad)
        rt, iso = max(rt, res.round_trip), max(iso, res.isometry)
    return [_rec("round trip ||U^-1 U f - f|| / ||f||", ref, 1e-5, rt),
            _rec("isometry | ||f|| - ||U f|| | / ||f||", ref, 1e-5, iso)]


def suite_diagonalization(cfg, quad, seed):
    worst = max(diagonalization_residual(cfg, f, quad) for f in _family(cfg, seed))
    return [_rec("||U(hf) - E Uf|| / ||E Uf||", "H acts as multiplication by E", 1e-5, worst)]


def suite_nst(cfg, quad, seed):
    ref = "(phi, psi) as an integral over kets"
    fam = _family(cfg, seed)
    pars, mel = 0.0, 0.0
    for i in range(0, len(fam), 2):
        phi, psi = fam[i], fam[(i + 3) % len(fam)]
        pars = max(pars, parseval(cfg, phi, psi, quad).residual)
        for n in (1, 2):
            direct = position_inner(cfg, phi, psi.apply_h(cfg, n), quad)
            energy = matrix_element_hn(cfg, phi, psi, n, quad)
            mel = max(mel, abs(direct - energy) / max(abs(direct), 1e-12))
    free = cfg.replace(v0=0.0, kappa=1.0)
    f = r_exp()
    pos_ff = position_inner(free, f, f, quad).real
    pos_fh = position_inner(free, f, f.apply_h(free), quad).real
    en_ff = matrix_element_hn(free, f, f, 0, quad).real
    en_fh = matrix_element_hn(free, f, f, 1, quad).real
    return [
        _rec("Parseval residual", ref, 1e-5, pars),
        _rec("matrix element (phi, h^n psi), n = 1, 2", ref, 1e-5, mel),
        _rec("free r e^-r: (f, f) position side", ref, 1e-12, abs(pos_ff - 0.25)),
        _rec("free r e^-r: (f, hf) position side", ref, 1e-12, abs(pos_fh - 0.25)),
        _rec("free r e^-r: (f, f) energy side", ref, 1e-6, abs(en_ff - 0.25)),
        _rec("free r e^-r: (f, hf) energy side", ref, 1e-6, abs(en_fh - 0.25)),
    ]


def _ket_energies(cfg, rng, count):
    E = rng.uniform(0.05, 8.0, 4 * count)
    E = E[np.abs(E - cfg.v0) > 0.02]
    return E[:count]


def suite_kets(cfg, quad, seed):
    ref = "kets as generalized eigenvectors and the delta functional"
    rng = np.random.default_rng(seed + 1)
    fam = _family(cfg, seed)
    eig = 0.0
    for f in fam:
        for E in _ket_energies(cfg, rng, 2):
            for n in (1, 2, 3):
                eig = max(eig, ket_eigen_check(cfg, f, E, n, quad))
    # continuity bound over 50 random (phi, E): margin = lhs - rhs must be negative
    norms = {id(f): phi_norm(cfg, f, 1, 0, quad) for f in fam}
    margin = -np.inf
    for _ in range(50):
        f = fam[rng.integers(len(fam))]
        E = _ket_energies(cfg, rng, 1)[0]
        lhs = abs(ket_action(cfg, f, E, quad))
        rhs = ket_bound(cfg, E) * norms[id(f)]
        margin = max(margin, (lhs - rhs) / rhs)
    schw = 0.0
    for f in fam:
        fhat = energy_representation(cfg, f, quad)
        for E in _ket_energies(cfg, rng, 3):
            schw = max(schw, schwartz_delta_check(cfg, f, E, quad, fhat=fhat))
    bt = 0.0
    for f in fam:
        if f.kind == "PositionBump":
            bt = max(bt, *boundary_terms(cfg, f, 2.5))
    return [
        _rec("<h^n phi|E> = E^n <phi|E>, n <= 3", ref, 1e-7, eig),
        Record("|<phi|E>| < M(E) ||phi||_{1,0} (max relative margin)", ref, 0.0, float(margin),
               bool(margin < 0)),
        _rec("Schwartz delta residual", ref, 1e-8, schw),
        _rec("surface terms for bumps", ref, 1e-12, bt),
    ]


def suite_norms(cfg, quad, seed):
    ref = "the family of norms ||.||_{n,m}"
    rng = np.random.default_rng(seed + 2)
    fam = _family(cfg, seed)
    hom = 0.0
    for f in fam[:4]:
        alpha = complex(*rng.normal(size=2))
        n, m = (int(x) for x in rng.integers(0, 3, 2))
        base = phi_norm(cfg, f, n, m, quad)
        hom = max(hom, abs(phi_norm(cfg, alpha * f, n, m, quad) - abs(alpha) * base) / (abs(alpha) * base))
    cache = {}

    def norm(f, n, m):
        key = (id(f), n, m)
        if key not in cache:
            cache[key] = phi_norm(cfg, f, n, m, quad)
        return cache[key]

    tri = -np.inf
    for _ in range(100):
        i, j = rng.choice(len(fam), 2, replace=False)
        n, m = (int(x) for x in rng.integers(0, 3, 2))
        key = (min(i, j), max(i, j), n, m)
        if key not in cache:
            cache[key] = phi_norm(cfg, fam[key[0]] + fam[key[1]], n, m, quad)
        lhs = cache[key]
        rhs = norm(fam[i], n, m) + norm(fam[j], n, m)
        tri = max(tri, (lhs - rhs) / rhs)
    hb = -np.inf
    for f in fam[:2]:
        hf = f.apply_h(cfg)
        for n in range(3):
            for m in range(3):
                lhs = phi_norm(cfg, hf, n, m, quad)
                rhs = norm(f, n, m + 1) + norm(f, n, m)
                hb = max(hb, (lhs - rhs) / rhs)
    return [
        _rec("homogeneity ||a phi|| = |a| ||phi||", ref, 1e-13, hom),
        Record("triangle inequality over 100 pairs (max relative margin)", ref, 0.0, float(tri), bool(tri <= 0)),
        Record("||H phi||_{n,m} <= ||phi||_{n,m+1} + ||phi||_{n,m} (max relative margin)", ref, 0.0,
               float(hb), bool(hb <= 0)),
    ]


def suite_evolution(cfg, quad, seed):
    ref = "time evolution through the energy representation"
    lo = cfg.v0 + 0.5 if cfg.v0 > 0 else 0.5
    phi = make_spectral_test_function(cfg, lo, lo + 4.0, (1.0, 0.3, -0.2))
    n0 = position_norm(cfg, phi, quad)
    cons = 0.0
    for t in (0.5, 1.0, 2.0):
        cons = max(cons, abs(position_norm(cfg, evolve(cfg, phi, t, quad), quad) - n0) / n0)
    p0 = evolve(cfg, phi, 0.0, quad)
    r, w = r_grid(cfg, [phi], quad)
    fv = phi(r)
    ident = float(np.sqrt(np.sum(w * np.abs(p0(r) - fv) ** 2) / np.sum(w * np.abs(fv) ** 2)))
    # oracle: adaptive quadrature in E at a few radii
    t = 1.0
    g = phi.profile
    rs = np.array([0.5, 1.5, 3.0, 7.0])
    vals = evolve(cfg, phi, t, quad)(rs)
    orc = []
    for rr in rs:
        def integrand(E, part):
            v = np.exp(-1j * E * t / cfg.hbar) * g(E) * sigma_delta(cfg, E, np.array([rr]))[0]
            return v.real if part == 0 else v.imag
        re = scipy_quad(integrand, g.e_lo, g.e_hi, args=(0,), epsabs=1e-13, limit=400)[0]
        im = scipy_quad(integrand, g.e_lo, g.e_hi, args=(1,), epsabs=1e-13, limit=400)[0]
        orc.append(re + 1j * im)
    orc = np.array(orc)
    oracle = float(np.max(np.abs(vals - orc)) / np.max(np.abs(orc)))
    return [
        _rec("norm conservation t in {0.5, 1, 2}", ref, 1e-6, cons),
        _rec("t = 0 identity", ref, 1e-5, ident),
        _rec("adaptive-quadrature oracle at t = 1", ref, 1e-5, oracle),
    ]


SUITES = {
    "free": suite_free,
    "coefficients": suite_coefficients,
    "wronskian": suite_wronskian,
    "green": suite_green,
    "stone": suite_stone,
    "conjugate": suite_conjugate,
    "unitarity": suite_unitarity,
    "diagonalization": suite_diagonalization,
    "nst": suite_nst,
    "kets": suite_kets,
    "norms": suite_norms,
    "evolution": suite_evolution,
}


@dataclass
class VerifyReport:
    records: list
    timings: dict

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def as_dict(self):
        return {"pass": self.passed, "records": [r.as_dict() for r in self.records],
                "timings": self.timings}


def run_suites(cfg: BarrierConfig, quad: QuadratureSpec | None = None, seed: int = 0,
               names=None, faulty_a2: bool = False, clock=time.perf_counter) -> VerifyReport:
    """Run the named suites (all by default) and collect their records.

    A suite that raises contributes one failing record carrying the error.
    """
    quad = quad or QuadratureSpec()
    records, timings = [], {}
    for name in names or SUITES:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}")
        start = clock()
        try:
            if name == "coefficients":
                recs = SUITES[name](cfg, quad, seed, faulty_a2=faulty_a2)
            else:
                recs = SUITES[name](cfg, quad, seed)
        except Exception as exc:  # a crashing suite is a failing suite
            recs = [Record(f"{name}: {type(exc).__name__}: {exc}", name, 0.0, float("inf"), False)]
        records.extend(replace(r, suite=name) for r in recs)
        timings[name] = clock() - start
    return VerifyReport(records, timings)

"""Eigenfunction families of h and their matching coefficients.

Every family is piecewise a combination of two exponentials per region::

    f(r) = c_plus * exp(lam_j r) + c_minus * exp(-lam_j r),   region j = 1, 2, 3

with ``lam = (ik, iQ, ik)`` for the oscillatory families and
``lam = (k~, Q~, k~)`` for the tilde families.  One region carries fixed seed
amplitudes; the other four coefficients come either from the closed forms
below or from :func:`transfer_matrix_coefficients`, which solves the two
continuity systems numerically and serves as an independent check.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEnergy, DomainError, IncompatibleRegion
from .model import BarrierConfig, Region, wavenumbers


class Family(enum.Enum):
    CHI = "Chi"
    THETA_PLUS = "ThetaPlus"
    THETA_MINUS = "ThetaMinus"
    CHI_TILDE = "ChiTilde"
    THETA_TILDE = "ThetaTilde"
    SIGMA1_TILDE = "Sigma1Tilde"
    SIGMA2 = "Sigma2"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        for fam in cls:
            if name in (fam.value, fam.name, fam.value.lower(), fam.name.lower()):
                return fam
        raise ValueError(f"unknown eigenfunction family {name!r}")


_UHP, _LHP, _POS, _NEG = Region.UPPER_HALF, Region.LOWER_HALF, Region.POSITIVE_REAL, Region.NEGATIVE_RE

VALID_REGIONS = {
    Family.CHI: {_UHP, _LHP, _POS},
    Family.THETA_PLUS: {_UHP, _POS},
    Family.THETA_MINUS: {_LHP, _POS},
    Family.SIGMA2: {_UHP, _LHP, _POS},
    Family.CHI_TILDE: {_NEG},
    Family.THETA_TILDE: {_NEG},
    Family.SIGMA1_TILDE: {_NEG},
}

TILDE = {Family.CHI_TILDE, Family.THETA_TILDE, Family.SIGMA1_TILDE}

# region holding the fixed seed amplitudes
ANCHOR = {
    Family.CHI: 1, Family.SIGMA2: 1, Family.CHI_TILDE: 1,
    Family.THETA_PLUS: 3, Family.THETA_MINUS: 3, Family.THETA_TILDE: 3,
    Family.SIGMA1_TILDE: 3,
}


@dataclass(frozen=True)
class RegionCoefficients:
    """The four non-seed coefficients of one family (arrays broadcast like E).

    For region-1 anchored families ``c1, c2`` multiply the region-2
    exponentials and ``c3, c4`` the region-3 ones (J, C, J~); for region-3
    anchored families ``c1, c2`` belong to region 1 and ``c3, c4`` to region 2
    (A+, A-, A~, B~).
    """

    family: Family
    c1: complex
    c2: complex
    c3: complex
    c4: complex

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.c1, self.c2, self.c3, self.c4), axis=-1)


@dataclass(frozen=True)
class Pieces:
    rates: tuple      # (lam1, lam2, lam3)
    plus: tuple       # coefficient of exp(+lam r) per region
    minus: tuple      # coefficient of exp(-lam r) per region


def _regions(E):
    """Vectorized region classification (same rules as model.classify)."""
    re, im = E.real, E.imag
    out = np.full(E.shape, None, dtype=object)
    out[re < 0] = Region.NEGATIVE_RE
    rest = re >= 0
    out[rest & (im > 0)] = Region.UPPER_HALF
    out[rest & (im < 0)] = Region.LOWER_HALF
    out[(re > 0) & (im == 0)] = Region.POSITIVE_REAL
    return out


def _check_family(cfg, family, E):
    family = Family.parse(family)
    E = np.asarray(E, dtype=complex) + 0.0j
    regions = _regions(np.atleast_1d(E))
    if np.any(regions == None):  # noqa: E711 - object array comparison
        raise DegenerateEnergy(0j, 0.0, cfg.eps_energy)
    allowed = VALID_REGIONS[family]
    for reg in set(regions.ravel()):
        if reg not in allowed:
            bad = np.atleast_1d(E)[regions == reg].flat[0]
            raise IncompatibleRegion(
                f"family {family.value} is not defined for E={complex(bad)} ({reg.value})")
    return family, E


def _seed(family, shape):
    one = np.ones(shape, dtype=complex)
    zero = np.zeros(shape, dtype=complex)
    return {
        Family.CHI: (one / 2j, -one / 2j),
        Family.SIGMA2: (one / 2, one / 2),
        Family.CHI_TILDE: (one, -one),
        Family.THETA_PLUS: (one, zero),
        Family.THETA_MINUS: (zero, one),
        Family.THETA_TILDE: (zero, one),
        Family.SIGMA1_TILDE: (one, zero),
    }[family]


def _rates(cfg, family, E):
    w = wavenumbers(cfg, E)
    if family in TILDE:
        return w.k_tilde, w.q_tilde, w.k_tilde
    return 1j * w.k, 1j * w.q, 1j * w.k


def closed_form_coefficients(cfg: BarrierConfig, family, E, *, faulty_a2: bool = False
                             ) -> RegionCoefficients:
    """Closed-form matching coefficients of ``family`` at energy ``E``.

    The nested structure (region-3 amplitudes built from region-2 ones, or
    region-1 from region-2) is kept as written.  ``faulty_a2=True`` swaps in
    the exponent ``exp(-sqrt(-Q~) a)`` for A~2, a form that breaks
    continuity; it exists only to exercise the regression guard.
    """
    family, E = _check_family(cfg, family, E)
    w = wavenumbers(cfg, E)
    a, b = cfg.a, cfg.b
    exp = np.exp

    if family is Family.CHI:
        k, Q = w.k, w.q
        J1 = 0.5 * exp(-1j * Q * a) * (np.sin(k * a) + k / (1j * Q) * np.cos(k * a))
        J2 = 0.5 * exp(1j * Q * a) * (np.sin(k * a) - k / (1j * Q) * np.cos(k * a))
        J3 = 0.5 * exp(-1j * k * b) * ((1 + Q / k) * exp(1j * Q * b) * J1
                                       + (1 - Q / k) * exp(-1j * Q * b) * J2)
        J4 = 0.5 * exp(1j * k * b) * ((1 - Q / k) * exp(1j * Q * b) * J1
                                      + (1 + Q / k) * exp(-1j * Q * b) * J2)
        return RegionCoefficients(family, J1, J2, J3, J4)

    if family is Family.SIGMA2:
        k, Q = w.k, w.q
        C1 = 0.5 * exp(-1j * Q * a) * (np.cos(k * a) - k / (1j * Q) * np.sin(k * a))
        C2 = 0.5 * exp(1j * Q * a) * (np.cos(k * a) + k / (1j * Q) * np.sin(k * a))
        C3 = 0.5 * exp(-1j * k * b) * ((1 + Q / k) * exp(1j * Q * b) * C1
                                       + (1 - Q / k) * exp(-1j * Q * b) * C2)
        C4 = 0.5 * exp(1j * k * b) * ((1 - Q / k) * exp(1j * Q * b) * C1
                                      + (1 + Q / k) * exp(-1j * Q * b) * C2)
        return RegionCoefficients(family, C1, C2, C3, C4)

    if family in (Family.THETA_PLUS, Family.THETA_MINUS):
        k, Q = w.k, w.q
        if family is Family.THETA_PLUS:
            A3 = 0.5 * exp(-1j * Q * b) * (1 + k / Q) * exp(1j * k * b)
            A4 = 0.5 * exp(1j * Q * b) * (1 - k / Q) * exp(1j * k * b)
        else:
            A3 = 0.5 * exp(-1j * Q * b) * (1 - k / Q) * exp(-1j * k * b)
            A4 = 0.5 * exp(1j * Q * b) * (1 + k / Q) * exp(-1j * k * b)
        A1 = 0.5 * exp(-1j * k * a) * ((1 + Q / k) * exp(1j * Q * a) * A3
                                       + (1 - Q / k) * exp(-1j * Q * a) * A4)
        A2 = 0.5 * exp(1j * k * a) * ((1 - Q / k) * exp(1j * Q * a) * A3
                                      + (1 + Q / k) * exp(-1j * Q * a) * A4)
        return RegionCoefficients(family, A1, A2, A3, A4)

    kt, Qt = w.k_tilde, w.q_tilde

    if family is Family.CHI_TILDE:
        J1 = 0.5 * exp(-Qt * a) * ((1 + kt / Qt) * exp(kt * a) + (-1 + kt / Qt) * exp(-kt * a))
        J2 = 0.5 * exp(Qt * a) * ((1 - kt / Qt) * exp(kt * a) + (-1 - kt / Qt) * exp(-kt * a))
        J3 = 0.5 * exp(-kt * b) * ((1 + Qt / kt) * exp(Qt * b) * J1
                                   + (1 - Qt / kt) * exp(-Qt * b) * J2)
        J4 = 0.5 * exp(kt * b) * ((1 - Qt / kt) * exp(Qt * b) * J1
                                  + (1 + Qt / kt) * exp(-Qt * b) * J2)
        return RegionCoefficients(family, J1, J2, J3, J4)

    if family is Family.THETA_TILDE:
        A3 = 0.5 * exp(-Qt * b) * (1 - kt / Qt) * exp(-kt * b)
        A4 = 0.5 * exp(Qt * b) * (1 + kt / Qt) * exp(-kt * b)
        A1 = 0.5 * exp(-kt * a) * ((1 + Qt / kt) * exp(Qt * a) * A3
                                   + (1 - Qt / kt) * exp(-Qt * a) * A4)
        a2_exp = exp(-np.sqrt(-Qt) * a) if faulty_a2 else exp(-Qt * a)
        A2 = 0.5 * exp(kt * a) * ((1 - Qt / kt) * exp(Qt * a) * A3
                                  + (1 + Qt / kt) * a2_exp * A4)
        return RegionCoefficients(family, A1, A2, A3, A4)

    # SIGMA1_TILDE
    B3 = 0.5 * exp(-Qt * b) * (1 + kt / Qt) * exp(kt * b)
    B4 = 0.5 * exp(Qt * b) * (1 - kt / Qt) * exp(kt * b)
    B1 = 0.5 * exp(-kt * a) * ((1 + Qt / kt) * exp(Qt * a) * B3
                               + (1 - Qt / kt) * exp(-Qt * a) * B4)
    B2 = 0.5 * exp(kt * a) * ((1 - Qt / kt) * exp(Qt * a) * B3
                              + (1 + Qt / kt) * exp(-Qt * a) * B4)
    return RegionCoefficients(family, B1, B2, B3, B4)


def _match_matrix(lam, x):
    ep, em = np.exp(lam * x), np.exp(-lam * x)
    return np.stack([np.stack([ep, em], -1), np.stack([lam * ep, -lam * em], -1)], -2)


def transfer_matrix_coefficients(cfg: BarrierConfig, family, E) -> RegionCoefficients:
    """Coefficients from solving the value/derivative continuity systems at a and b.

    Starts from the family's seed amplitudes and propagates across the two
    interfaces with ``numpy.linalg.solve``; shares nothing with the closed forms
    beyond the seed and the wavenumbers.
    """
    family, E = _check_family(cfg, family, E)
    lams = [np.asarray(x, dtype=complex) for x in _rates(cfg, family, E)]
    shape = E.shape
    seed = np.stack(_seed(family, shape), axis=-1)[..., None]

    def hop(c, lam_from, lam_to, x):
        rhs = _match_matrix(lam_from, x) @ c
        M = _match_matrix(lam_to, x)
        det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
        if np.any(np.abs(det) == 0):
            raise DegenerateEnergy(complex(np.atleast_1d(E).flat[0]), cfg.v0, cfg.eps_energy)
        return np.linalg.solve(M, rhs)

    if ANCHOR[family] == 1:
        c2 = hop(seed, lams[0], lams[1], cfg.a)
        c3 = hop(c2, lams[1], lams[2], cfg.b)
        first, second = c2, c3
    else:
        c2 = hop(seed, lams[2], lams[1], cfg.b)
        c1 = hop(c2, lams[1], lams[0], cfg.a)
        first, second = c1, c2
    return RegionCoefficients(family, first[..., 0, 0], first[..., 1, 0],
                              second[..., 0, 0], second[..., 1, 0])


def pieces(cfg: BarrierConfig, family, E, coeffs: RegionCoefficients | None = None) -> Pieces:
    family, E = _check_family(cfg, family, E)
    if coeffs is None:
        coeffs = closed_form_coefficients(cfg, family, E)
    sp, sm = _seed(family, E.shape)
    if ANCHOR[family] == 1:
        plus = (sp, coeffs.c1, coeffs.c3)
        minus = (sm, coeffs.c2, coeffs.c4)
    else:
        plus = (coeffs.c1, coeffs.c3, sp)
        minus = (coeffs.c2, coeffs.c4, sm)
    return Pieces(_rates(cfg, family, E), plus, minus)


def eval_pieces(cfg: BarrierConfig, pc: Pieces, r, order: int = 0):
    """Evaluate the ``order``-th r-derivative; E and r broadcast together."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("eigenfunction evaluated at negative radius")
    out = None
    masks = (r <= cfg.a, (r > cfg.a) & (r <= cfg.b), r > cfg.b)
    for lam, cp, cm, mask in zip(pc.rates, pc.plus, pc.minus, masks):
        lam = np.asarray(lam)
        ep = np.exp(lam * r)
        em = np.exp(-lam * r)
        val = lam ** order * (cp * ep + (-1) ** order * cm * em)
        out = np.where(mask, val, 0.0 if out is None else out)
    return out if out.ndim else complex(out)


def eval_eigenfunction(cfg: BarrierConfig, family, E, r, order: int = 0):
    """Value (or ``order``-th r-derivative) of the family at (E, r).

    At exactly r = a or r = b the left-limit piece is used.
    """
    return eval_pieces(cfg, pieces(cfg, family, E), r, order)


def wronskian(cfg: BarrierConfig, family_a, family_b, E, r):
    """W(f, g) = f g' - f' g with analytic derivatives; r must avoid a and b."""
    r = np.asarray(r, dtype=float)
    if np.any((r == cfg.a) | (r == cfg.b)):
        raise DomainError("Wronskian sampled at a derivative jump point")
    pa, pb = pieces(cfg, family_a, E), pieces(cfg, family_b, E)
    f, df = eval_pieces(cfg, pa, r), eval_pieces(cfg, pa, r, 1)
    g, dg = eval_pieces(cfg, pb, r), eval_pieces(cfg, pb, r, 1)
    return f * dg - df * g


def continuity_residual(cfg: BarrierConfig, family, E, coeffs: RegionCoefficients | None = None):
    """Largest relative jump of value and derivative across r = a and r = b."""
    pc = pieces(cfg, family, E, coeffs)
    worst = 0.0
    for x, (i, j) in ((cfg.a, (0, 1)), (cfg.b, (1, 2))):
        for order in (0, 1):
            left = pc.rates[i] ** order * (pc.plus[i] * np.exp(pc.rates[i] * x)
                                           + (-1) ** order * pc.minus[i] * np.exp(-pc.rates[i] * x))
            right = pc.rates[j] ** order * (pc.plus[j] * np.exp(pc.rates[j] * x)
                                            + (-1) ** order * pc.minus[j] * np.exp(-pc.rates[j] * x))
            scale = np.maximum(np.abs(left), np.abs(right))
            scale = np.where(scale > 0, scale, 1.0)
            worst = max(worst, float(np.max(np.abs(left - right) / scale)))
    return worst

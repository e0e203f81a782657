"""Spectral density, delta-normalized eigenfunctions, theta-matrices and the Stone formula.

Energy integrals elsewhere are done in the wavenumber ``k = sqrt(kappa E)``;
:class:`ChiKernel` provides the k-normalized eigenfunction

    s(r, k) = sqrt(dE/dk) * sigma(r; E(k)) = chi(r; E) / (sqrt(2 pi) |J4(E)|)

which is smooth in k down to k = 0 and makes the transform pair a plain
unitary kernel on ``L2(dk)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .eigen import Family, closed_form_coefficients, eval_eigenfunction
from .errors import DomainError, ExtrapolationFailure, NonRealEigenfunction, QuadratureFailure
from .model import BarrierConfig, Region, as_energy, check_energy, classify
from .quadrature import composite_nodes, gauss_legendre, split_interval

IMAG_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDensity:
    energy: float
    rho: float


def _real_energy(cfg, E):
    E = np.asarray(E)
    if np.iscomplexobj(E):
        if np.any(np.imag(E) != 0):
            raise DomainError("spectral density needs real energies")
        E = np.real(E)
    E = E.astype(float)
    if np.any(E <= 0):
        raise DomainError("spectral density is defined for E > 0")
    check_energy(cfg, E)
    return E


def rho_values(cfg: BarrierConfig, E):
    """rho(E) = kappa / (4 pi sqrt(kappa E) |J4(E)|^2), vectorized over real E > 0."""
    E = _real_energy(cfg, E)
    J4 = closed_form_coefficients(cfg, Family.CHI, E).c4
    k = np.sqrt(cfg.kappa * E)
    return cfg.kappa / (4 * np.pi * k * np.abs(J4) ** 2)


def rho(cfg: BarrierConfig, E: float) -> SpectralDensity:
    return SpectralDensity(float(E), float(rho_values(cfg, float(E))))


def sigma_delta(cfg: BarrierConfig, E, r, order: int = 0):
    """sigma(r; E) = sqrt(rho(E)) chi(r; E); real, delta-normalized."""
    r_arr = np.asarray(r, dtype=float)
    chi = np.asarray(eval_eigenfunction(cfg, Family.CHI, _real_energy(cfg, E), r_arr, order))
    scale = np.maximum(1.0, np.abs(chi))
    if np.any(np.abs(chi.imag) > IMAG_TOL * scale):
        raise NonRealEigenfunction(f"Im chi up to {np.max(np.abs(chi.imag)):.3g} at real energy")
    out = np.sqrt(rho_values(cfg, E)) * chi.real
    return out if np.ndim(out) else float(out)


def _phase_table(c, k, block: int = 64):
    """exp(i outer(c, k)) for evenly spaced c, built from two small exp tables."""
    P = c.size
    if P < 2 * block:
        return np.exp(1j * np.outer(c, k))
    dc = (c[-1] - c[0]) / (P - 1)
    M = -(-P // block)
    coarse = np.exp(1j * np.outer(c[0] + dc * block * np.arange(M), k))
    fine = np.exp(1j * np.outer(dc * np.arange(block), k))
    return (coarse[:, None, :] * fine[None, :, :]).reshape(M * block, k.size)[:P]


class ChiKernel:
    """k-normalized eigenfunctions s(r, k) for a fixed set of wavenumbers."""

    def __init__(self, cfg: BarrierConfig, k):
        self.cfg = cfg
        self.k = np.asarray(k, dtype=float)
        E = self.k ** 2 / cfg.kappa
        co = closed_form_coefficients(cfg, Family.CHI, E)
        self.J1, self.J2, self.J3 = co.c1, co.c2, co.c3
        self.q = np.sqrt(cfg.kappa * (E - cfg.v0) + 0j)
        self.norm = 1.0 / (np.sqrt(2 * np.pi) * np.abs(co.c4))

    def block(self, r, order: int = 0, cols=slice(None)) -> np.ndarray:
        """Matrix s^(order)(r_i, k_j) for the selected columns."""
        cfg = self.cfg
        r = np.asarray(r, dtype=float)
        k = self.k[cols]
        out = np.empty((r.size, k.size))
        m1 = r <= cfg.a
        m3 = r > cfg.b
        m2 = ~(m1 | m3)
        if m1.any():
            ph = np.outer(r[m1], k) + order * np.pi / 2
            out[m1] = k ** order * np.sin(ph)
        if m2.any():
            lam = 1j * self.q[cols]
            ep = np.exp(np.outer(r[m2], lam))
            out[m2] = np.real(lam ** order * (self.J1[cols] * ep
                                              + (-1) ** order * self.J2[cols] / ep))
        if m3.any():
            lam = 1j * k
            out[m3] = 2 * np.real(lam ** order * self.J3[cols] * np.exp(np.outer(r[m3], lam)))
        return out * self.norm[cols]

    def _chunks(self, nr):
        step = max(1, 4_000_000 // max(nr, 1))
        for j in range(0, self.k.size, step):
            yield slice(j, min(j + step, self.k.size))

    def _panel_runs(self, r, n=16):
        """Split r into runs of equal-width Gauss-Legendre panels, or None."""
        if r.size < 4 * n or r.size % n:
            return None
        x, _ = gauss_legendre(n)
        R = r.reshape(-1, n)
        c = 0.5 * (R[:, 0] + R[:, -1])
        h = (R[:, -1] - R[:, 0]) / (x[-1] - x[0])
        if np.max(np.abs(R - (c[:, None] + h[:, None] * x))) > 1e-12 * max(1.0, float(np.max(r))):
            return None
        cfg = self.cfg
        region = np.where(R[:, -1] <= cfg.a, 1, np.where(R[:, 0] > cfg.b, 3, 2))
        runs = []
        start = 0
        for p in range(1, R.shape[0] + 1):
            if p == R.shape[0] or region[p] != region[start] or abs(h[p] - h[start]) > 1e-11 * abs(h[start]):
                runs.append((start, p, region[start], c[start:p], h[start]))
                start = p
        return runs, x

    def _run_factors(self, cols, c, h, x, order, region):
        k = self.k[cols]
        base = _phase_table(c, k)                           # e^{i k c_p}
        offs = np.exp(1j * np.outer(x * h, k))              # e^{i k h x_l}
        if region == 1:
            amp = (1j * k) ** order * self.norm[cols]        # Im part gives sin(kr)
        else:
            amp = 2 * (1j * k) ** order * self.J3[cols] * self.norm[cols]
        return base, offs, amp

    def synthesize(self, r, coeffs, order: int = 0):
        """sum_j s^(order)(r, k_j) coeffs_j (coeffs may carry trailing columns)."""
        r = np.asarray(r, dtype=float)
        coeffs = np.asarray(coeffs)
        if np.iscomplexobj(coeffs):
            return self.synthesize(r, coeffs.real, order) + 1j * self.synthesize(r, coeffs.imag, order)
        structure = self._panel_runs(r) if coeffs.ndim == 1 else None
        out = np.zeros((r.size,) + coeffs.shape[1:])
        if structure is None:
            for cols in self._chunks(r.size):
                out += self.block(r, order, cols) @ coeffs[cols]
            return out
        runs, x = structure
        n = x.size
        for p0, p1, region, c, h in runs:
            rows = slice(p0 * n, p1 * n)
            if region == 2:
                for cols in self._chunks(rows.stop - rows.start):
                    out[rows] += self.block(r[rows], order, cols) @ coeffs[cols]
                continue
            acc = np.zeros((p1 - p0, n), dtype=complex)
            step = max(1, 2_000_000 // max(p1 - p0, n))
            for j in range(0, self.k.size, step):
                cols = slice(j, min(j + step, self.k.size))
                base, offs, amp = self._run_factors(cols, c, h, x, order, region)
                acc += (base * (amp * coeffs[cols])) @ offs.T
            out[rows] = (acc.imag if region == 1 else acc.real).ravel()
        return out

    def project(self, r, weighted_values):
        """sum_i s(r_i, k_j) weighted_values_i for every k_j."""
        r = np.asarray(r, dtype=float)
        v = np.asarray(weighted_values)
        if np.iscomplexobj(v):
            return self.project(r, v.real) + 1j * self.project(r, v.imag)
        structure = self._panel_runs(r)
        out = np.zeros(self.k.size)
        if structure is None:
            for cols in self._chunks(r.size):
                out[cols] = v @ self.block(r, 0, cols)
            return out
        runs, x = structure
        n = x.size
        for p0, p1, region, c, h in runs:
            rows = slice(p0 * n, p1 * n)
            if region == 2:
                for cols in self._chunks(rows.stop - rows.start):
                    out[cols] += v[rows] @ self.block(r[rows], 0, cols)
                continue
            V = v[rows].reshape(p1 - p0, n)
            step = max(1, 2_000_000 // max(p1 - p0, n))
            for j in range(0, self.k.size, step):
                cols = slice(j, min(j + step, self.k.size))
                base, offs, amp = self._run_factors(cols, c, h, x, 0, region)
                s = np.sum(base * (V @ offs), axis=0) * amp
                out[cols] += s.imag if region == 1 else s.real
        return out


class ThetaHalf(enum.Enum):
    MINUS_REGION = "MinusRegion"
    UPPER_HALF = "UpperHalf"
    LOWER_HALF = "LowerHalf"


@dataclass(frozen=True)
class ThetaMatrix:
    entries: np.ndarray
    half: ThetaHalf


def wronskian_w(cfg: BarrierConfig, E):
    """W(E) = J4 C3 - J3 C4 (identically i/2)."""
    J = closed_form_coefficients(cfg, Family.CHI, E)
    C = closed_form_coefficients(cfg, Family.SIGMA2, E)
    return J.c4 * C.c3 - J.c3 * C.c4


def _theta_entries(cfg, E, region):
    """Vectorized theta entries (t11, t12, t21, t22) for energies of one region."""
    kap = cfg.kappa
    if region is Region.NEGATIVE_RE:
        J = closed_form_coefficients(cfg, Family.CHI_TILDE, E)
        kt = np.sqrt(-kap * E + 0j)
        zero = np.zeros_like(kt)
        t12 = -kap / (2 * kt)
        return zero, t12, zero, t12 * J.c4 / J.c3
    J = closed_form_coefficients(cfg, Family.CHI, E)
    C = closed_form_coefficients(cfg, Family.SIGMA2, E)
    W = J.c4 * C.c3 - J.c3 * C.c4
    k = np.sqrt(kap * E + 0j)
    pref = kap / k / 2j
    if region is Region.UPPER_HALF:
        t11 = pref * (-C.c4 / (J.c4 * W))
    elif region is Region.LOWER_HALF:
        t11 = -pref * C.c3 / (J.c3 * W)
    else:
        raise DomainError("theta matrices are defined off the positive real axis")
    zero = np.zeros_like(t11)
    return t11, zero, pref / W, zero


def theta_matrices(cfg: BarrierConfig, E) -> ThetaMatrix:
    E = as_energy(E)
    region = classify(E)
    if region is Region.POSITIVE_REAL:
        raise DomainError("theta matrices are defined off the positive real axis")
    t11, t12, t21, t22 = (complex(x) for x in _theta_entries(cfg, np.asarray(E), region))
    half = {Region.NEGATIVE_RE: ThetaHalf.MINUS_REGION, Region.UPPER_HALF: ThetaHalf.UPPER_HALF,
            Region.LOWER_HALF: ThetaHalf.LOWER_HALF}[region]
    return ThetaMatrix(np.array([[t11, t12], [t21, t22]]), half)


@dataclass(frozen=True)
class StoneResult:
    rho11: float
    rho12: float
    rho21: float
    rho22: float
    error_estimate: float
    raw: tuple  # per-eps values of rho11


def _jump_integral(cfg, E1, E2, eps, n, panels):
    edges = split_interval(E1, E2, (E2 - E1) / panels, breaks=(cfg.v0,))
    x, w = composite_nodes(edges, n)
    lo = _theta_entries(cfg, x - 1j * eps, Region.LOWER_HALF)
    up = _theta_entries(cfg, x + 1j * eps, Region.UPPER_HALF)
    return np.array([np.sum(w * (l - u)) / (2j * np.pi) for l, u in zip(lo, up)])


def stone_measure(cfg: BarrierConfig, E1: float, E2: float,
                  eps_sequence=(1e-2, 5e-3, 2.5e-3), tol: float = 1e-5,
                  nodes: int = 16) -> StoneResult:
    """Spectral measure of (E1, E2) from the jump of theta across the axis.

    Each eps-integral is refined until two panel counts agree to ``tol``
    (relative); the eps-limit is taken by Richardson extrapolation on a
    halving sequence, whose last correction is the reported error.
    """
    if not 0 < E1 < E2:
        raise DomainError("need 0 < E1 < E2")
    eps_sequence = [float(e) for e in eps_sequence]
    if len(eps_sequence) < 2 or any(b >= a for a, b in zip(eps_sequence, eps_sequence[1:])):
        raise DomainError("eps_sequence must be decreasing with at least two entries")
    vals = []
    for eps in eps_sequence:
        panels = max(2, int(np.ceil(E2 - E1)))
        prev = _jump_integral(cfg, E1, E2, eps, nodes, panels)
        for _ in range(6):
            panels *= 2
            cur = _jump_integral(cfg, E1, E2, eps, nodes, panels)
            if np.max(np.abs(cur - prev)) <= 1e-12 * max(abs(cur[0]), 1e-300):
                break
            prev = cur
        else:
            raise QuadratureFailure("theta-jump integral did not converge",
                                    float(np.max(np.abs(cur - prev))))
        vals.append(cur)
    # repeated Richardson elimination of eps^1, eps^2, ... terms
    table = [np.array(vals)]
    ratios = [a / b for a, b in zip(eps_sequence, eps_sequence[1:])]
    p = 1
    while len(table[-1]) > 1:
        t = table[-1]
        nxt = []
        for i in range(len(t) - 1):
            f = ratios[i] ** p
            nxt.append((f * t[i + 1] - t[i]) / (f - 1))
        table.append(np.array(nxt))
        p += 1
    best = table[-1][0]
    err = float(np.max(np.abs(best - table[-2][-1])))
    scale = max(abs(best[0]), 1e-300)
    if err > tol * scale:
        raise ExtrapolationFailure(f"eps-extrapolation error {err:.3g} too large", err)
    return StoneResult(float(best[0].real), float(abs(best[1])), float(abs(best[2])),
                       float(abs(best[3])), err, tuple(float(v[0].real) for v in vals))


def rho_integral(cfg: BarrierConfig, E1: float, E2: float, n: int = 16) -> float:
    """Closed-form density integrated over (E1, E2), done in k to tame 1/sqrt(E)."""
    k1, k2 = np.sqrt(cfg.kappa * E1), np.sqrt(cfg.kappa * E2)
    kv = np.sqrt(cfg.kappa * cfg.v0)
    total, prev = None, None
    for panels in (8, 16, 32, 64, 128):
        edges = split_interval(k1, k2, (k2 - k1) / panels, breaks=(kv,))
        k, w = composite_nodes(edges, n)
        E = k ** 2 / cfg.kappa
        total = float(np.sum(w * rho_values(cfg, E) * 2 * k / cfg.kappa))
        if prev is not None and abs(total - prev) <= 1e-14 * abs(total):
            break
        prev = total
    return total


@dataclass(frozen=True)
class SpectrumInfo:
    continuous: tuple
    point: tuple
    resolvent_set: str

    def as_dict(self):
        return dict(continuous=list(self.continuous), point=list(self.point),
                    resolvent_set=self.resolvent_set)


def spectrum_info(cfg: BarrierConfig) -> SpectrumInfo:
    """Sp(H) = [0, inf), purely continuous, for every non-negative barrier."""
    return SpectrumInfo(continuous=(0.0, float("inf")), point=(),
                        resolvent_set="C \\ [0, inf)")

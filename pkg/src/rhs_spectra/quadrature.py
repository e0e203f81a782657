"""Composite Gauss-Legendre panels and per-panel polynomial interpolation."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel rules shared by every r- and E-integral.

    ``r_cutoff`` / ``e_cutoff`` of ``None`` mean "choose from the functions'
    decay hints".  ``max_panel_phase`` bounds the oscillation phase (wavenumber
    times panel width) of panels whose node values are later interpolated;
    ``integration_phase`` bounds panels that are only summed against weights.
    """

    r_cutoff: float | None = None
    e_cutoff: float | None = None
    nodes_per_panel: int = 16
    max_panel_phase: float = np.pi / 2
    integration_phase: float = 2 * np.pi
    tol: float = 1e-8
    max_matrix_entries: int = 4_000_000
    max_work: float = 4e9

    def __post_init__(self):
        if self.nodes_per_panel < 4:
            raise DomainError("nodes_per_panel must be at least 4")
        if not (self.max_panel_phase > 0 and self.integration_phase > 0 and self.tol > 0):
            raise DomainError("panel phases and tol must be positive")

    def replace(self, **changes) -> "QuadratureSpec":
        fields = dict(self.__dict__)
        fields.update(changes)
        return QuadratureSpec(**fields)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@functools.lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@functools.lru_cache(maxsize=None)
def _bary_weights(n: int):
    # barycentric weights for the Legendre nodes (up to a common factor)
    x, w = gauss_legendre(n)
    bw = (-1.0) ** np.arange(n) * np.sqrt((1 - x ** 2) * w)
    bw.setflags(write=False)
    return bw


def split_interval(lo: float, hi: float, max_width: float, breaks=()) -> np.ndarray:
    """Panel boundaries covering [lo, hi], honouring ``breaks`` and a width cap."""
    pts = sorted({float(lo), float(hi), *(float(b) for b in breaks if lo < b < hi)})
    out = [pts[0]]
    for x0, x1 in zip(pts[:-1], pts[1:]):
        m = max(1, int(np.ceil((x1 - x0) / max_width - 1e-12)))
        out.extend(np.linspace(x0, x1, m + 1)[1:])
    return np.asarray(out)


def composite_nodes(edges, n: int):
    """Nodes and weights of n-point Gauss-Legendre on each panel, flattened."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


class PanelInterpolant:
    """Piecewise polynomial through values at Gauss-Legendre panel nodes.

    Evaluation uses the barycentric formula on the panel containing each
    query point; points outside the panels extrapolate from the end panels
    only within ``slack`` and are zero beyond.
    """

    def __init__(self, edges, n: int, values, slack: float = 0.0):
        self.edges = np.asarray(edges, dtype=float)
        self.n = n
        vals = np.asarray(values)
        self.values = vals.reshape(len(self.edges) - 1, n)
        self.slack = slack

    @property
    def nodes(self):
        return composite_nodes(self.edges, self.n)[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        lo, hi = self.edges[0], self.edges[-1]
        idx = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        a, b = self.edges[idx], self.edges[idx + 1]
        t = (2 * flat - a - b) / (b - a)
        xg, _ = gauss_legendre(self.n)
        bw = _bary_weights(self.n)
        diff = t[:, None] - xg[None, :]
        exact = diff == 0
        diff[exact] = 1.0
        c = bw[None, :] / diff
        vals = self.values[idx]
        out = np.sum(c * vals, axis=1) / np.sum(c, axis=1)
        hit = exact.any(axis=1)
        if hit.any():
            out[hit] = vals[hit][exact[hit]]
        outside = (flat < lo - self.slack) | (flat > hi + self.slack)
        out = np.where(outside, 0.0, out)
        return out.reshape(x.shape) if x.ndim else out[0]

"""Problem definition: barrier parameters, the square-root branch and wavenumbers.

The radial operator is ``h = -(1/kappa) d^2/dr^2 + V(r)`` on ``[0, inf)`` with
``kappa = 2m/hbar^2`` and ``V`` the square barrier of height ``v0`` on ``(a, b)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEnergy, DomainError


@dataclass(frozen=True)
class BarrierConfig:
    kappa: float = 1.0
    hbar: float = 1.0
    v0: float = 1.0
    a: float = 1.0
    b: float = 2.0
    eps_energy: float | None = None

    def __post_init__(self):
        if self.eps_energy is None:
            object.__setattr__(self, "eps_energy", 1e-9 * max(1.0, self.v0))
        if not (self.kappa > 0 and self.hbar > 0):
            raise DomainError("kappa and hbar must be positive")
        if not self.v0 >= 0:
            raise DomainError("v0 must be non-negative (attractive wells are not supported)")
        if not 0 < self.a < self.b:
            raise DomainError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if not self.eps_energy > 0:
            raise DomainError("eps_energy must be positive")

    def replace(self, **changes) -> "BarrierConfig":
        fields = dict(kappa=self.kappa, hbar=self.hbar, v0=self.v0, a=self.a, b=self.b)
        if "v0" not in changes and "eps_energy" not in changes:
            fields["eps_energy"] = self.eps_energy
        fields.update(changes)
        return BarrierConfig(**fields)

    def as_dict(self) -> dict:
        return dict(kappa=self.kappa, hbar=self.hbar, v0=self.v0, a=self.a, b=self.b,
                    eps_energy=self.eps_energy)


class Region(enum.Enum):
    """Complex-energy region; selects which eigenfunction families apply."""

    NEGATIVE_RE = "NegativeRe"
    UPPER_HALF = "UpperHalf"
    LOWER_HALF = "LowerHalf"
    POSITIVE_REAL = "PositiveReal"


def as_energy(E) -> complex:
    """Complex energy with a signed-zero imaginary part normalized to +0.0."""
    E = complex(E)
    return complex(E.real, E.imag + 0.0)


def classify(E) -> Region:
    """Region of a single energy.

    ``Re E < 0`` (including the negative real axis) is ``NEGATIVE_RE``.  Points
    with ``Re E = 0`` and ``Im E != 0`` belong to the upper/lower half plane,
    where the oscillatory families are equally valid.
    """
    E = as_energy(E)
    if E.real < 0:
        return Region.NEGATIVE_RE
    if E.imag > 0:
        return Region.UPPER_HALF
    if E.imag < 0:
        return Region.LOWER_HALF
    if E.real > 0:
        return Region.POSITIVE_REAL
    raise DegenerateEnergy(E, 0.0, 0.0)


@dataclass(frozen=True)
class ComplexEnergy:
    re: float
    im: float = 0.0
    region: Region = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "im", self.im + 0.0)
        object.__setattr__(self, "region", classify(complex(self.re, self.im)))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


def potential_value(cfg: BarrierConfig, r):
    """V(r); the closed barrier [a, b] carries v0 at the two jump points."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("potential evaluated at negative radius")
    out = np.where((r >= cfg.a) & (r <= cfg.b), cfg.v0, 0.0)
    return out if out.ndim else float(out)


def branch_sqrt(z):
    """Square root with arg(z) in (-pi, pi] mapped to (-pi/2, pi/2].

    The negative real axis (with either signed zero) maps onto the positive
    imaginary axis.
    """
    z = np.asarray(z, dtype=complex) + 0.0j
    out = np.sqrt(z)
    return out if out.ndim else complex(out)


def check_energy(cfg: BarrierConfig, E) -> None:
    """Raise DegenerateEnergy when any E lies within eps_energy of 0 or v0."""
    E = np.asarray(E, dtype=complex)
    for threshold in (0.0, cfg.v0):
        bad = np.abs(E - threshold) < cfg.eps_energy
        if np.any(bad):
            raise DegenerateEnergy(complex(E[bad].flat[0]), threshold, cfg.eps_energy)


@dataclass(frozen=True)
class Wavenumbers:
    k: complex
    q: complex
    k_tilde: complex
    q_tilde: complex


def wavenumbers(cfg: BarrierConfig, E) -> Wavenumbers:
    """Branch-correct k, Q, k~, Q~ at energy E (scalar or array)."""
    check_energy(cfg, E)
    E = np.asarray(E, dtype=complex) + 0.0j
    # -0.0 must not leak into the negated arguments either
    kE = cfg.kappa * E
    kEV = cfg.kappa * (E - cfg.v0)
    return Wavenumbers(
        k=branch_sqrt(kE),
        q=branch_sqrt(kEV),
        k_tilde=branch_sqrt(_neg(kE)),
        q_tilde=branch_sqrt(_neg(kEV)),
    )


def _neg(z):
    # negation that keeps a zero imaginary part at +0.0
    return -np.real(z) + 1j * (-np.imag(z) + 0.0)

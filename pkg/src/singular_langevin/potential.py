"""Singular power-law pair potentials, Hamiltonians and the energy scaling map.

The family is

    U(R; lam) = a0 / lam**2 + sum_k a_k R**alpha_k * lam**(2 * (alpha_k / alpha_1 - 1))

with alpha_1 > ... > alpha_K, so that ``U(l**(2/alpha_1) R; lam) == l**2 U(R; l*lam)``.
At ``lam == 1`` this is the plain potential ``a0 + sum_k a_k R**alpha_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DomainError,
    ExponentOrder,
    LeadingSignError,
    NotBoundedBelow,
    SingularSignError,
)

# critical-point scan: log grid over [1e-4, 1e4], widened when the asymptotic
# sign of U' is not yet reached at an end
_SCAN_POINTS = 512
_SCAN_LO = 1e-4
_SCAN_HI = 1e4


@dataclass(frozen=True)
class PotentialSpec:
    """Coefficient/exponent pairs ``(a_k, alpha_k)`` plus the offset ``a0``."""

    terms: tuple[tuple[float, float], ...]
    a0: float = 0.0

    def __post_init__(self):
        terms = tuple((float(a), float(e)) for a, e in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "a0", float(self.a0))
        if not terms:
            raise ValueError("potential needs at least one term")

    @property
    def K(self) -> int:
        return len(self.terms)

    @property
    def alpha1(self) -> float:
        return self.terms[0][1]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([a for a, _ in self.terms])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([e for _, e in self.terms])

    def scaled_coefficients(self, lam: float = 1.0) -> np.ndarray:
        a = self.coefficients
        if lam == 1.0:
            return a
        alpha = self.exponents
        return a * lam ** (2.0 * (alpha / self.alpha1 - 1.0))

    def scaled_offset(self, lam: float = 1.0) -> float:
        return self.a0 / lam**2

    def to_dict(self) -> dict:
        return {
            "terms": [{"coefficient": a, "exponent": e} for a, e in self.terms],
            "offset": self.a0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        terms = [(t["coefficient"], t["exponent"]) for t in d["terms"]]
        return cls(tuple(terms), d.get("offset", 0.0))


class PhasePoint(NamedTuple):
    q: float
    p: float


@dataclass(frozen=True)
class LangevinParams:
    gamma: float
    temperature: float
    sigma: float = field(init=False)

    def __post_init__(self):
        if self.gamma < 0 or self.temperature < 0:
            raise ValueError("gamma and temperature must be non-negative")
        object.__setattr__(self, "sigma", math.sqrt(2.0 * self.gamma * self.temperature))


@dataclass(frozen=True)
class FullState:
    """Two particles on a line: positions ``q1, q2`` and momenta ``p1, p2``."""

    q1: float
    q2: float
    p1: float
    p2: float

    def __post_init__(self):
        if self.q1 == self.q2:
            raise DomainError("coincident particles (q1 == q2)")

    @property
    def q_bar(self) -> float:
        return 0.5 * (self.q1 + self.q2)

    @property
    def p_bar(self) -> float:
        return 0.5 * (self.p1 + self.p2)

    @property
    def q_rel(self) -> float:
        return 0.5 * (self.q1 - self.q2)

    @property
    def p_rel(self) -> float:
        return 0.5 * (self.p1 - self.p2)

    def to_com(self) -> tuple[float, float, float, float]:
        """``(q_bar, p_bar, q_rel, p_rel)``."""
        return self.q_bar, self.p_bar, self.q_rel, self.p_rel

    @classmethod
    def from_com(cls, q_bar, p_bar, q_rel, p_rel) -> "FullState":
        return cls(q_bar + q_rel, q_bar - q_rel, p_bar + p_rel, p_bar - p_rel)

    def energy(self, spec: PotentialSpec) -> float:
        return 0.5 * (self.p1**2 + self.p2**2) + float(eval_potential(spec, self.q1 - self.q2))


def validate_spec(spec: PotentialSpec, *, allow_quadratic: bool = False) -> PotentialSpec:
    """Return ``spec`` unchanged if it satisfies every structural constraint.

    ``allow_quadratic`` admits the boundary case ``alpha_1 == 2`` used by the
    quadratic-growth experiments; everything else is enforced as usual.
    """
    alpha = spec.exponents
    a = spec.coefficients
    if spec.K < 2:
        raise ExponentOrder("need at least a confining and a singular term")
    if np.any(np.diff(alpha) >= 0):
        raise ExponentOrder(f"exponents must be strictly decreasing, got {alpha.tolist()}")
    if allow_quadratic:
        if alpha[0] < 2:
            raise ExponentOrder(f"alpha_1 = {alpha[0]} must be >= 2")
    elif alpha[0] <= 2:
        raise ExponentOrder(f"alpha_1 = {alpha[0]} must be > 2")
    if alpha[-1] >= 0:
        raise ExponentOrder(f"alpha_K = {alpha[-1]} must be < 0")
    if a[0] <= 0:
        raise LeadingSignError(f"a_1 = {a[0]} must be > 0")
    if a[-1] <= 0:
        raise SingularSignError(f"a_K = {a[-1]} must be > 0")
    umin = potential_minimum(spec)[1]
    grid = np.logspace(-4, 4, 2049)
    umin = min(umin, float(np.min(eval_potential(spec, grid))))
    if umin <= 0:
        raise NotBoundedBelow(f"U(R; 1) attains {umin:.6g} <= 0")
    return spec


def _check_domain(R):
    R = np.asarray(R, dtype=float)
    if np.any(~(R > 0)):
        raise DomainError("R must be > 0")
    return R


def eval_potential(spec: PotentialSpec, R, lam: float = 1.0):
    """``U(R; lam)``; vectorised over ``R``."""
    R = _check_domain(R)
    c = spec.scaled_coefficients(lam)
    alpha = spec.exponents
    out = np.full(R.shape, spec.scaled_offset(lam))
    for ck, ak in zip(c, alpha):
        out = out + ck * R**ak
    return out if out.ndim else float(out)


def eval_force(spec: PotentialSpec, R, lam: float = 1.0):
    """``U'(R; lam)`` term by term (the force on the particle is its negative)."""
    R = _check_domain(R)
    c = spec.scaled_coefficients(lam)
    alpha = spec.exponents
    out = np.zeros(R.shape)
    for ck, ak in zip(c, alpha):
        out = out + ck * ak * R ** (ak - 1.0)
    return out if out.ndim else float(out)


def eval_curvature(spec: PotentialSpec, R, lam: float = 1.0):
    R = _check_domain(R)
    c = spec.scaled_coefficients(lam)
    alpha = spec.exponents
    out = np.zeros(R.shape)
    for ck, ak in zip(c, alpha):
        out = out + ck * ak * (ak - 1.0) * R ** (ak - 2.0)
    return out if out.ndim else float(out)


def eval_hamiltonian(spec: PotentialSpec, point, lam: float = 1.0):
    q, p = point
    return 0.5 * np.asarray(p) ** 2 + eval_potential(spec, q, lam)


def scale_map(point, ell: float, alpha1: float) -> PhasePoint:
    """``(Q, P) -> (ell**(2/alpha1) Q, ell P)``."""
    q, p = point
    return PhasePoint(ell ** (2.0 / alpha1) * q, ell * p)


@lru_cache(maxsize=4096)
def critical_points(spec: PotentialSpec, lam: float = 1.0) -> tuple[float, ...]:
    """Sorted positive zeros of ``U'(.; lam)``.

    Sign changes of U' are bracketed on a log grid and refined with Brent's
    method; the grid is widened until U' < 0 at the left end (singular term
    dominates) and U' > 0 at the right end (confining term dominates).
    """
    lo, hi = _SCAN_LO, _SCAN_HI
    for _ in range(40):
        if eval_force(spec, lo, lam) < 0 or not (spec.exponents[-1] < 0):
            break
        lo *= 1e-2
    for _ in range(40):
        if eval_force(spec, hi, lam) > 0:
            break
        hi *= 1e2
    n = max(_SCAN_POINTS, int(_SCAN_POINTS * math.log10(hi / lo) / 8))
    grid = np.geomspace(lo, hi, n)
    du = eval_force(spec, grid, lam)
    roots = []
    for i in np.nonzero(np.sign(du[:-1]) * np.sign(du[1:]) < 0)[0]:
        roots.append(
            brentq(lambda r: eval_force(spec, r, lam), grid[i], grid[i + 1], xtol=1e-300, rtol=1e-13)
        )
    for i in np.nonzero(du == 0.0)[0]:
        roots.append(float(grid[i]))
    return tuple(sorted(roots))


def potential_minimum(spec: PotentialSpec, lam: float = 1.0) -> tuple[float, float]:
    """``(argmin, min)`` of ``U(.; lam)`` over ``R > 0``."""
    cps = critical_points(spec, lam)
    if not cps:
        raise DomainError("potential has no interior minimum")
    vals = [float(eval_potential(spec, r, lam)) for r in cps]
    i = int(np.argmin(vals))
    return cps[i], vals[i]


def local_maxima(spec: PotentialSpec, lam: float = 1.0) -> list[tuple[float, float]]:
    """Interior local maxima ``(R, U(R; lam))``."""
    out = []
    for r in critical_points(spec, lam):
        h = 1e-6 * r
        if eval_force(spec, r - h, lam) > 0 > eval_force(spec, r + h, lam):
            out.append((r, float(eval_potential(spec, r, lam))))
    return out


def normalize_offset(spec: PotentialSpec) -> PotentialSpec:
    """Shift ``a0`` so that ``inf_R U(R; 1) == 0``; idempotent."""
    _, umin = potential_minimum(spec)
    scale = abs(spec.a0) + max(abs(a) for a, _ in spec.terms)
    if abs(umin) <= 1e-13 * scale:
        return spec
    return replace(spec, a0=spec.a0 - umin)


def make_spec(terms: Sequence[tuple[float, float]], a0: float = 0.0) -> PotentialSpec:
    return PotentialSpec(tuple(terms), a0)

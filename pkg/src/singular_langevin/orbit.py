"""Deterministic orbits of H(Q, P; lam) = P**2/2 + U(Q; lam) and their averages.

Orbit integrals carry a 1/rho singularity at both turning points.  They are
computed in the angle variable ``Q(theta) = c + h sin(theta)``, where
``c, h`` are the midpoint and half-width of ``[Q-, Q+]``; for simple turning
points ``cos(theta) / rho`` is then analytic on ``[-pi/2, pi/2]`` and
Gauss-Legendre panels converge spectrally.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import quadrature
from .errors import BelowMinimum, DomainError, MultipleWells, VerificationFailed
from .potential import (
    PotentialSpec,
    critical_points,
    eval_potential,
    local_maxima,
    potential_minimum,
)
from .quadrature import QuadratureSettings

DEFAULT_LAMBDA_GRID = (1.0, 2.0, 5.0, 10.0, 100.0, 1e4)
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class OrbitGeometry:
    eta: float
    lam: float
    q_minus: float
    q_plus: float
    period: float
    p2_integral: float

    @property
    def mean_p2(self) -> float:
        return self.p2_integral / self.period


@dataclass(frozen=True)
class EtaStar:
    value: float
    margin: float
    lambda_grid_checked: tuple[float, ...]


class OrbitAverage(NamedTuple):
    bracket: float
    period: float
    mean: float
    edges: np.ndarray


def turning_points(spec: PotentialSpec, eta: float, lam: float = 1.0) -> tuple[float, float]:
    """Smallest and largest positive roots of ``eta - U(Q; lam)``.

    ``U`` is monotone between consecutive critical points, so each monotone
    segment holds at most one root; the roots are counted exactly and refined
    by Brent's method.
    """
    cps = critical_points(spec, lam)
    if not cps:
        raise DomainError("potential has no critical points; no closed orbits")
    vals = [float(eval_potential(spec, c, lam)) for c in cps]
    if eta <= min(vals):
        raise BelowMinimum(f"eta = {eta:.6g} is not above min U = {min(vals):.6g}")

    def f(r):
        return eta - eval_potential(spec, r, lam)

    roots = []
    if vals[0] < eta:
        lo = cps[0]
        while eval_potential(spec, lo, lam) <= eta:
            lo *= 0.5
        roots.append(brentq(f, lo, cps[0], xtol=1e-300, rtol=1e-15))
    for i in range(len(cps) - 1):
        if (vals[i] - eta) * (vals[i + 1] - eta) < 0:
            roots.append(brentq(f, cps[i], cps[i + 1], xtol=1e-300, rtol=1e-15))
    if vals[-1] < eta:
        hi = cps[-1]
        while eval_potential(spec, hi, lam) <= eta:
            hi *= 2.0
        roots.append(brentq(f, cps[-1], hi, xtol=1e-300, rtol=1e-15))
    if len(roots) != 2:
        raise MultipleWells(f"level eta = {eta:.6g} meets U(.; {lam:.6g}) {len(roots)} times")
    return roots[0], roots[-1]


def rho(spec: PotentialSpec, Q, eta: float, lam: float = 1.0):
    """Momentum magnitude ``sqrt(2 (eta - U(Q; lam)))`` on the level set."""
    gap = eta - np.asarray(eval_potential(spec, Q, lam))
    if np.any(gap < -1e-10 * max(abs(eta), 1.0)):
        raise DomainError("Q lies outside the orbit's turning points")
    out = np.sqrt(2.0 * np.maximum(gap, 0.0))
    return out if out.ndim else float(out)


class _Orbit:
    """Angle parametrisation of one orbit ``H(.; lam) = eta``.

    Computes ``eta - U(q)`` relative to the nearer turning point so that the
    gap keeps full relative precision as ``theta -> +-pi/2``.
    """

    def __init__(self, spec: PotentialSpec, eta: float, lam: float, qm: float, qp: float):
        self.spec, self.eta, self.lam = spec, eta, lam
        self.qm, self.qp = qm, qp
        self.c = 0.5 * (qp + qm)
        self.h = 0.5 * (qp - qm)
        self.coef = spec.scaled_coefficients(lam)
        self.alpha = spec.exponents

    def q_gap(self, theta):
        theta = np.asarray(theta, dtype=float)
        right = theta >= 0
        d = np.where(
            right,
            2.0 * self.h * np.sin(0.5 * (HALF_PI - theta)) ** 2,
            2.0 * self.h * np.sin(0.5 * (HALF_PI + theta)) ** 2,
        )
        qe = np.where(right, self.qp, self.qm)
        x = np.where(right, -d, d) / qe
        q = qe * (1.0 + x)
        gap = np.zeros_like(theta)
        lx = np.log1p(x)
        for ck, ak in zip(self.coef, self.alpha):
            gap -= ck * qe**ak * np.expm1(ak * lx)
        return q, np.maximum(gap, 0.0)

    def nodes(self, theta):
        """``q``, ``rho`` and the time weight ``dq/dtheta / rho`` at ``theta``."""
        q, gap = self.q_gap(theta)
        r = np.sqrt(2.0 * gap)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = self.h * np.cos(theta) / r
        return q, r, w

    def _gap_at(self, d: float, right: bool) -> tuple[float, float]:
        """``eta - U`` and ``|U'|`` at distance ``d`` inside the nearer turning point."""
        qe = self.qp if right else self.qm
        x = (-d if right else d) / qe
        lx = math.log1p(x)
        gap = 0.0
        slope = 0.0
        for ck, ak in zip(self.coef, self.alpha):
            gap -= ck * qe**ak * math.expm1(ak * lx)
            slope += ck * ak * (qe * (1.0 + x)) ** (ak - 1.0)
        return gap, abs(slope)

    def theta_of(self, Q: float, P: float | None = None) -> float:
        """Inverse of the angle map, measured from the nearer turning point.

        Close to a turning point the angle is ill-conditioned in ``Q`` (it
        behaves like a square root), so when the momentum is supplied the
        distance to the turning point is recovered from ``P**2 / 2 = eta - U``
        instead, which is well conditioned.
        """
        right = Q >= self.c
        qe = self.qp if right else self.qm
        d = min(max((qe - Q) if right else (Q - self.qm), 0.0), 2.0 * self.h)
        if P is not None and d < 1e-4 * self.h:
            target = 0.5 * P * P
            _, slope = self._gap_at(0.0, right)
            d = target / slope if slope > 0 else d
            for _ in range(8):
                gap, slope = self._gap_at(d, right)
                if slope <= 0:
                    break
                step = (gap - target) / slope
                d = max(d - step, 0.0)
                if abs(step) <= 1e-15 * d:
                    break
            d = min(d, 2.0 * self.h)
        ang = 2.0 * math.asin(math.sqrt(d / (2.0 * self.h)))
        return HALF_PI - ang if right else -HALF_PI + ang


def make_orbit(spec: PotentialSpec, eta: float, lam: float = 1.0) -> _Orbit:
    qm, qp = turning_points(spec, eta, lam)
    return _Orbit(spec, eta, lam, qm, qp)


def orbit_average(spec: PotentialSpec, phi: Callable | None, eta: float, lam: float = 1.0,
                  settings: QuadratureSettings = QuadratureSettings(),
                  edges: np.ndarray | None = None) -> OrbitAverage:
    """``<phi>``, the period and ``A(phi) = <phi> / period`` from one quadrature pass.

    ``phi(q, p, lam)`` must be vectorised; ``None`` means ``phi == 1``.  Passing
    ``edges`` (from a previous call) evaluates a fixed composite rule instead
    of adapting, which keeps results smooth in ``eta`` for finite differences.
    """
    orb = make_orbit(spec, eta, lam)
    return _average_on(orb, phi, settings, edges)


def _average_on(orb: _Orbit, phi, settings, edges=None) -> OrbitAverage:
    def f(theta):
        q, r, w = orb.nodes(theta)
        if phi is None:
            s = np.full_like(q, 2.0)
        else:
            s = phi(q, r, orb.lam) + phi(q, -r, orb.lam)
        return np.vstack([s * w, 2.0 * w])

    if edges is None:
        vals, edges = quadrature.adaptive(f, -HALF_PI, HALF_PI, settings)
    else:
        vals = quadrature.fixed_panels(f, edges, settings.nodes_per_panel)
    bracket, period = float(vals[0]), float(vals[1])
    return OrbitAverage(bracket, period, bracket / period, edges)


def _p2(q, p, lam):
    return p * p


def orbit_geometry(spec: PotentialSpec, eta: float, lam: float = 1.0,
                   settings: QuadratureSettings = QuadratureSettings()) -> OrbitGeometry:
    orb = make_orbit(spec, eta, lam)
    avg = _average_on(orb, _p2, settings)
    return OrbitGeometry(eta, lam, orb.qm, orb.qp, avg.period, avg.bracket)


def period(spec, eta, lam=1.0, settings=QuadratureSettings()) -> float:
    return orbit_average(spec, None, eta, lam, settings).period


def mean_p2(spec, eta, lam=1.0, settings=QuadratureSettings()) -> float:
    """``A(P**2)(eta, lam)``."""
    return orbit_average(spec, _p2, eta, lam, settings).mean


def lambda_star(alpha1: float) -> float:
    """High-energy limit ``2 alpha1 / (alpha1 + 2)`` of the dissipation factor."""
    if alpha1 < 2:
        raise ValueError("alpha1 must be >= 2")
    if alpha1 == 2:
        warnings.warn("alpha1 == 2 is outside the range where the averaging argument applies",
                      stacklevel=2)
    return 2.0 * alpha1 / (alpha1 + 2.0)


def lambda_star_integral(alpha1: float, a1: float = 1.0,
                         settings: QuadratureSettings = QuadratureSettings(rel_tol=1e-13)) -> float:
    """``A(P**2)`` on the unit-energy orbit of ``P**2/2 + a1 Q**alpha1``, by quadrature.

    Uses ``Q = Q_* sin(phi)`` on ``[0, Q_*]``, ``Q_* = a1**(-1/alpha1)``; the ratio
    of the integrals of ``rho`` and ``1/rho`` with ``rho = sqrt(2 (1 - a1 Q**alpha1))``.
    """
    qs = a1 ** (-1.0 / alpha1)

    def f(phi):
        # 1 - sin(phi)**alpha1 without cancellation near phi = pi/2
        lx = np.log1p(-2.0 * np.sin(0.5 * (HALF_PI - phi)) ** 2)
        gap = -np.expm1(alpha1 * lx)
        r = np.sqrt(2.0 * gap)
        dq = qs * np.cos(phi)
        return np.vstack([r * dq, dq / r])

    vals, _ = quadrature.adaptive(f, 0.0, HALF_PI, settings)
    return float(vals[0] / vals[1])


def eta_star(spec: PotentialSpec, lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
             margin: float = 0.5) -> EtaStar:
    """Energy threshold above which every level set is a single simple loop."""
    grid = tuple(sorted(set(float(x) for x in lambda_grid) | {1.0}))
    _, umin = potential_minimum(spec, 1.0)
    tops = [u for lam in grid for _, u in local_maxima(spec, lam)]
    if tops:
        v = max(max(tops), umin)
        value = v + margin * abs(v)
    else:
        value = (1.0 + margin) * umin + 1.0
    for lam in grid:
        for _, u in local_maxima(spec, lam):
            if u >= value:
                raise VerificationFailed(f"barrier {u:.6g} at lam={lam} exceeds eta* = {value:.6g}")
        for h in (1.0, 1.5, 10.0, 1e3):
            try:
                turning_points(spec, h * value, lam)
            except (MultipleWells, BelowMinimum) as exc:
                raise VerificationFailed(f"lam={lam}, eta={h * value:.6g}: {exc}") from exc
    return EtaStar(value, margin, grid)


def lambda_of_eta_direct(spec: PotentialSpec, eta: float, eta_star_value: float,
                         settings: QuadratureSettings = QuadratureSettings()) -> float:
    """``A(P**2)(eta*, sqrt(eta / eta*)) / eta*`` for ``eta >= eta*``, else 0."""
    if eta < eta_star_value:
        return 0.0
    lam = math.sqrt(eta / eta_star_value)
    return mean_p2(spec, eta_star_value, lam, settings) / eta_star_value


class LambdaTable:
    """Memoised ``Lambda(eta)`` and ``tau(eta, 1)`` on log-spaced energies.

    Nodes span ``[eta*, span * eta*]``.  Both quantities are obtained from the
    orbit at energy ``eta*`` and scale ``lam = sqrt(eta / eta*)``; the period at
    ``lam = 1`` follows from ``tau(h eta*, 1) = h**(1/alpha1 - 1/2) tau(eta*, h**0.5)``.
    Between nodes: monotone cubic interpolation in ``log eta``.
    """

    def __init__(self, spec: PotentialSpec, eta_star_value: float, n_nodes: int = 256,
                 span: float = 1e9, settings: QuadratureSettings = QuadratureSettings()):
        self.spec = spec
        self.eta_star = float(eta_star_value)
        self.alpha1 = spec.alpha1
        self.eta = np.geomspace(self.eta_star, span * self.eta_star, n_nodes)
        lam = np.sqrt(self.eta / self.eta_star)
        lam_vals = np.empty(n_nodes)
        tau_vals = np.empty(n_nodes)
        for i, lm in enumerate(lam):
            avg = orbit_average(spec, _p2, self.eta_star, float(lm), settings)
            lam_vals[i] = avg.mean / self.eta_star
            h = self.eta[i] / self.eta_star
            tau_vals[i] = h ** (1.0 / self.alpha1 - 0.5) * avg.period
        self.values = lam_vals
        self.periods = tau_vals
        self._log_eta = np.log(self.eta)
        self._lam = PchipInterpolator(self._log_eta, lam_vals, extrapolate=False)
        self._logtau = PchipInterpolator(self._log_eta, np.log(tau_vals), extrapolate=False)

    def __call__(self, eta):
        eta = np.asarray(eta, dtype=float)
        le = np.log(np.clip(eta, self.eta[0], self.eta[-1]))
        out = np.where(eta < self.eta_star, 0.0, self._lam(le))
        return out if out.ndim else float(out)

    def period(self, eta):
        """``tau(eta, 1)``; ``tau(eta*)`` below the threshold, power-law tail above the table."""
        eta = np.asarray(eta, dtype=float)
        e = np.clip(eta, self.eta[0], self.eta[-1])
        tau = np.exp(self._logtau(np.log(e)))
        tail = eta > self.eta[-1]
        if np.any(tail):
            expo = 1.0 / self.alpha1 - 0.5
            tau = np.where(tail, self.periods[-1] * (np.maximum(eta, 1.0) / self.eta[-1]) ** expo, tau)
        return tau if tau.ndim else float(tau)

    def mean_p2(self, eta):
        """``A(P**2)(eta, 1) = eta * Lambda(eta)`` (valid for ``eta >= eta*``)."""
        return np.asarray(eta) * self(eta)


def control_constant(table: LambdaTable, lambda_star_value: float, delta: float,
                     eta_max: float = 1e6, n: int = 4001) -> float:
    """Smallest ``C`` with ``(L*-d) eta - C <= eta Lambda(eta) <= (L*+d) eta + C`` on a grid."""
    eta = np.unique(np.concatenate([
        np.linspace(0.0, 10.0 * table.eta_star, n // 2),
        np.geomspace(table.eta_star, eta_max, n // 2),
    ]))
    el = eta * table(eta)
    lower = (lambda_star_value - delta) * eta - el
    upper = el - (lambda_star_value + delta) * eta
    return float(max(0.0, lower.max(), upper.max()))

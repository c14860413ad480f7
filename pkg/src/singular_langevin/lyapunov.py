"""Lyapunov function ``V = H + Psi`` built from the Poisson equation of the flow.

``Psi`` solves ``(H-flow derivative of Psi) = gamma * (Upsilon - A(Upsilon))`` with
``Upsilon = P**2 chi(H(Q, P; 1))``, anchored at ``Psi(Q-, 0) = 0`` and integrated
along the orbit in the direction of motion.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import quadrature
from .errors import BoundaryGrowth, MultipleWells, BelowMinimum, StepBreakdown
from .orbit import (
    HALF_PI,
    EtaStar,
    LambdaTable,
    _Orbit,
    eta_star as compute_eta_star,
    lambda_star,
    make_orbit,
    turning_points,
)
from .potential import LangevinParams, PotentialSpec, eval_hamiltonian, eval_potential
from .quadrature import QuadratureSettings


@dataclass(frozen=True)
class CutoffSpec:
    eta_star: float
    width: float = 1.0


def _g(x):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def chi(eta, cutoff: CutoffSpec):
    """Smooth monotone step: 0 for ``eta <= eta*``, 1 for ``eta >= eta* + width``."""
    x = (np.asarray(eta, dtype=float) - cutoff.eta_star) / cutoff.width
    x = np.clip(x, -1.0, 2.0)
    a, b = _g(x), _g(1.0 - x)
    out = a / (a + b)
    return out if out.ndim else float(out)


def upsilon(spec: PotentialSpec, point, lam: float, cutoff: CutoffSpec):
    """``P**2 * chi(H(Q, P; 1))``; the cutoff always reads the ``lam = 1`` energy."""
    q, p = point
    return np.asarray(p) ** 2 * chi(eval_hamiltonian(spec, (q, p), 1.0), cutoff)


class PsiValue(NamedTuple):
    psi: float
    a_upsilon: float
    period: float
    edges: np.ndarray | None


class GeneratorTerms(NamedTuple):
    value: float
    a_upsilon: float
    E: float
    G: float
    psi: float
    V: float
    dpsi_dp: float
    d2psi_dp2: float


@dataclass
class DriftCertificate:
    delta: float
    C: float
    grid: dict
    worst_ratio: float
    worst_point: tuple[float, float]
    delta_H: float
    C_H: float
    comparability_cut: float
    shell_energies: list = field(repr=False)
    shell_max: list = field(repr=False)
    boundary_growth: bool = False

    @property
    def valid(self) -> bool:
        return bool(np.isfinite(self.C) and not self.boundary_growth and self.worst_ratio <= self.C)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["valid"] = self.valid
        d["worst_point"] = list(self.worst_point)
        return d


class LyapunovModel:
    """Everything needed to evaluate ``V``, ``Psi`` and the generator applied to ``V``.

    Immutable after construction.  ``a_upsilon`` is tabulated once (via the
    ``Lambda`` table) for cheap lookups; ``Psi`` itself is always computed on
    demand from the orbit integral.
    """

    def __init__(self, spec: PotentialSpec, params: LangevinParams,
                 eta_star: EtaStar | None = None, width: float = 1.0,
                 settings: QuadratureSettings = QuadratureSettings(rel_tol=1e-12),
                 table: LambdaTable | None = None):
        self.spec = spec
        self.params = params
        self.eta_star = eta_star if eta_star is not None else compute_eta_star(spec)
        self.cutoff = CutoffSpec(self.eta_star.value, width)
        self.settings = settings
        self.table = table if table is not None else LambdaTable(spec, self.eta_star.value)
        self.lambda_star = (2.0 * spec.alpha1 / (spec.alpha1 + 2.0))

    @property
    def gamma(self) -> float:
        return self.params.gamma

    def a_upsilon(self, eta):
        """Tabulated ``A(Upsilon)(eta; 1) = chi(eta) * eta * Lambda(eta)``."""
        return chi(eta, self.cutoff) * self.table.mean_p2(eta)

    # -- Poisson solution -------------------------------------------------

    def _source(self, orb: _Orbit):
        cut = self.cutoff
        spec = self.spec
        unit = orb.lam == 1.0
        chi_eta = chi(orb.eta, cut) if unit else None

        def f(theta):
            q, r, w = orb.nodes(theta)
            if unit:
                ups = r * r * chi_eta
            else:
                ups = r * r * chi(0.5 * r * r + eval_potential(spec, q, 1.0), cut)
            return np.vstack([ups * w, w])

        return f

    def psi_full(self, point, lam: float = 1.0, edges=None) -> PsiValue:
        q, p = float(point[0]), float(point[1])
        eta = float(eval_hamiltonian(self.spec, (q, p), lam))
        if eta <= self.eta_star.value:
            return PsiValue(0.0, 0.0, float("nan"), None)
        orb = make_orbit(self.spec, eta, lam)
        f = self._source(orb)
        n = self.settings.nodes_per_panel
        if edges is None:
            full, edges = quadrature.adaptive(f, -HALF_PI, HALF_PI, self.settings)
        else:
            full = quadrature.fixed_panels(f, edges, n)
        A = full[0] / full[1]
        tq = orb.theta_of(q, p)
        part_edges = -HALF_PI + (edges + HALF_PI) * ((tq + HALF_PI) / math.pi)
        part = quadrature.fixed_panels(f, part_edges, n) if tq > -HALF_PI else np.zeros(2)
        g = self.gamma
        if p >= 0:
            psi = g * (part[0] - A * part[1])
        else:
            half = g * (full[0] - A * full[1])
            psi = half + g * ((full[0] - part[0]) - A * (full[1] - part[1]))
        return PsiValue(float(psi), float(A), float(2.0 * full[1]), edges)

    def psi(self, point, lam: float = 1.0) -> float:
        return self.psi_full(point, lam).psi

    def loop_integral(self, eta: float, lam: float = 1.0) -> tuple[float, float]:
        """Integral of the source ``gamma (Upsilon - A(Upsilon))`` once around the orbit.

        Both branches are integrated separately on their own adaptive panels
        (twice the node count of the averaging pass).  Returns the signed
        integral and the scale ``gamma * loop integral of (Upsilon + A)``,
        which bounds the integral of the absolute source from above.
        """
        orb = make_orbit(self.spec, eta, lam)
        A = self.psi_full((orb.c, math.sqrt(2.0 * (eta - eval_potential(self.spec, orb.c, lam)))),
                          lam).a_upsilon
        s = QuadratureSettings(2 * self.settings.nodes_per_panel, self.settings.max_refinements,
                               self.settings.rel_tol)
        cut = self.cutoff
        g = self.gamma

        def branch(sign):
            def f(theta):
                q, r, w = orb.nodes(theta)
                pp = sign * r
                src = g * (pp * pp * chi(0.5 * pp * pp + eval_potential(self.spec, q, 1.0), cut) - A)
                return np.vstack([src * w, (src + 2.0 * g * A) * w])
            vals, _ = quadrature.adaptive(f, -HALF_PI, HALF_PI, s)
            return vals

        up, down = branch(1.0), branch(-1.0)
        return float(up[0] + down[0]), float(up[1] + down[1])

    # -- derivatives and generator ------------------------------------------

    def psi_derivatives(self, point, lam: float = 1.0, max_halvings: int = 3):
        """``(dPsi/dP, d2Psi/dP2, Psi, A(Upsilon))`` by central differences in ``P``.

        The step starts at ``1e-4 * max(1, sqrt(H))``; estimates at ``h`` and
        ``h/2`` must agree to 1e-3 (relative to the natural size of each
        derivative on that orbit), otherwise ``h`` is halved.  All stencil
        points reuse the base point's quadrature panels so that quadrature
        error varies smoothly along the stencil.
        """
        q, p = float(point[0]), float(point[1])
        base = self.psi_full((q, p), lam)
        if base.edges is None:
            return 0.0, 0.0, 0.0, 0.0
        eta = float(eval_hamiltonian(self.spec, (q, p), lam))
        edges = base.edges
        scale_psi = self.gamma * eta * base.period / (2.0 * math.pi)
        s1 = scale_psi / math.sqrt(2.0 * eta)
        s2 = scale_psi / (2.0 * eta)

        def ps(pp):
            return self.psi_full((q, pp), lam, edges).psi

        h = 1e-4 * max(1.0, math.sqrt(eta))
        prev = None
        for _ in range(max_halvings + 1):
            if prev is None:
                fp, fm = ps(p + h), ps(p - h)
                d1h = (fp - fm) / (2 * h)
                d2h = (fp - 2 * base.psi + fm) / (h * h)
            else:
                d1h, d2h = prev
            hp, hm = ps(p + 0.5 * h), ps(p - 0.5 * h)
            d1 = (hp - hm) / h
            d2 = (hp - 2 * base.psi + hm) / (0.25 * h * h)
            if abs(d1 - d1h) <= 1e-3 * max(abs(d1), s1) and abs(d2 - d2h) <= 1e-3 * max(abs(d2), s2):
                return (4 * d1 - d1h) / 3, (4 * d2 - d2h) / 3, base.psi, base.a_upsilon
            prev = (d1, d2)
            h *= 0.5
        raise StepBreakdown(f"finite differences did not settle at ({q:.6g}, {p:.6g})")

    def lyapunov_value(self, point) -> float:
        H = float(eval_hamiltonian(self.spec, point, 1.0))
        return H + self.psi(point, 1.0)

    def generator_terms(self, point) -> GeneratorTerms:
        q, p = float(point[0]), float(point[1])
        g = self.gamma
        s2 = self.params.sigma**2
        H = float(eval_hamiltonian(self.spec, (q, p), 1.0))
        if H <= self.eta_star.value:
            G = -g * p * p
            return GeneratorTerms(0.5 * s2 + G, 0.0, 0.0, G, 0.0, H, 0.0, 0.0)
        d1, d2, psi, A = self.psi_derivatives((q, p), 1.0)
        E = -g * p * d1 + 0.5 * s2 * d2
        G = g * p * p * (chi(H, self.cutoff) - 1.0)
        value = -g * A + 0.5 * s2 + E + G
        return GeneratorTerms(value, A, E, G, psi, H + psi, d1, d2)

    def generator_on_V(self, point) -> float:
        return self.generator_terms(point).value


def orbit_points(spec: PotentialSpec, eta: float, n_angles: int, lam: float = 1.0):
    """``n_angles`` points on the level set, evenly spaced in the orbit angle."""
    orb = make_orbit(spec, eta, lam)
    phi = 2.0 * math.pi * np.arange(n_angles) / n_angles
    upper = phi < math.pi
    theta = np.where(upper, phi - HALF_PI, 1.5 * math.pi - phi)
    q, gap = orb.q_gap(theta)
    p = np.sqrt(2.0 * gap) * np.where(upper, 1.0, -1.0)
    return q, p


def drift_certificate(model: LyapunovModel, delta: float = 0.2, n_levels: int = 64,
                      n_angles: int = 128, h_min: float | None = None, h_max: float = 1e6,
                      box: int = 32, comparability_cut: float = 1e3,
                      raise_on_growth: bool = True) -> DriftCertificate:
    """Grid scan of ``LV + gamma (Lambda* - delta) V``.

    Grid: ``n_levels`` log-spaced energies in ``[h_min, h_max]`` times
    ``n_angles`` orbit angles, plus a ``box x box`` grid covering the sublevel
    set ``H <= eta* + 2``.  ``C`` is the (non-negative) maximum; the scan
    reports boundary growth when the maximum over the outermost shell exceeds
    that over the next shell.
    """
    spec = model.spec
    es = model.eta_star.value
    h_min = es / 10.0 if h_min is None else h_min
    g = model.gamma
    rate = g * (model.lambda_star - delta)
    levels = np.geomspace(h_min, h_max, n_levels)
    pts, shell_idx = [], []
    for i, H in enumerate(levels):
        try:
            q, p = orbit_points(spec, float(H), n_angles)
        except (MultipleWells, BelowMinimum):
            continue
        pts.extend(zip(q.tolist(), p.tolist()))
        shell_idx.extend([i] * len(q))
    top = es + 2.0
    qm, qp = turning_points(spec, top)
    pmax = math.sqrt(2.0 * (top - eval_potential(spec, 0.5 * (qm + qp))))
    for q in np.linspace(qm, qp, box):
        for p in np.linspace(-1.5 * pmax, 1.5 * pmax, box):
            if eval_hamiltonian(spec, (q, p)) <= top:
                pts.append((float(q), float(p)))
                shell_idx.append(-1)
    shell_idx = np.array(shell_idx)
    S = np.empty(len(pts))
    V = np.empty(len(pts))
    H = np.empty(len(pts))
    for k, pt in enumerate(pts):
        t = model.generator_terms(pt)
        S[k] = t.value + rate * t.V
        V[k] = t.V
        H[k] = float(eval_hamiltonian(spec, pt))
    C = float(max(0.0, S.max()))
    ratio = S / (1.0 + np.abs(V))
    k = int(np.argmax(S))
    shells = sorted(set(shell_idx[shell_idx >= 0].tolist()))
    shell_max = [float(S[shell_idx == i].max()) for i in shells]
    growth = len(shell_max) >= 2 and shell_max[-1] > shell_max[-2]
    psi = V - H
    hi = H >= comparability_cut
    delta_H = float(np.max(np.abs(psi[hi]) / H[hi])) if hi.any() else float("nan")
    C_H = float(max(0.0, np.max(np.abs(psi) - (delta_H if hi.any() else 0.0) * H)))
    cert = DriftCertificate(
        delta=delta, C=C,
        grid={"levels": n_levels, "angles": n_angles, "h_min": float(h_min), "h_max": float(h_max),
              "box": box, "points": len(pts)},
        worst_ratio=float(ratio.max()), worst_point=tuple(map(float, pts[k])),
        delta_H=delta_H, C_H=C_H, comparability_cut=comparability_cut,
        shell_energies=[float(levels[i]) for i in shells], shell_max=shell_max,
        boundary_growth=bool(growth),
    )
    if growth and raise_on_growth:
        raise BoundaryGrowth(
            f"scan maximum still rising at H = {levels[shells[-1]]:.3g}: "
            f"{shell_max[-2]:.4g} -> {shell_max[-1]:.4g}", cert)
    return cert

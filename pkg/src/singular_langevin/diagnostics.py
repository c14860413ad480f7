"""Experiments: energy decay, Gibbs convergence, exponential moments, minorization
and the windowed energy average for quadratic confinement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats
from scipy.special import logsumexp

from .errors import GeometryMismatch, InsufficientSamples, WindowTooLong
from .orbit import HALF_PI, LambdaTable, eta_star as compute_eta_star, lambda_star, make_orbit, period
from .potential import LangevinParams, PotentialSpec, eval_potential, potential_minimum
from .simulate import IntegratorSettings, integrate_reduced, simulate_ensemble

# ---------------------------------------------------------------------------
# mean-energy prediction
# ---------------------------------------------------------------------------


@dataclass
class PredictedCurve:
    times: np.ndarray
    eta: np.ndarray
    mode: str
    eta_inf: float


def _rate_star(spec):
    return lambda_star(spec.alpha1)


def predicted_energy_curve(spec: PotentialSpec, params: LangevinParams, H0: float, t_end: float,
                           mode: str = "lambda_star", table: LambdaTable | None = None,
                           n_out: int = 401) -> PredictedCurve:
    """Solve ``d eta/dt = -gamma Lambda eta + sigma**2 / 2`` on ``[0, t_end]``.

    ``mode="lambda_star"`` uses the constant ``Lambda*`` and the closed form;
    ``mode="lambda_of_eta"`` uses the tabulated ``Lambda(eta)`` and classic RK4
    with ``dt = 1e-3 min(1, 1 / (gamma Lambda*))``.
    """
    g = params.gamma
    ls = _rate_star(spec)
    s2 = params.sigma**2
    eta_inf = s2 / (2.0 * g * ls) if g > 0 else math.inf
    t_out = np.linspace(0.0, t_end, n_out)
    if mode == "lambda_star":
        if g > 0:
            eta = (H0 - eta_inf) * np.exp(-g * ls * t_out) + eta_inf
        else:
            eta = H0 + 0.5 * s2 * t_out
        return PredictedCurve(t_out, eta, mode, eta_inf)
    if mode != "lambda_of_eta":
        raise ValueError(f"unknown mode {mode!r}")
    if table is None:
        table = LambdaTable(spec, compute_eta_star(spec).value, n_nodes=128)
    log_eta, lam_vals, es = np.log(table.eta), table.values, table.eta_star

    def lam(e):
        if e < es:
            return 0.0
        return float(np.interp(math.log(e), log_eta, lam_vals))

    def rhs(e):
        return -g * lam(e) * e + 0.5 * s2

    return PredictedCurve(t_out, rk4_scalar(rhs, H0, t_out, 1e-3 * min(1.0, 1.0 / (g * ls)) if g > 0
                                            else 1e-3), mode, eta_inf)


def rk4_scalar(rhs, y0: float, t_out: np.ndarray, h: float) -> np.ndarray:
    """Classic RK4 for a scalar autonomous ODE, sampled at ``t_out`` (steps land on them)."""
    out = np.empty(t_out.size)
    y, t = float(y0), 0.0
    out[0] = y
    for j in range(1, t_out.size):
        target = t_out[j]
        n = max(1, int(math.ceil((target - t) / h - 1e-9)))
        dt = (target - t) / n
        for _ in range(n):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * dt * k1)
            k3 = rhs(y + 0.5 * dt * k2)
            k4 = rhs(y + dt * k3)
            y += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        t = target
        out[j] = y
    return out


# ---------------------------------------------------------------------------
# energy decay
# ---------------------------------------------------------------------------


@dataclass
class DecayFit:
    slope: float
    stderr: float
    window: tuple[float, float]
    n_paths: int
    n_points: int = 0

    def relative_error(self, target: float) -> float:
        return abs(self.slope - target) / abs(target)


@dataclass
class DecayResult:
    times: np.ndarray
    mean_H: np.ndarray
    median_H: np.ndarray
    fit: DecayFit
    predicted: dict
    n_blowups: int
    eta_star: float
    target_slope: float


def fit_log_slope(times, values, lo: float, hi: float, n_paths: int) -> DecayFit:
    """Least-squares slope of ``log(values)`` over samples with ``lo <= values <= hi``."""
    times = np.asarray(times)
    values = np.asarray(values)
    sel = (values >= lo) & (values <= hi) & np.isfinite(values)
    if sel.sum() < 3:
        raise ValueError(f"fit window [{lo:.4g}, {hi:.4g}] holds {int(sel.sum())} samples")
    r = stats.linregress(times[sel], np.log(values[sel]))
    return DecayFit(float(r.slope), float(r.stderr), (float(hi), float(lo)), n_paths, int(sel.sum()))


def orbit_phase_points(spec: PotentialSpec, H0: float, n: int, n_grid: int = 20001):
    """``n`` points on the ``H = H0`` orbit, evenly spaced in *time* along the orbit."""
    orb = make_orbit(spec, H0)
    theta = np.linspace(-HALF_PI, HALF_PI, n_grid)
    q, r, w = orb.nodes(theta)
    w = np.where(np.isfinite(w), w, 0.0)
    w[0] = w[1]
    w[-1] = w[-2]
    cum = integrate.cumulative_trapezoid(w, theta, initial=0.0)
    half = cum[-1]
    s = (np.arange(n) + 0.5) / n * 2.0 * half
    upper = s < half
    ss = np.where(upper, s, s - half)
    th = np.interp(ss, cum, theta)
    th = np.where(upper, th, -th)  # lower branch runs from Q+ back to Q-
    qq, gap = orb.q_gap(th)
    pp = np.sqrt(2.0 * gap) * np.where(upper, 1.0, -1.0)
    return qq, pp


def energy_decay_experiment(spec: PotentialSpec, params: LangevinParams, H0: float, n_paths: int,
                            t_end: float, settings: IntegratorSettings = IntegratorSettings(),
                            seed: int = 0, n_times: int = 401, window_factor: float = 100.0
                            ) -> DecayResult:
    """Ensemble decay from the ``H = H0`` orbit and a slope fit of ``log E[H_t]``.

    The fit window is ``window_factor * eta* <= E[H_t] <= H0``.
    """
    if n_paths < 16:
        raise ValueError("n_paths must be >= 16")
    es = compute_eta_star(spec).value
    q0, p0 = orbit_phase_points(spec, H0, n_paths)
    times = np.linspace(0.0, t_end, n_times)
    ens = simulate_ensemble(spec, params, q0, p0, times, settings, seed)
    H = ens.energies(spec)
    mean_H = H.mean(axis=0)
    median_H = np.median(H, axis=0)
    fit = fit_log_slope(times, mean_H, window_factor * es, H0, n_paths)
    predicted = {
        "lambda_star": predicted_energy_curve(spec, params, H0, t_end, "lambda_star", n_out=n_times),
        "lambda_of_eta": predicted_energy_curve(spec, params, H0, t_end, "lambda_of_eta",
                                                n_out=n_times),
    }
    return DecayResult(times, mean_H, median_H, fit, predicted, ens.n_blowups, es,
                       -params.gamma * _rate_star(spec))


def deterministic_decay_check(spec: PotentialSpec, gamma: float, H0: float,
                              settings: IntegratorSettings = IntegratorSettings(),
                              drop: float = 100.0, t_end: float | None = None) -> DecayFit:
    """Single damped path without noise from ``(Q+(H0), 0)``; slope of ``log H`` on ``[H0/drop, H0]``."""
    params = LangevinParams(gamma, 0.0)
    orb = make_orbit(spec, H0)
    if gamma == 0:
        t_end = t_end or 10.0 * period(spec, H0)
        rec = integrate_reduced(spec, params, (orb.qp, 0.0), t_end, settings)
        r = stats.linregress(rec.times, np.log(rec.energies))
        return DecayFit(float(r.slope), float(r.stderr), (H0, H0), 1, rec.times.size)
    if t_end is None:
        t_end = 1.25 * math.log(drop) / (gamma * _rate_star(spec))
    from dataclasses import replace
    stride = max(settings.record_stride, 256)
    rec = integrate_reduced(spec, params, (orb.qp, 0.0), t_end, replace(settings, record_stride=stride))
    return fit_log_slope(rec.times, rec.energies, H0 / drop, H0, 1)


def wiggle_amplitude(times, series, window: float) -> float:
    """Median over sliding windows of the max residual of ``log(series)`` about a local line."""
    times = np.asarray(times)
    y = np.log(np.asarray(series))
    out = []
    start = times[0]
    while start + window <= times[-1]:
        sel = (times >= start) & (times <= start + window)
        if sel.sum() >= 8:
            c = np.polyfit(times[sel], y[sel], 1)
            out.append(np.max(np.abs(y[sel] - np.polyval(c, times[sel]))))
        start += 0.5 * window
    if not out:
        raise WindowTooLong("series shorter than one window")
    return float(np.median(out))


# ---------------------------------------------------------------------------
# Gibbs measure and histograms
# ---------------------------------------------------------------------------


@dataclass
class Histogram2D:
    q_edges: np.ndarray
    p_edges: np.ndarray
    mass: np.ndarray  # (nq, np), sums to the captured probability

    def centers(self):
        qc = 0.5 * (self.q_edges[1:] + self.q_edges[:-1])
        pc = 0.5 * (self.p_edges[1:] + self.p_edges[:-1])
        return qc, pc

    def same_geometry(self, other: "Histogram2D") -> bool:
        return (self.q_edges.shape == other.q_edges.shape and self.p_edges.shape == other.p_edges.shape
                and np.array_equal(self.q_edges, other.q_edges)
                and np.array_equal(self.p_edges, other.p_edges))

    @classmethod
    def from_samples(cls, q, p, q_edges, p_edges) -> "Histogram2D":
        counts, _, _ = np.histogram2d(q, p, bins=[q_edges, p_edges])
        return cls(np.asarray(q_edges), np.asarray(p_edges), counts / max(len(q), 1))


def weighted_tv(h1: Histogram2D, h2: Histogram2D, spec: PotentialSpec, beta: float) -> float:
    """``sum_bins exp(beta H(center)) |m1 - m2|``; ``beta = 0`` is the plain total variation."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if not h1.same_geometry(h2):
        raise GeometryMismatch("histograms have different bin edges")
    diff = np.abs(h1.mass - h2.mass)
    if beta == 0:
        return float(diff.sum())
    qc, pc = h1.centers()
    H = eval_potential(spec, qc)[:, None] + 0.5 * pc[None, :] ** 2
    logw = beta * H
    nz = diff > 0
    if not nz.any():
        return 0.0
    return float(np.exp(logsumexp(logw[nz], b=diff[nz])))


class GibbsTarget:
    """Factorised Gibbs density ``exp(-H/T)``: q-marginal by quadrature, p-marginal Gaussian."""

    def __init__(self, spec: PotentialSpec, temperature: float, tail_mass: float = 1e-6):
        self.spec = spec
        self.T = float(temperature)
        self.q_min, self.u_min = potential_minimum(spec)
        T = self.T

        def dens(q):
            return np.exp(-(eval_potential(spec, q) - self.u_min) / T)

        self._dens = dens
        lo, hi = self.q_min, self.q_min
        # grow the range until each tail carries < tail_mass / 2 of the (provisional) total
        step = 0.05 * self.q_min
        while dens(lo) > 1e-300 and lo - step > 0 and dens(lo) > tail_mass * 1e-3:
            lo -= step
        lo = max(lo, 1e-6 * self.q_min)
        while dens(hi) > tail_mass * 1e-3:
            hi += step
        grid = np.linspace(lo, hi, 20001)
        pdf = dens(grid)
        cdf = integrate.cumulative_trapezoid(pdf, grid, initial=0.0)
        self.Z = float(cdf[-1])
        cdf /= cdf[-1]
        i_lo = max(0, int(np.searchsorted(cdf, 0.5 * tail_mass)) - 1)
        i_hi = min(grid.size - 1, int(np.searchsorted(cdf, 1.0 - 0.5 * tail_mass)) + 1)
        self.q_lo, self.q_hi = float(grid[i_lo]), float(grid[i_hi])
        self._grid, self._cdf = grid, cdf

    def q_cdf(self, q):
        return np.interp(q, self._grid, self._cdf)

    def p_range(self, width: float = 8.0):
        s = math.sqrt(self.T)
        return -width * s, width * s

    def histogram(self, q_edges, p_edges) -> Histogram2D:
        mq = np.array([integrate.quad(self._dens, a, b, epsabs=0, epsrel=1e-10, limit=200)[0]
                       for a, b in zip(q_edges[:-1], q_edges[1:])]) / self.Z
        mp = np.diff(stats.norm.cdf(p_edges, scale=math.sqrt(self.T)))
        return Histogram2D(np.asarray(q_edges), np.asarray(p_edges), np.outer(mq, mp))

    def sample(self, n: int, rng: np.random.Generator):
        """Rejection sampling of ``q`` (uniform proposal on the support) and exact Gaussian ``p``."""
        out = np.empty(0)
        while out.size < n:
            m = max(2 * (n - out.size), 1024)
            qs = rng.uniform(self.q_lo, self.q_hi, m)
            acc = rng.uniform(0.0, 1.0, m) < self._dens(qs)
            out = np.concatenate([out, qs[acc]])
        return out[:n], rng.normal(0.0, math.sqrt(self.T), n)


@dataclass
class GibbsReport:
    p_var: float
    p_var_se: float
    q_ks: float
    q_ks_critical: float
    p_ks: float
    q_mode: float
    q_min: float
    bin_width_q: float
    tv: list
    checkpoints: list
    n_samples: int
    n_thinned: int
    histogram: Histogram2D = field(repr=False)
    target: Histogram2D = field(repr=False)

    @property
    def tv_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.tv, self.tv[1:]))

    @property
    def variance_ok(self) -> bool:
        return abs(self.p_var - self.T) <= 3.0 * self.p_var_se

    T: float = 1.0


def batch_means_se(x: np.ndarray, n_batches: int = 50) -> float:
    """Standard error of the mean of a correlated series by non-overlapping batch means."""
    m = x.size // n_batches
    b = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(b.std(ddof=1) / math.sqrt(n_batches))


def gibbs_compare(spec: PotentialSpec, params: LangevinParams, burn_in: float, t_end: float,
                  bins: tuple[int, int] = (128, 128), seed: int = 0, start=None,
                  sample_dt: float = 0.1, thin: float = 2.0, checkpoints=None,
                  settings: IntegratorSettings = IntegratorSettings(),
                  coverage: float = 0.99) -> GibbsReport:
    """Long single path compared with the Gibbs density.

    Samples every ``sample_dt`` after ``burn_in``.  KS statistics use samples
    thinned to spacing ``thin``; the p-variance standard error uses batch
    means over the full series.  ``tv`` holds the total variation between the
    running histogram (samples up to each checkpoint, taken from time 0) and
    the target.  Raises :class:`InsufficientSamples` when a target bin inside
    the central ``coverage`` of the target mass expects fewer than 5 samples.
    """
    target_d = GibbsTarget(spec, params.temperature)
    if start is None:
        start = (target_d.q_min, 0.0)
    times = np.arange(0.0, t_end + 0.5 * sample_dt, sample_dt)
    ens = simulate_ensemble(spec, params, [start[0]], [start[1]], times, settings, seed)
    q_all, p_all = ens.q[0], ens.p[0]
    q_edges = np.linspace(target_d.q_lo, target_d.q_hi, bins[0] + 1)
    p_edges = np.linspace(*target_d.p_range(), bins[1] + 1)
    target = target_d.histogram(q_edges, p_edges)
    keep = times >= burn_in
    q, p = q_all[keep], p_all[keep]
    n = q.size
    order = np.sort(target.mass.ravel())[::-1]
    cut = order[min(np.searchsorted(np.cumsum(order), coverage), order.size - 1)]
    core = target.mass >= cut
    if np.min(target.mass[core]) * n < 5:
        raise InsufficientSamples(
            f"{n} samples: smallest core bin expects {np.min(target.mass[core]) * n:.3g} < 5")
    hist = Histogram2D.from_samples(q, p, q_edges, p_edges)
    step = max(1, int(round(thin / sample_dt)))
    qt, pt = q[::step], p[::step]
    q_ks = float(stats.kstest(qt, target_d.q_cdf).statistic)
    p_ks = float(stats.kstest(pt, "norm", args=(0.0, math.sqrt(params.temperature))).statistic)
    crit = float(stats.kstwo.ppf(0.99, qt.size))
    p2 = p * p
    p_var = float(p2.mean())
    p_var_se = batch_means_se(p2)
    qc = 0.5 * (q_edges[1:] + q_edges[:-1])
    q_mode = float(qc[np.argmax(hist.mass.sum(axis=1))])
    if checkpoints is None:
        checkpoints = [t_end / 4, t_end / 2, t_end]
    tv = []
    for tc in checkpoints:
        sel = times <= tc
        h = Histogram2D.from_samples(q_all[sel], p_all[sel], q_edges, p_edges)
        tv.append(weighted_tv(h, target, spec, 0.0))
    return GibbsReport(p_var, p_var_se, q_ks, crit, p_ks, q_mode, target_d.q_min,
                       float(q_edges[1] - q_edges[0]), tv, list(checkpoints), n, int(qt.size),
                       hist, target, T=params.temperature)


# ---------------------------------------------------------------------------
# exponential moments
# ---------------------------------------------------------------------------


@dataclass
class ExpMomentSeries:
    beta: float
    times: np.ndarray
    log_values: np.ndarray  # log of (1/N) sum exp(beta H_t)
    kappa: float
    log_K: float  # K is kept in log form: it scales with m(0), which may overflow
    bounded: bool
    n_paths: int

    @property
    def K(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_K))

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.log_values)))

    def envelope(self) -> np.ndarray:
        """``exp(-kappa t) m(0) + K t`` in log form."""
        l0 = self.log_values[0]
        return np.logaddexp(l0 - self.kappa * self.times,
                            self.log_K + np.log(np.maximum(self.times, 1e-300)))


def exp_moment_check(spec: PotentialSpec, params: LangevinParams, beta: float, n_paths: int,
                     t_end: float, seed: int = 0, H_start: float | None = None, starts=None,
                     n_times: int = 101, settings: IntegratorSettings = IntegratorSettings()
                     ) -> ExpMomentSeries:
    """Ensemble mean of ``exp(beta H_t)`` in log-sum-exp form with an envelope fit.

    Starts: ``starts=(q, p)`` arrays, or points evenly phased on ``H = H_start``.
    Envelope ``m(t) <= exp(-kappa t) m(0) + K t``: ``kappa >= 0`` is fitted by
    bounded least squares on the log series, then ``K >= 0`` is the smallest
    value making the envelope hold at every sample.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if starts is None:
        es = compute_eta_star(spec).value
        H_start = H_start if H_start is not None else 10.0 * es
        starts = orbit_phase_points(spec, H_start, n_paths)
    q0, p0 = starts
    times = np.linspace(0.0, t_end, n_times)
    ens = simulate_ensemble(spec, params, q0, p0, times, settings, seed)
    H = ens.energies(spec)
    logv = logsumexp(beta * H, axis=0) - math.log(H.shape[0])
    if beta == 0:
        return ExpMomentSeries(beta, times, logv, 0.0, -math.inf, True, n_paths)
    rel = logv - logv[0]  # log(m(t) / m(0))

    def resid(x):
        kappa, logk = x
        model = np.logaddexp(-kappa * times, logk + np.log(np.maximum(times, 1e-300)))
        return model - rel

    # from a high start the series may fall far below m(0): let log K follow it
    lo = min(-700.0, float(rel.min()) - 50.0)
    x0 = [1.0, float(np.clip(rel[-1] - math.log(t_end), lo + 1.0, 49.0))]
    sol = optimize.least_squares(resid, x0=x0, bounds=([0.0, lo], [np.inf, 50.0]))
    kappa = float(sol.x[0])
    # smallest K (relative to m(0)) so that the envelope dominates every sample
    t_pos = times[1:]
    excess = np.exp(rel[1:]) - np.exp(-kappa * t_pos)
    k_rel = max(float(np.max(excess / t_pos)), 0.0, float(np.exp(sol.x[1])))
    log_K = math.log(k_rel) + float(logv[0]) if k_rel > 0 else -math.inf
    bounded = bool(np.all(np.isfinite(logv)) and
                   np.max(rel) <= math.log1p(k_rel * t_end) + 1e-12)
    return ExpMomentSeries(beta, times, logv, kappa, log_K, bounded, n_paths)


# ---------------------------------------------------------------------------
# minorization
# ---------------------------------------------------------------------------


@dataclass
class MinorizationEstimate:
    eta: float
    times: list
    starts: list
    overlap: list
    overlap_se: list
    q_edges: np.ndarray = field(repr=False)
    p_edges: np.ndarray = field(repr=False)
    n_paths: int = 0


def minorization_probe(spec: PotentialSpec, params: LangevinParams, eta: float, times,
                       n_paths: int, bins: int = 48, seed: int = 0, n_boot: int = 20,
                       settings: IntegratorSettings = IntegratorSettings()) -> MinorizationEstimate:
    """Common mass of the transition laws from four starts on ``H = eta``.

    Starts: both turning points ``(Q-, 0)``, ``(Q+, 0)`` and the two points
    above the potential minimum.  For each horizon, per-start histograms on a
    shared geometry (covering the pooled samples) are reduced to
    ``overlap = sum_bins min_start mass``.  A bootstrap over paths gives the
    Monte Carlo error.
    """
    if n_paths < 100:
        raise InsufficientSamples("minorization probe needs at least 100 paths per start")
    times = sorted(float(t) for t in times)
    orb = make_orbit(spec, eta)
    qmin, umin = potential_minimum(spec)
    pm = math.sqrt(2.0 * (eta - umin))
    starts = [(orb.qm, 0.0), (orb.qp, 0.0), (qmin, pm), (qmin, -pm)]
    qs, ps = [], []
    for k, (q0, p0) in enumerate(starts):
        ens = simulate_ensemble(spec, params, np.full(n_paths, q0), np.full(n_paths, p0), times,
                                settings, seed, first_index=k * n_paths)
        qs.append(ens.q)
        ps.append(ens.p)
    rng = np.random.default_rng(seed)
    overlap, overlap_se = [], []
    q_edges_all, p_edges_all = None, None
    for j, _ in enumerate(times):
        qa = np.concatenate([x[:, j] for x in qs])
        pa = np.concatenate([x[:, j] for x in ps])
        q_edges = np.linspace(*np.quantile(qa, [0.0005, 0.9995]), bins + 1)
        p_edges = np.linspace(*np.quantile(pa, [0.0005, 0.9995]), bins + 1)
        q_edges[0], q_edges[-1] = min(q_edges[0], qa.min()), max(q_edges[-1], qa.max())
        p_edges[0], p_edges[-1] = min(p_edges[0], pa.min()), max(p_edges[-1], pa.max())

        def ov(idx):
            m = [np.histogram2d(qs[k][idx[k], j], ps[k][idx[k], j], bins=[q_edges, p_edges])[0]
                 / len(idx[k]) for k in range(len(starts))]
            return float(np.minimum.reduce(m).sum())

        base = ov([np.arange(n_paths)] * len(starts))
        boots = [ov([rng.integers(0, n_paths, n_paths) for _ in starts]) for _ in range(n_boot)]
        overlap.append(base)
        overlap_se.append(float(np.std(boots, ddof=1)))
        q_edges_all, p_edges_all = q_edges, p_edges
    return MinorizationEstimate(eta, times, starts, overlap, overlap_se, q_edges_all, p_edges_all,
                                n_paths)


# ---------------------------------------------------------------------------
# windowed energy average
# ---------------------------------------------------------------------------


@dataclass
class WindowedAverage:
    times: np.ndarray
    V: np.ndarray
    H: np.ndarray
    window_decay: np.ndarray  # (H_t - H_{t - tau}) / tau
    predicted_decay: np.ndarray  # -gamma Lambda* V_t (+ sigma^2 / 2)


def windowed_energy_average(times, H, tau_star: float, gamma: float = 0.0,
                            rate: float = 1.0, sigma: float = 0.0) -> WindowedAverage:
    """``V_t = (1/tau) int_{t-tau}^t H ds`` by the trapezoid rule on the recorded series.

    Returned for ``t >= t_0 + tau``.  Also reports the window-differenced decay
    ``(H_t - H_{t-tau}) / tau`` next to ``-gamma * rate * V_t + sigma**2 / 2``.
    """
    times = np.asarray(times, dtype=float)
    H = np.asarray(H, dtype=float)
    if times[-1] - times[0] < tau_star:
        raise WindowTooLong(f"horizon {times[-1] - times[0]:.4g} shorter than window {tau_star:.4g}")
    I = integrate.cumulative_trapezoid(H, times, initial=0.0)
    sel = times >= times[0] + tau_star
    t = times[sel]
    back = t - tau_star
    I_back = np.interp(back, times, I)
    V = (I[sel] - I_back) / tau_star
    H_back = np.interp(back, times, H)
    wd = (H[sel] - H_back) / tau_star
    return WindowedAverage(t, V, H[sel], wd, -gamma * rate * V + 0.5 * sigma**2)

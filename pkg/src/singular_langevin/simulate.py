"""Stochastic integration of the reduced and the two-particle Langevin systems.

Reduced system (one relative coordinate, standard Wiener noise)::

    dq = p dt,    dp = -U'(q) dt - gamma p dt + sigma dW,    sigma**2 = 2 gamma T

Two-particle system: positions ``q1, q2`` interacting through ``U(q1 - q2)``,
each particle with its own friction and noise.  It is integrated in
centre-of-mass form: the mean momentum is an exact Ornstein-Uhlenbeck process
and the relative pair is a reduced system with potential ``U(2 q) / 2`` and
noise ``sigma / sqrt(2)``; both are driven by the same two independent
Wiener streams, so the split is exact.

Randomness: path ``i`` of a run with master seed ``s`` draws from
``numpy.random.Generator(PCG64(SeedSequence(s, spawn_key=(i,))))``.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import BlowupDetected, StepFloorHit
from .orbit import LambdaTable, eta_star, turning_points
from .potential import (
    FullState,
    LangevinParams,
    PhasePoint,
    PotentialSpec,
    eval_force,
    eval_hamiltonian,
    eval_potential,
    potential_minimum,
)

SCHEMES = {"euler_maruyama": K.EULER_MARUYAMA, "baoab_splitting": K.BAOAB}
TERMINATION = {K.RUNNING: "completed", K.BLOWUP: "blowup_detected", K.STEP_FLOOR: "step_floor_hit"}

# process-wide tally of path terminations (paths run, blowups, step-floor hits)
_TALLY = Counter()


def termination_counts() -> dict:
    """Paths simulated and abnormal terminations since the last reset."""
    return {"paths": _TALLY["paths"], "blowup_detected": _TALLY[K.BLOWUP],
            "step_floor_hit": _TALLY[K.STEP_FLOOR]}


def reset_termination_counts() -> None:
    _TALLY.clear()


def _tally(status) -> None:
    status = np.asarray(status)
    _TALLY["paths"] += status.size
    for code in (K.BLOWUP, K.STEP_FLOOR):
        _TALLY[code] += int(np.count_nonzero(status == code))


@dataclass(frozen=True)
class IntegratorSettings:
    scheme: str = "baoab_splitting"
    dt_max: float = 0.01
    steps_per_period: int = 200
    h_floor: float = 1e-12
    record_stride: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {sorted(SCHEMES)}")
        if not (self.dt_max > self.h_floor > 0):
            raise ValueError("need dt_max > h_floor > 0")
        if self.steps_per_period < 32:
            raise ValueError("steps_per_period must be >= 32")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RngSeedSpec:
    master_seed: int
    path_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.path_index),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # (n, 2) for (q, p) or (n, 4) for (q1, q2, p1, p2)
    energies: np.ndarray
    seed: RngSeedSpec
    params: LangevinParams
    integrator: IntegratorSettings
    terminated: str = "completed"
    n_steps: int = 0

    @property
    def is_full(self) -> bool:
        return self.states.shape[1] == 4

    def columns(self) -> list[str]:
        return ["t", "q1", "q2", "p1", "p2", "H0"] if self.is_full else ["t", "q", "p", "H"]

    def write_csv(self, path, config_hash: str = "") -> None:
        """CSV with a ``#`` header line carrying seed, config hash and termination cause."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# seed={self.seed.master_seed} path_index={self.seed.path_index} "
                     f"config_hash={config_hash} terminated={self.terminated}\n")
            w = csv.writer(fh)
            w.writerow(self.columns())
            for t, s, h in zip(self.times, self.states, self.energies):
                w.writerow([repr(float(t)), *(repr(float(x)) for x in s), repr(float(h))])


# ---------------------------------------------------------------------------
# tables and single steps
# ---------------------------------------------------------------------------

FORCE_LIMIT = 0.1


@dataclass(frozen=True)
class DynamicsTable:
    """Energy-indexed step-size ingredients on log-spaced nodes ``eta >= eta*``.

    ``log_tau``: orbit period.  ``log_fdt``: orbit-wide force limit
    ``0.1 sqrt(2 (eta - min U)) / max(|U'(Q-)|, |U'(Q+)|)``, i.e. a tenth of the
    time the fastest particle needs to reverse against the strongest force met
    on the orbit (the wall bounce).  Lookups are flat below the first node and
    power laws beyond the last.
    """

    log_eta: np.ndarray = field(repr=False)
    log_tau: np.ndarray = field(repr=False)
    tau_slope: float
    log_fdt: np.ndarray = field(repr=False)
    fdt_slope: float
    umin: float
    eta_star: float

    def kernel_args(self) -> tuple:
        return (self.log_eta, self.log_tau, float(self.tau_slope), self.log_fdt,
                float(self.fdt_slope))


@lru_cache(maxsize=64)
def dynamics_table(spec: PotentialSpec, n_nodes: int = 64) -> DynamicsTable:
    es = eta_star(spec).value
    table = LambdaTable(spec, es, n_nodes=n_nodes)
    umin = potential_minimum(spec)[1]
    fdt = np.empty(n_nodes)
    for i, eta in enumerate(table.eta):
        qm, qp = turning_points(spec, float(eta))
        wall = max(abs(eval_force(spec, qm)), abs(eval_force(spec, qp)))
        fdt[i] = FORCE_LIMIT * math.sqrt(2.0 * (eta - umin)) / wall
    le = np.log(table.eta)
    lf = np.log(fdt)
    return DynamicsTable(le, np.log(table.periods), 1.0 / spec.alpha1 - 0.5, lf,
                         float((lf[-1] - lf[-2]) / (le[-1] - le[-2])), umin, es)


def relative_spec(spec: PotentialSpec) -> PotentialSpec:
    """Potential ``U(2 q) / 2`` of the relative coordinate ``q = (q1 - q2) / 2``."""
    return PotentialSpec(tuple((a * 2.0 ** (e - 1.0), e) for a, e in spec.terms), 0.5 * spec.a0)


def step_reduced(spec: PotentialSpec, params: LangevinParams, point, dt: float, noise: float,
                 scheme: str = "baoab_splitting") -> PhasePoint:
    """One step of the chosen scheme from ``point`` driven by the standard normal ``noise``."""
    q0, p0 = float(point[0]), float(point[1])
    if not q0 > 0:
        raise BlowupDetected(f"q = {q0} is not positive")
    q, p, ok = K._step_np(np.array([q0]), np.array([p0]), np.array([float(dt)]),
                          np.array([float(noise)]), spec.coefficients, spec.exponents,
                          params.gamma, params.sigma, SCHEMES[scheme])
    if not ok[0]:
        raise BlowupDetected(f"step from ({q0}, {p0}) with dt={dt} left the domain")
    return PhasePoint(float(q[0]), float(p[0]))


def adaptive_dt(spec: PotentialSpec, point, settings: IntegratorSettings,
                table: DynamicsTable | None = None) -> float:
    """``min(tau(H) / steps_per_period, f(H), dt_max)``.

    The force limit ``f(H)`` is the orbit-wide bound described in
    :class:`DynamicsTable`; it depends on ``H`` only, so the step is constant
    along a deterministic orbit and the splitting keeps its long-time energy
    behaviour.
    """
    table = table or dynamics_table(spec)
    q, p = float(point[0]), float(point[1])
    dt = float(K.step_size_np(np.array([q]), np.array([p]), spec.coefficients, spec.exponents,
                              spec.a0, settings.steps_per_period, settings.dt_max,
                              *table.kernel_args())[0])
    if dt < settings.h_floor:
        raise StepFloorHit(f"required dt {dt:.3g} below floor {settings.h_floor:.3g}")
    return dt


# ---------------------------------------------------------------------------
# ensemble driver
# ---------------------------------------------------------------------------

@dataclass
class EnsembleResult:
    times: np.ndarray
    q: np.ndarray  # (n_paths, n_times)
    p: np.ndarray
    status: np.ndarray
    n_steps: np.ndarray
    qb: np.ndarray | None = None
    pb: np.ndarray | None = None

    @property
    def n_blowups(self) -> int:
        return int(np.sum(self.status == K.BLOWUP))

    def energies(self, spec: PotentialSpec) -> np.ndarray:
        return 0.5 * self.p**2 + eval_potential(spec, self.q)


class _Batch:
    """Mutable kernel state for a contiguous chunk of paths."""

    def __init__(self, q0, p0, seed, indices, block, full, qb0=None, pb0=None, rec_cap=0):
        n = len(q0)
        self.q = np.array(q0, dtype=float)
        self.p = np.array(p0, dtype=float)
        self.qb = np.zeros(n) if qb0 is None else np.array(qb0, dtype=float)
        self.pb = np.zeros(n) if pb0 is None else np.array(pb0, dtype=float)
        self.t = np.zeros(n)
        self.dtc = np.zeros(n)
        self.status = np.zeros(n, dtype=np.int64)
        self.flag = np.zeros(n, dtype=np.int64)
        self.nsteps = np.zeros(n, dtype=np.int64)
        self.gens = [RngSeedSpec(seed, int(i)).generator() for i in indices]
        self.noise = np.empty((n, block))
        for i, g in enumerate(self.gens):
            self.noise[i] = g.standard_normal(block)
        self.npos = np.zeros(n, dtype=np.int64)
        self.rec = np.zeros((n, max(rec_cap, 1), 5))
        self.rec_n = np.zeros(n, dtype=np.int64)
        self.full = full

    def run_to(self, t_stop, args, stride=0, on_full=None):
        stop = np.full(self.q.size, float(t_stop))
        while True:
            K.advance(self.q, self.p, self.qb, self.pb, self.t, self.dtc, self.status, self.flag,
                      self.nsteps, self.noise, self.npos, stop, self.rec, self.rec_n, stride,
                      *args)
            need = np.nonzero(self.flag == K.NEED_NOISE)[0]
            for i in need:
                self.noise[i] = self.gens[i].standard_normal(self.noise.shape[1])
                self.npos[i] = 0
            full = np.nonzero(self.flag == K.BUFFER_FULL)[0]
            if full.size:
                on_full()
            if need.size == 0 and full.size == 0:
                return


def _kernel_args(spec, gamma, sigma, settings, table, full):
    return (spec.coefficients, spec.exponents, spec.a0, float(gamma), float(sigma),
            SCHEMES[settings.scheme], bool(full), float(settings.steps_per_period),
            float(settings.dt_max), float(settings.h_floor), *table.kernel_args())


def simulate_ensemble(spec: PotentialSpec, params: LangevinParams, q0, p0, times: Sequence[float],
                      settings: IntegratorSettings = IntegratorSettings(), seed: int = 0,
                      first_index: int = 0, chunk: int = 16384, block: int | None = None
                      ) -> EnsembleResult:
    """Advance independent reduced-system paths and sample them at ``times``.

    Path ``k`` uses the stream of path index ``first_index + k``.  ``times``
    must be non-decreasing and non-negative; steps are clipped to land on each
    sample time exactly.  Terminated paths keep their last state (check
    ``status``).
    """
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("sample times must be non-negative and non-decreasing")
    if np.any(~(q0 > 0)):
        raise BlowupDetected("start positions must be positive")
    n = q0.size
    table = dynamics_table(spec)
    args = _kernel_args(spec, params.gamma, params.sigma, settings, table, False)
    Q = np.empty((n, times.size))
    P = np.empty((n, times.size))
    status = np.empty(n, dtype=np.int64)
    nsteps = np.empty(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        blk = block or int(np.clip(2 ** 22 // (hi - lo), 64, 4096)) // 2 * 2
        b = _Batch(q0[lo:hi], p0[lo:hi], seed, range(first_index + lo, first_index + hi), blk, False)
        for j, t in enumerate(times):
            b.run_to(t, args)
            Q[lo:hi, j] = b.q
            P[lo:hi, j] = b.p
        status[lo:hi] = b.status
        nsteps[lo:hi] = b.nsteps
    _tally(status)
    return EnsembleResult(times, Q, P, status, nsteps)


def _record_loop(batch: _Batch, t_end, args, stride, cap):
    out = [batch.rec[0, :0].copy()]

    def flush():
        k = int(batch.rec_n[0])
        out.append(batch.rec[0, :k].copy())
        batch.rec_n[0] = 0

    batch.run_to(t_end, args, stride=stride, on_full=flush)
    flush()
    return np.concatenate(out)


def integrate_reduced(spec: PotentialSpec, params: LangevinParams, start, t_end: float,
                      settings: IntegratorSettings = IntegratorSettings(), seed: int = 0,
                      path_index: int = 0, block: int = 4096) -> TrajectoryRecord:
    """Single path, recording every ``record_stride``-th step (plus the start)."""
    q0, p0 = float(start[0]), float(start[1])
    if not q0 > 0:
        raise BlowupDetected("start position must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    table = dynamics_table(spec)
    args = _kernel_args(spec, params.gamma, params.sigma, settings, table, False)
    cap = 4096
    b = _Batch([q0], [p0], seed, [path_index], block, False, rec_cap=cap)
    rows = _record_loop(b, t_end, args, settings.record_stride, cap)
    t = np.concatenate([[0.0], rows[:, 0]])
    qs = np.concatenate([[q0], rows[:, 1]])
    ps = np.concatenate([[p0], rows[:, 2]])
    if b.status[0] == K.RUNNING and t[-1] != b.t[0]:
        t, qs, ps = np.append(t, b.t[0]), np.append(qs, b.q[0]), np.append(ps, b.p[0])
    H = 0.5 * ps**2 + eval_potential(spec, qs)
    _tally(b.status)
    return TrajectoryRecord(t, np.column_stack([qs, ps]), H, RngSeedSpec(seed, path_index), params,
                            settings, TERMINATION[int(b.status[0])], int(b.nsteps[0]))


def integrate_full(spec: PotentialSpec, params: LangevinParams, start: FullState, t_end: float,
                   settings: IntegratorSettings = IntegratorSettings(), seed: int = 0,
                   path_index: int = 0, block: int = 4096) -> TrajectoryRecord:
    """Two-particle system via the exact centre-of-mass split.

    Each step draws two independent normals ``n1, n2`` (one per particle);
    the relative pair is driven by ``(n1 - n2) / sqrt(2)`` and the mean
    momentum by ``(n1 + n2) / sqrt(2)``, both with amplitude ``sigma / sqrt(2)``.
    The relative coordinate is taken as ``s (q1 - q2) / 2`` with ``s`` the sign
    of ``q1 - q2`` so that it is positive.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    s = 1.0 if start.q1 > start.q2 else -1.0
    qb0, pb0, qr, pr = start.to_com()
    rspec = relative_spec(spec)
    table = dynamics_table(rspec)
    sig = params.sigma / math.sqrt(2.0)
    args = _kernel_args(rspec, params.gamma, sig, settings, table, True)
    cap = 4096
    b = _Batch([s * qr], [s * pr], seed, [path_index], block, True, qb0=[qb0], pb0=[pb0],
               rec_cap=cap)
    rows = _record_loop(b, t_end, args, settings.record_stride, cap)
    first = np.array([[0.0, s * qr, s * pr, qb0, pb0]])
    rows = np.concatenate([first, rows])
    if b.status[0] == K.RUNNING and rows[-1, 0] != b.t[0]:
        rows = np.concatenate([rows, [[b.t[0], b.q[0], b.p[0], b.qb[0], b.pb[0]]]])
    t, q, p, qb, pb = rows.T
    q1, q2 = qb + s * q, qb - s * q
    p1, p2 = pb + s * p, pb - s * p
    H0 = 0.5 * (p1**2 + p2**2) + eval_potential(spec, 2.0 * q)
    _tally(b.status)
    return TrajectoryRecord(t, np.column_stack([q1, q2, p1, p2]), H0, RngSeedSpec(seed, path_index),
                            params, settings, TERMINATION[int(b.status[0])], int(b.nsteps[0]))


def reduced_energy(spec: PotentialSpec, q, p):
    return eval_hamiltonian(spec, (q, p))

"""Batch stepping kernels for the reduced and the centre-of-mass Langevin systems.

Two interchangeable backends advance a batch of paths to per-path stop
times:

* a numba ``@njit(parallel=True)`` kernel looping over paths with ``prange``;
* a vectorised pure-numpy kernel (every active path takes one step per sweep).

Set ``SINGULAR_LANGEVIN_NO_NUMBA=1`` to force the numpy backend (also used
automatically when numba is missing).  ``SINGULAR_LANGEVIN_THREADS`` caps the
numba thread count.

Randomness is supplied by the caller as per-path blocks of standard normals
(``noise[i, npos[i]:]``); a kernel returns control when a path needs a fresh
block, so both backends consume identical streams.

Step sizes live on the grid ``dt_max * 2**(-k/8)``.  Each path holds its
current step ``dtc``; it is lowered to the largest grid value not above the
adaptive target whenever it exceeds the target, and raised only once it has
fallen more than two grid levels below it.  Along a conservative orbit the
target wobbles by O(dt**2) only, so the step stays fixed and the splitting
is exactly symplectic there.

Per-path ``flag`` after a call: ``AT_STOP`` (reached its stop time),
``NEED_NOISE``, ``BUFFER_FULL`` (record buffer exhausted) or ``TERMINATED``.
Termination causes live in ``status``: ``RUNNING``, ``BLOWUP``, ``STEP_FLOOR``.
"""

from __future__ import annotations

import math
import os

import numpy as np

RUNNING, BLOWUP, STEP_FLOOR = 0, 1, 2
AT_STOP, NEED_NOISE, BUFFER_FULL, TERMINATED = 0, 1, 2, 3
EULER_MARUYAMA, BAOAB = 0, 1
GRID_LEVELS = 8  # grid values per factor of two
HYSTERESIS = 2.0 ** (-2.0 / GRID_LEVELS)

try:  # pragma: no cover - exercised implicitly when numba is importable
    import numba
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def numba_disabled() -> bool:
    return os.environ.get("SINGULAR_LANGEVIN_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}


def backend_name() -> str:
    return "numpy" if (numba_disabled() or not HAVE_NUMBA) else "numba"


def configure_threads() -> int | None:
    """Apply ``SINGULAR_LANGEVIN_THREADS`` to numba; returns the thread count in use."""
    if not HAVE_NUMBA:
        return None
    value = os.environ.get("SINGULAR_LANGEVIN_THREADS")
    if value:
        n = max(1, min(int(value), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)
    return numba.get_num_threads()


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _force_np(q, coefs, expos):
    out = np.zeros_like(q)
    for c, a in zip(coefs, expos):
        out += c * a * q ** (a - 1.0)
    return out


def _potential_np(q, coefs, expos, a0):
    out = np.full_like(q, a0)
    for c, a in zip(coefs, expos):
        out += c * q**a
    return out


def _lookup_np(lh, log_eta, log_y, slope):
    """Linear interpolation in a table on a uniform ``log eta`` grid; power-law tail."""
    d = (log_eta[-1] - log_eta[0]) / (log_eta.size - 1)
    x = (lh - log_eta[0]) / d
    i = np.minimum(x.astype(np.int64), log_eta.size - 2)
    f = x - i
    inside = log_y[i] + f * (log_y[i + 1] - log_y[i])
    return np.where(lh > log_eta[-1], log_y[-1] + slope * (lh - log_eta[-1]), inside)


def step_size_np(q, p, coefs, expos, a0, spp, dt_max, log_eta, log_tau, tau_slope,
                 log_fdt, fdt_slope):
    """Unclipped adaptive step ``min(tau(H) / spp, f(H), dt_max)`` (caller checks the floor).

    ``f(H)`` is the orbit-wide force limit tabulated alongside the period; as
    both depend on ``H`` only, the step is constant along a deterministic orbit.
    Tables are flat below their first node and power laws beyond the last.
    """
    H = 0.5 * p * p + _potential_np(q, coefs, expos, a0)
    lh = np.log(np.maximum(H, math.exp(log_eta[0])))
    lt = _lookup_np(lh, log_eta, log_tau, tau_slope) - math.log(spp)
    lf = _lookup_np(lh, log_eta, log_fdt, fdt_slope)
    return np.minimum(np.exp(np.minimum(lt, lf)), dt_max)


def quantize_np(target, dtc, dt_max):
    """Held step: keep ``dtc`` if it lies in ``[target * HYSTERESIS, target]``, else re-snap."""
    k = np.ceil(-GRID_LEVELS * np.log2(target / dt_max) - 1e-9)
    snapped = dt_max * 2.0 ** (-np.maximum(k, 0.0) / GRID_LEVELS)
    keep = (dtc > 0) & (dtc <= target) & (dtc >= target * HYSTERESIS)
    return np.where(keep, dtc, snapped)


def _ou_coefficients(gamma, sigma, dt):
    if gamma > 0:
        c1 = np.exp(-gamma * dt)
        c2 = sigma * np.sqrt(-np.expm1(-2.0 * gamma * dt) / (2.0 * gamma))
    else:
        c1 = np.ones_like(dt)
        c2 = sigma * np.sqrt(dt)
    return c1, c2


def _step_np(q, p, dt, xi, coefs, expos, gamma, sigma, scheme):
    if scheme == BAOAB:
        c1, c2 = _ou_coefficients(gamma, sigma, dt)
        p = p - 0.5 * dt * _force_np(q, coefs, expos)
        q = q + 0.5 * dt * p
        ok = q > 0
        p = c1 * p + c2 * xi
        q = q + 0.5 * dt * p
        ok &= q > 0
        qs = np.where(ok, q, 1.0)
        p = p - 0.5 * dt * _force_np(qs, coefs, expos)
    else:
        f = _force_np(q, coefs, expos)
        q, p = q + dt * p, p - dt * f - gamma * p * dt + sigma * np.sqrt(dt) * xi
        ok = q > 0
    ok &= np.isfinite(q) & np.isfinite(p)
    return q, p, ok


def advance_numpy(q, p, qb, pb, t, dtc, status, flag, nsteps, noise, npos, t_stop,
                  rec, rec_n, stride, coefs, expos, a0, gamma, sigma, scheme, full,
                  spp, dt_max, h_floor, log_eta, log_tau, tau_slope, log_fdt, fdt_slope):
    n, block = noise.shape
    cap = rec.shape[1]
    need = 2 if full else 1
    active = (status == RUNNING) & (t < t_stop)
    flag[:] = np.where(status == RUNNING, AT_STOP, TERMINATED)
    while True:
        out_noise = active & (npos + need > block)
        flag[out_noise] = NEED_NOISE
        active &= ~out_noise
        if stride > 0:
            full_buf = active & (rec_n >= cap)
            flag[full_buf] = BUFFER_FULL
            active &= ~full_buf
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            return
        qi, pi = q[idx], p[idx]
        dt = step_size_np(qi, pi, coefs, expos, a0, spp, dt_max, log_eta, log_tau,
                          tau_slope, log_fdt, fdt_slope)
        floor = dt < h_floor
        dt = np.where(floor, dt, quantize_np(np.maximum(dt, h_floor), dtc[idx], dt_max))
        dtc[idx] = np.where(floor, dtc[idx], dt)
        if np.any(floor):
            bad = idx[floor]
            status[bad] = STEP_FLOOR
            flag[bad] = TERMINATED
            active[bad] = False
            keep = ~floor
            idx, qi, pi, dt = idx[keep], qi[keep], pi[keep], dt[keep]
            if idx.size == 0:
                continue
        remaining = t_stop[idx] - t[idx]
        last = dt >= remaining
        dt = np.where(last, remaining, dt)
        pos = npos[idx]
        if full:
            n1 = noise[idx, pos]
            n2 = noise[idx, pos + 1]
            xi = (n1 - n2) * (1.0 / math.sqrt(2.0))
            xb = (n1 + n2) * (1.0 / math.sqrt(2.0))
        else:
            xi = noise[idx, pos]
        npos[idx] = pos + need
        qn, pn, ok = _step_np(qi, pi, dt, xi, coefs, expos, gamma, sigma, scheme)
        if full:
            c1, c2 = _ou_coefficients(gamma, sigma, dt)
            pbo = pb[idx]
            pbn = c1 * pbo + c2 * xb
            qb[idx] = qb[idx] + 0.5 * dt * (pbo + pbn)
            pb[idx] = pbn
        blown = idx[~ok]
        status[blown] = BLOWUP
        flag[blown] = TERMINATED
        active[blown] = False
        good = idx[ok]
        q[good] = qn[ok]
        p[good] = pn[ok]
        t[good] = np.where(last[ok], t_stop[good], t[good] + dt[ok])
        nsteps[good] += 1
        reached = good[last[ok]]
        active[reached] = False
        flag[reached] = AT_STOP
        if stride > 0:
            rr = good[nsteps[good] % stride == 0]
            k = rec_n[rr]
            rec[rr, k, 0] = t[rr]
            rec[rr, k, 1] = q[rr]
            rec[rr, k, 2] = p[rr]
            rec[rr, k, 3] = qb[rr]
            rec[rr, k, 4] = pb[rr]
            rec_n[rr] = k + 1


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _pow_nb(q, a):
        # integer exponents by repeated squaring (much cheaper than libm pow)
        n = int(a)
        if n == a and -64 <= n <= 64:
            m = -n if n < 0 else n
            r = 1.0
            b = q
            while m:
                if m & 1:
                    r *= b
                b *= b
                m >>= 1
            return 1.0 / r if n < 0 else r
        return q**a

    @njit(cache=True)
    def _force_nb(q, coefs, expos):
        out = 0.0
        for k in range(coefs.size):
            out += coefs[k] * expos[k] * _pow_nb(q, expos[k] - 1.0)
        return out

    @njit(cache=True)
    def _potential_nb(q, coefs, expos, a0):
        out = a0
        for k in range(coefs.size):
            out += coefs[k] * _pow_nb(q, expos[k])
        return out

    @njit(cache=True)
    def _lookup_nb(lh, log_eta, log_y, slope):
        if lh > log_eta[-1]:
            return log_y[-1] + slope * (lh - log_eta[-1])
        d = (log_eta[-1] - log_eta[0]) / (log_eta.size - 1)
        x = (lh - log_eta[0]) / d
        i = min(int(x), log_eta.size - 2)
        f = x - i
        return log_y[i] + f * (log_y[i + 1] - log_y[i])

    @njit(cache=True)
    def _step_size_nb(q, p, coefs, expos, a0, spp, dt_max, log_eta, log_tau, tau_slope,
                      log_fdt, fdt_slope):
        H = 0.5 * p * p + _potential_nb(q, coefs, expos, a0)
        lh = math.log(max(H, math.exp(log_eta[0])))
        lt = _lookup_nb(lh, log_eta, log_tau, tau_slope) - math.log(spp)
        lf = _lookup_nb(lh, log_eta, log_fdt, fdt_slope)
        return min(math.exp(min(lt, lf)), dt_max)

    @njit(cache=True, parallel=True)
    def advance_numba(q, p, qb, pb, t, dtc, status, flag, nsteps, noise, npos, t_stop,
                      rec, rec_n, stride, coefs, expos, a0, gamma, sigma, scheme, full,
                      spp, dt_max, h_floor, log_eta, log_tau, tau_slope, log_fdt, fdt_slope):
        n, block = noise.shape
        cap = rec.shape[1]
        need = 2 if full else 1
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        for i in prange(n):
            if status[i] != RUNNING:
                flag[i] = TERMINATED
                continue
            flag[i] = AT_STOP
            qi, pi, ti = q[i], p[i], t[i]
            ou_dt = -1.0
            c1 = 1.0
            c2 = 0.0
            sq = 0.0
            while ti < t_stop[i]:
                if npos[i] + need > block:
                    flag[i] = NEED_NOISE
                    break
                if stride > 0 and rec_n[i] >= cap:
                    flag[i] = BUFFER_FULL
                    break
                dt = _step_size_nb(qi, pi, coefs, expos, a0, spp, dt_max, log_eta, log_tau,
                                   tau_slope, log_fdt, fdt_slope)
                if dt < h_floor:
                    status[i] = STEP_FLOOR
                    flag[i] = TERMINATED
                    break
                held = dtc[i]
                if held > 0 and held <= dt and held >= dt * HYSTERESIS:
                    dt = held
                else:
                    k = math.ceil(-GRID_LEVELS * math.log2(dt / dt_max) - 1e-9)
                    dt = dt_max * 2.0 ** (-max(k, 0.0) / GRID_LEVELS)
                    dtc[i] = dt
                remaining = t_stop[i] - ti
                last = dt >= remaining
                if last:
                    dt = remaining
                pos = npos[i]
                if full:
                    n1 = noise[i, pos]
                    n2 = noise[i, pos + 1]
                    xi = (n1 - n2) * inv_sqrt2
                    xb = (n1 + n2) * inv_sqrt2
                else:
                    xi = noise[i, pos]
                    xb = 0.0
                npos[i] = pos + need
                if dt != ou_dt:
                    ou_dt = dt
                    if gamma > 0:
                        c1 = math.exp(-gamma * dt)
                        c2 = sigma * math.sqrt(-math.expm1(-2.0 * gamma * dt) / (2.0 * gamma))
                    else:
                        c1 = 1.0
                        c2 = sigma * math.sqrt(dt)
                    sq = math.sqrt(dt)
                ok = True
                if scheme == BAOAB:
                    pn = pi - 0.5 * dt * _force_nb(qi, coefs, expos)
                    qn = qi + 0.5 * dt * pn
                    ok = qn > 0
                    pn = c1 * pn + c2 * xi
                    qn = qn + 0.5 * dt * pn
                    ok = ok and qn > 0
                    if ok:
                        pn = pn - 0.5 * dt * _force_nb(qn, coefs, expos)
                else:
                    f = _force_nb(qi, coefs, expos)
                    qn = qi + dt * pi
                    pn = pi - dt * f - gamma * pi * dt + sigma * sq * xi
                    ok = qn > 0
                ok = ok and math.isfinite(qn) and math.isfinite(pn)
                if full:
                    pbn = c1 * pb[i] + c2 * xb
                    qb[i] = qb[i] + 0.5 * dt * (pb[i] + pbn)
                    pb[i] = pbn
                if not ok:
                    status[i] = BLOWUP
                    flag[i] = TERMINATED
                    break
                qi, pi = qn, pn
                ti = t_stop[i] if last else ti + dt
                nsteps[i] += 1
                if stride > 0 and nsteps[i] % stride == 0:
                    k = rec_n[i]
                    rec[i, k, 0] = ti
                    rec[i, k, 1] = qi
                    rec[i, k, 2] = pi
                    rec[i, k, 3] = qb[i]
                    rec[i, k, 4] = pb[i]
                    rec_n[i] = k + 1
            q[i], p[i], t[i] = qi, pi, ti


def advance(*args):
    """Dispatch to the selected backend (same signature as :func:`advance_numpy`)."""
    if backend_name() == "numba":
        configure_threads()
        return advance_numba(*args)
    return advance_numpy(*args)

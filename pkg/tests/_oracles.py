"""Independent numerical oracles shared by the unit and acceptance tests."""

import math

import numpy as np
from scipy.integrate import solve_ivp

from singular_langevin.lyapunov import orbit_points
from singular_langevin.potential import eval_force


def random_orbit_points(spec, n, h_lo, h_hi, seed):
    """``n`` phase points on log-uniformly drawn energy levels, at random orbit angles."""
    rng = np.random.default_rng(seed)
    out = []
    for H in np.exp(rng.uniform(math.log(h_lo), math.log(h_hi), n)):
        q, p = orbit_points(spec, float(H), 64)
        k = rng.integers(64)
        out.append((float(q[k]), float(p[k])))
    return out


def flow_derivative(model, x, edges, tau):
    """Derivative of Psi along the deterministic flow: Richardson-extrapolated central differences."""

    def rhs(t, y):
        return [y[1], -eval_force(model.spec, y[0])]

    def central(s):
        ends = [solve_ivp(rhs, (0.0, d), list(x), method="DOP853", rtol=1e-13, atol=1e-13).y[:, -1]
                for d in (s, -s)]
        return (model.psi_full(ends[0], 1.0, edges).psi - model.psi_full(ends[1], 1.0, edges).psi) / (2 * s)

    s = 1e-4 * tau
    return (4.0 * central(0.5 * s) - central(s)) / 3.0

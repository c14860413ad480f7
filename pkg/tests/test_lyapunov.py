import math

import numpy as np
import pytest

from _oracles import flow_derivative, random_orbit_points
from singular_langevin.lyapunov import (
    CutoffSpec,
    LyapunovModel,
    chi,
    drift_certificate,
    orbit_points,
    upsilon,
)
from singular_langevin.orbit import turning_points
from singular_langevin.potential import (
    LangevinParams,
    eval_force,
    eval_hamiltonian,
    make_spec,
    scale_map,
)

SOFT_WALL = make_spec([(1.0, 4.0), (0.1, -2.0)])
STEEP_WALL = make_spec([(1.0, 4.0), (0.1, -12.0)])


@pytest.fixture(scope="module")
def model():
    return LyapunovModel(STEEP_WALL, LangevinParams(1.0, 1.0))


# --- cutoff and Upsilon -----------------------------------------------------


def test_cutoff_values():
    c = CutoffSpec(2.0)
    assert chi(2.0, c) == 0.0
    assert chi(3.0, c) == 1.0
    assert chi(2.5, c) == pytest.approx(0.5, abs=1e-15)
    eta = np.linspace(1.0, 4.0, 301)
    assert np.all(np.diff(chi(eta, c)) >= 0)


def test_upsilon_values():
    c = CutoffSpec(1.6107)
    assert upsilon(SOFT_WALL, (1.0, 0.5), 1.0, c) == 0.0  # H = 1.225 below eta*
    assert upsilon(SOFT_WALL, (1.0, 10.0), 1.0, c) == 100.0
    assert upsilon(SOFT_WALL, (1.0, 3.0), 2.0, c) == 9.0


# --- Poisson solution -------------------------------------------------------


def test_psi_vanishes_on_anchor_and_below_cutoff(model):
    for eta in (model.eta_star.value + 2.0, 1e3):
        qm, _ = turning_points(STEEP_WALL, eta)
        assert model.psi((qm, 0.0)) == pytest.approx(0.0, abs=1e-12 * eta)
    assert model.psi((1.0, 0.5)) == 0.0


def test_psi_is_odd_in_momentum(model):
    for q, p in random_orbit_points(STEEP_WALL, 5, 10.0, 1e4, seed=3):
        assert model.psi((q, -p)) == pytest.approx(-model.psi((q, p)), abs=1e-12 * abs(p) ** 2)


def test_full_loop_closure(model):
    eta = 10.0 * model.eta_star.value
    loop, scale = model.loop_integral(eta)
    assert abs(loop) < 1e-8 * scale


def test_poisson_residual_along_flow(model):
    g = model.gamma
    es = model.eta_star.value
    for x in random_orbit_points(STEEP_WALL, 8, 2 * es, 100 * es, seed=11):
        v = model.psi_full(x)
        lhs = flow_derivative(model, x, v.edges, v.period)
        rhs_val = g * (float(upsilon(STEEP_WALL, x, 1.0, model.cutoff)) - v.a_upsilon)
        assert abs(lhs - rhs_val) <= 1e-4 * g * v.a_upsilon


@pytest.mark.parametrize("H", [1e3, 1e5])
def test_psi_and_momentum_derivative_scaling(model, H):
    alpha = STEEP_WALL.alpha1
    q, p = orbit_points(STEEP_WALL, H, 8)
    for x in zip(q[1:4], p[1:4]):
        y = scale_map(x, 2.0, alpha)
        assert model.psi_full(y, 1.0).psi == pytest.approx(
            2 ** (1 + 2 / alpha) * model.psi_full(x, 2.0).psi, rel=1e-3)
        assert model.psi_derivatives(y, 1.0)[0] == pytest.approx(
            2 ** (2 / alpha) * model.psi_derivatives(x, 2.0)[0], rel=1e-3)


def test_second_momentum_derivative_decays(model):
    def max_d2(H):
        q, p = orbit_points(STEEP_WALL, H, 16)
        return max(abs(model.psi_derivatives((a, b))[1]) for a, b in zip(q, p))

    assert max_d2(1e6) < max_d2(1e3)


def test_derivatives_below_cutoff_vanish(model):
    d1, d2, psi, A = model.psi_derivatives((1.0, 0.5))
    assert (d1, d2, psi, A) == (0.0, 0.0, 0.0, 0.0)


# --- V and the generator ----------------------------------------------------


def test_v_equals_h_below_cutoff(model):
    x = (1.0, 0.5)
    assert model.lyapunov_value(x) == float(eval_hamiltonian(STEEP_WALL, x))


def test_v_comparable_to_h_at_high_energy(model):
    for H in (1e3, 1e4, 1e5, 1e6):
        q, p = orbit_points(STEEP_WALL, H, 32)
        ratios = [model.lyapunov_value(x) / H - 1.0 for x in zip(q, p)]
        assert max(abs(r) for r in ratios) <= 0.2


def test_v_smooth_across_cutoff_band(model):
    # V along the momentum line q = 1 (U(1) = 1.1) through the band eta* < H < eta* + 1
    es = model.eta_star.value
    p = np.linspace(math.sqrt(2 * (es - 1.1)) - 0.2, math.sqrt(2 * (es + 1 - 1.1)) + 0.2, 81)
    v = np.array([model.lyapunov_value((1.0, float(x))) for x in p])
    d2 = np.diff(v, 2) / (p[1] - p[0]) ** 2
    assert np.all(np.isfinite(d2)) and np.max(np.abs(d2)) < 50.0


def test_generator_below_cutoff(model):
    x = (1.0, 0.7)
    g, s2 = model.gamma, model.params.sigma**2
    terms = model.generator_terms(x)
    assert terms.value == pytest.approx(0.5 * s2 - g * 0.49, rel=1e-15)
    assert terms.E == 0.0 and terms.a_upsilon == 0.0


def test_dissipation_term_nonpositive(model):
    rng = np.random.default_rng(0)
    q = rng.uniform(0.5, 3.0, 10_000)
    p = rng.normal(0.0, 5.0, 10_000)
    H = eval_hamiltonian(STEEP_WALL, (q, p))
    G = model.gamma * p**2 * (chi(H, model.cutoff) - 1.0)
    assert np.all(G <= 0.0)
    for x in random_orbit_points(STEEP_WALL, 5, 1.0, 50.0, seed=5):
        assert model.generator_terms(x).G <= 0.0


def test_generator_matches_one_step_expectation(model):
    """``(E V(x_h) - V(x)) / h`` for one Euler step, noise integrated by Gauss-Hermite."""
    g, sigma = model.gamma, model.params.sigma
    nodes, weights = np.polynomial.hermite_e.hermegauss(12)
    weights = weights / weights.sum()

    def one_step_rate(q, p, v0, h):
        q1 = q + h * p
        drift_p = p + h * (-eval_force(STEEP_WALL, q) - g * p)
        ev = sum(w * model.lyapunov_value((q1, drift_p + sigma * math.sqrt(h) * z))
                 for z, w in zip(nodes, weights))
        return (ev - v0) / h

    h = 1e-4
    for q, p in random_orbit_points(STEEP_WALL, 4, 20.0, 500.0, seed=21):
        v0 = model.lyapunov_value((q, p))
        # the O(h) bias of the one-step rate is removed by extrapolation in h
        rate = 2.0 * one_step_rate(q, p, v0, 0.5 * h) - one_step_rate(q, p, v0, h)
        scale = g * model.lambda_star * v0
        assert rate == pytest.approx(model.generator_on_V((q, p)), abs=1e-3 * scale)


# --- certificate (small grid; the full scan lives in the acceptance suite) --


def test_small_certificate_valid_and_comparability_tightens(model):
    low = drift_certificate(model, n_levels=12, n_angles=16, box=8, h_max=1e5, comparability_cut=1e2)
    high = drift_certificate(model, n_levels=12, n_angles=16, box=8, h_max=1e5, comparability_cut=1e4)
    assert low.valid and math.isfinite(low.C)
    assert high.delta_H < low.delta_H
    d = low.to_dict()
    assert {"delta", "C", "delta_H", "C_H", "grid", "worst_point", "valid"} <= set(d)

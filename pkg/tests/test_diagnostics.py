import math
import warnings

import numpy as np
import pytest
from scipy import stats

from singular_langevin.diagnostics import (
    GibbsTarget,
    Histogram2D,
    batch_means_se,
    deterministic_decay_check,
    energy_decay_experiment,
    exp_moment_check,
    fit_log_slope,
    gibbs_compare,
    minorization_probe,
    orbit_phase_points,
    predicted_energy_curve,
    weighted_tv,
    wiggle_amplitude,
    windowed_energy_average,
)
from singular_langevin.errors import GeometryMismatch, InsufficientSamples, WindowTooLong
from singular_langevin.orbit import period, turning_points
from singular_langevin.potential import LangevinParams, eval_hamiltonian, make_spec
from singular_langevin.simulate import integrate_reduced

SOFT_WALL = make_spec([(1.0, 4.0), (0.1, -2.0)])
STEEP_WALL = make_spec([(1.0, 4.0), (0.1, -12.0)])
QUAD = make_spec([(1.0, 2.0), (0.1, -12.0)])


def _quiet_rate(fn, *a, **k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **k)


# --- predicted curves and slope fits ----------------------------------------


def test_noiseless_prediction_is_pure_exponential():
    c = predicted_energy_curve(STEEP_WALL, LangevinParams(0.5, 0.0), 1e4, 5.0)
    slope = np.diff(np.log(c.eta)) / np.diff(c.times)
    np.testing.assert_allclose(slope, -0.5 * 4 / 3, rtol=1e-10)


def test_prediction_fixed_point():
    c = predicted_energy_curve(STEEP_WALL, LangevinParams(1.0, 1.0), 1e4, 40.0)
    assert c.eta_inf == pytest.approx(0.75, rel=1e-14)
    assert c.eta[-1] == pytest.approx(0.75, rel=1e-9)


def test_lambda_of_eta_prediction_rate_approaches_limit():
    prm = LangevinParams(1.0, 1e-3)
    c = predicted_energy_curve(STEEP_WALL, prm, 1e6, 6.0, "lambda_of_eta")
    rate = -np.diff(np.log(c.eta)) / np.diff(c.times) / (4 / 3)
    eta = c.eta[:-1]
    # the finite-energy rate creeps up to the limit as energy grows
    assert np.all(rate < 1.0)
    assert np.all(np.abs(rate[eta >= 1e4] - 1.0) < 0.025)
    hi, lo = rate[eta >= 1e5].mean(), rate[(eta >= 1e3) & (eta < 1e4)].mean()
    assert hi > lo


def test_prediction_rejects_unknown_mode():
    with pytest.raises(ValueError):
        predicted_energy_curve(STEEP_WALL, LangevinParams(1.0, 1.0), 10.0, 1.0, "bogus")


def test_fit_log_slope_exact_exponential():
    t = np.linspace(0.0, 3.0, 301)
    fit = fit_log_slope(t, 1e4 * np.exp(-1.2 * t), 10.0, 1e4, 1)
    assert fit.slope == pytest.approx(-1.2, rel=1e-12)
    assert fit.relative_error(-1.2) < 1e-12
    with pytest.raises(ValueError):
        fit_log_slope(t, np.full(t.size, 1.0), 10.0, 1e4, 1)


def test_no_damping_no_decay():
    fit = deterministic_decay_check(STEEP_WALL, 0.0, 1e3)
    assert abs(fit.slope) < 1e-6


def test_orbit_phase_points_lie_on_orbit():
    q, p = orbit_phase_points(STEEP_WALL, 300.0, 64)
    np.testing.assert_allclose(eval_hamiltonian(STEEP_WALL, (q, p)), 300.0, rtol=1e-10)
    assert (p > 0).sum() == (p < 0).sum() == 32


def test_small_decay_run_structure():
    r = energy_decay_experiment(STEEP_WALL, LangevinParams(1.0, 1e-3), 1e4, 16, 4.0, n_times=101)
    assert r.n_blowups == 0
    assert r.mean_H[0] == pytest.approx(1e4, rel=1e-9)
    assert r.target_slope == pytest.approx(-4 / 3)
    assert r.fit.relative_error(r.target_slope) < 0.2
    assert set(r.predicted) == {"lambda_star", "lambda_of_eta"}


# --- histogram distances ----------------------------------------------------


def _hist(mass, n=4):
    return Histogram2D(np.linspace(0.5, 2.5, n + 1), np.linspace(-2, 2, n + 1), np.asarray(mass))


def test_weighted_tv_identity_and_disjoint():
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    m2 = np.zeros((4, 4))
    m2[3, 3] = 1.0
    assert weighted_tv(_hist(m), _hist(m), SOFT_WALL, 1.0) == 0.0
    assert weighted_tv(_hist(m), _hist(m2), SOFT_WALL, 0.0) == 2.0


def test_weighted_tv_monotone_in_beta_and_metric():
    rng = np.random.default_rng(4)
    hs = []
    for _ in range(3):
        m = rng.random((4, 4))
        hs.append(_hist(m / m.sum()))
    vals = [weighted_tv(hs[0], hs[1], SOFT_WALL, b) for b in (0.0, 0.1, 0.5, 1.0, 2.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    for beta in (0.0, 0.7):
        d = lambda a, b: weighted_tv(a, b, SOFT_WALL, beta)  # noqa: E731
        assert d(hs[0], hs[1]) == pytest.approx(d(hs[1], hs[0]), rel=1e-14)
        assert d(hs[0], hs[2]) <= d(hs[0], hs[1]) + d(hs[1], hs[2]) + 1e-14


def test_weighted_tv_geometry_mismatch():
    with pytest.raises(GeometryMismatch):
        weighted_tv(_hist(np.zeros((4, 4))), _hist(np.zeros((5, 5)), 5), SOFT_WALL, 0.0)


# --- Gibbs ------------------------------------------------------------------


def test_gibbs_target_sampler_matches_cdf():
    tgt = GibbsTarget(STEEP_WALL, 1.0)
    q, p = tgt.sample(20_000, np.random.default_rng(0))
    assert stats.kstest(q, tgt.q_cdf).pvalue > 1e-3
    assert stats.kstest(p, "norm").pvalue > 1e-3
    h = tgt.histogram(np.linspace(tgt.q_lo, tgt.q_hi, 33), np.linspace(-8, 8, 33))
    assert h.mass.sum() == pytest.approx(1.0, abs=1e-5)


def test_gibbs_compare_short_run():
    rep = gibbs_compare(STEEP_WALL, LangevinParams(1.0, 1.0), 50.0, 3000.0, bins=(24, 24), seed=1,
                        start=(2.5, 3.0))
    assert rep.variance_ok
    assert abs(rep.q_mode - rep.q_min) <= rep.bin_width_q
    assert rep.q_ks < rep.q_ks_critical
    assert len(rep.tv) == 3


def test_gibbs_compare_needs_samples():
    with pytest.raises(InsufficientSamples):
        gibbs_compare(STEEP_WALL, LangevinParams(1.0, 1.0), 1.0, 20.0, bins=(64, 64))


def test_batch_means_se_of_iid_series():
    x = np.random.default_rng(2).normal(size=100_000)
    assert batch_means_se(x) == pytest.approx(1 / math.sqrt(x.size), rel=0.3)


# --- exponential moments ----------------------------------------------------


def test_exp_moment_beta_zero_is_one():
    s = exp_moment_check(STEEP_WALL, LangevinParams(1.0, 1.0), 0.0, 32, 1.0, n_times=11)
    np.testing.assert_array_equal(s.values, 1.0)


def test_exp_moment_high_start_bounded_without_overflow():
    s = exp_moment_check(STEEP_WALL, LangevinParams(1.0, 1.0), 1.0, 64, 5.0, H_start=2000.0, n_times=51)
    assert s.finite and s.bounded
    assert s.log_values[0] == pytest.approx(2000.0, rel=1e-9)  # exp(2000) overflows a float
    assert np.all(s.envelope() >= s.log_values - 1e-9)


def test_exp_moment_flat_from_equilibrium():
    T = 1.0
    beta = 0.5 / T
    q, p = GibbsTarget(STEEP_WALL, T).sample(2000, np.random.default_rng(5))
    s = exp_moment_check(STEEP_WALL, LangevinParams(1.0, T), beta, 2000, 4.0, seed=6, starts=(q, p),
                         n_times=9)
    # log of the sample mean fluctuates by a few standard errors around its start
    assert np.ptp(s.log_values) < 0.15


# --- minorization -----------------------------------------------------------


def test_minorization_overlap_tiny_after_one_step():
    m = minorization_probe(SOFT_WALL, LangevinParams(1.0, 1.0), 4.0, [1e-3], 200, n_boot=5)
    assert m.overlap[0] < 0.05


def test_minorization_needs_paths():
    with pytest.raises(InsufficientSamples):
        minorization_probe(SOFT_WALL, LangevinParams(1.0, 1.0), 4.0, [1.0], 50)


# --- windowed average -------------------------------------------------------


def test_windowed_average_of_constant_is_exact():
    t = np.linspace(0.0, 10.0, 1001)
    w = windowed_energy_average(t, np.full(t.size, 3.5), 2.0)
    np.testing.assert_allclose(w.V, 3.5, rtol=1e-13)
    with pytest.raises(WindowTooLong):
        windowed_energy_average(t, np.full(t.size, 3.5), 20.0)


def test_quadratic_period_limit():
    # the wall turns a harmonic well into a half oscillation: tau* = pi / omega, omega = sqrt(2)
    tau_star = period(QUAD, 1e6)
    assert tau_star == pytest.approx(math.pi / math.sqrt(2.0), rel=1e-3)
    assert period(QUAD, 1e7) == pytest.approx(tau_star, rel=1e-3)


def test_windowed_average_smooths_quadratic_decay():
    tau = period(QUAD, 1e6)
    rec = integrate_reduced(QUAD, LangevinParams(0.1, 0.0), (turning_points(QUAD, 1e4)[1], 0.0), 30 * tau)
    w = _quiet_rate(windowed_energy_average, rec.times, rec.energies, tau, 0.1, 1.0)
    assert wiggle_amplitude(w.times, w.V, tau) < 0.25 * wiggle_amplitude(w.times, w.H, tau)


@pytest.mark.parametrize("spec, shrinks", [(STEEP_WALL, True), (make_spec([(1, 6), (0.1, -12)]), True),
                                           (QUAD, False)])
def test_wiggle_scaling_with_energy(spec, shrinks):
    prm = LangevinParams(0.1, 0.0)

    def wiggle(H0):
        tau = period(spec, H0)
        rec = integrate_reduced(spec, prm, (turning_points(spec, H0)[1], 0.0), 5 * tau)
        return wiggle_amplitude(rec.times, rec.energies, tau)

    ratio = wiggle(1e5) / wiggle(1e2)
    if shrinks:
        assert ratio < 0.5
    else:
        assert ratio == pytest.approx(1.0, abs=0.2)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from singular_langevin.errors import (
    DomainError,
    ExponentOrder,
    LeadingSignError,
    NotBoundedBelow,
    SingularSignError,
)
from singular_langevin.potential import (
    FullState,
    LangevinParams,
    PotentialSpec,
    critical_points,
    eval_curvature,
    eval_force,
    eval_hamiltonian,
    eval_potential,
    local_maxima,
    make_spec,
    normalize_offset,
    potential_minimum,
    scale_map,
    validate_spec,
)

SOFT_WALL = make_spec([(1.0, 4.0), (0.1, -2.0)])


# --- validation -------------------------------------------------------------


def test_soft_wall_spec_is_valid():
    assert validate_spec(SOFT_WALL) is SOFT_WALL


@pytest.mark.parametrize("terms, exc", [
    ([(1, 2), (0.1, -2)], ExponentOrder),
    ([(1, 4), (-0.1, -2)], SingularSignError),
    ([(-1, 4), (0.1, -2)], LeadingSignError),
    ([(1, -2), (0.1, 4)], ExponentOrder),
    ([(1, 4), (0.1, 1)], ExponentOrder),
    ([(1, 4)], ExponentOrder),
])
def test_invalid_specs(terms, exc):
    with pytest.raises(exc):
        validate_spec(make_spec(terms))


def test_quadratic_case_admitted_on_request():
    spec = make_spec([(1, 2), (0.1, -2)])
    assert validate_spec(spec, allow_quadratic=True) is spec


def test_offset_making_u_nonpositive_rejected():
    with pytest.raises(NotBoundedBelow):
        validate_spec(make_spec([(1, 4), (0.1, -2)], a0=-1.0))


def test_spec_dict_round_trip():
    d = SOFT_WALL.to_dict()
    assert PotentialSpec.from_dict(d) == SOFT_WALL
    assert d == {"terms": [{"coefficient": 1.0, "exponent": 4.0},
                           {"coefficient": 0.1, "exponent": -2.0}], "offset": 0.0}


# --- evaluation -------------------------------------------------------------


def test_potential_values():
    assert eval_potential(SOFT_WALL, 1.0) == pytest.approx(1.1, abs=1e-15)
    assert eval_potential(SOFT_WALL, 0.97245) == pytest.approx(1.0, abs=1e-3)


def test_singular_coefficient_under_scaling():
    c = SOFT_WALL.scaled_coefficients(2.15)
    assert c[0] == 1.0
    assert c[1] == pytest.approx(0.1 * 2.15 ** -3, rel=1e-14)
    assert c[1] == pytest.approx(0.01006, abs=1e-5)


def test_force_values_and_critical_point():
    assert eval_force(SOFT_WALL, 1.0) == pytest.approx(3.8, rel=1e-14)
    r0 = 0.05 ** (1 / 6)
    assert abs(eval_force(SOFT_WALL, r0)) < 1e-14
    (cp,) = critical_points(SOFT_WALL)
    assert cp == pytest.approx(r0, rel=1e-12)


@pytest.mark.parametrize("terms", [[(1, 4), (0.1, -2)], [(1, 6), (0.3, 1.5), (0.1, -12)],
                                   [(2, 3), (0.1, -1)]])
@pytest.mark.parametrize("lam", [1.0, 3.7])
def test_derivatives_match_finite_differences(terms, lam):
    spec = make_spec(terms)
    R = np.geomspace(0.2, 5.0, 20)
    h = 1e-5 * R
    fd1 = (eval_potential(spec, R + h, lam) - eval_potential(spec, R - h, lam)) / (2 * h)
    fd2 = (eval_force(spec, R + h, lam) - eval_force(spec, R - h, lam)) / (2 * h)
    np.testing.assert_allclose(eval_force(spec, R, lam), fd1, rtol=1e-6)
    np.testing.assert_allclose(eval_curvature(spec, R, lam), fd2, rtol=1e-6)


def test_domain_error():
    with pytest.raises(DomainError):
        eval_potential(SOFT_WALL, 0.0)
    with pytest.raises(DomainError):
        eval_force(SOFT_WALL, np.array([1.0, -1.0]))


def test_hamiltonian_values():
    assert eval_hamiltonian(SOFT_WALL, (1.0, 1.0)) == pytest.approx(1.6, abs=1e-15)
    assert eval_hamiltonian(SOFT_WALL, (0.3179, 0.0)) == pytest.approx(1.0, abs=1e-3)
    assert eval_hamiltonian(SOFT_WALL, (0.1581262410, 0.0)) == pytest.approx(4.0, abs=1e-6)


# --- scaling ----------------------------------------------------------------


def test_scale_map_values():
    assert tuple(scale_map((1.0, 1.0), 4.0, 4.0)) == pytest.approx((2.0, 4.0), rel=1e-15)
    assert tuple(scale_map((0.7, -2.0), 1.0, 4.0)) == (0.7, -2.0)


def test_scaling_identity_worked_example():
    lhs = eval_hamiltonian(SOFT_WALL, scale_map((1.0, 1.0), 3.0, 4.0), 1.0)
    rhs = 9.0 * eval_hamiltonian(SOFT_WALL, (1.0, 1.0), 3.0)
    expected = 4.5 + 9.0 + 0.1 / 3.0
    assert lhs == pytest.approx(expected, rel=1e-14)
    assert rhs == pytest.approx(expected, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(q=st.floats(0.05, 20.0), p=st.floats(-50.0, 50.0), ell=st.floats(0.1, 30.0),
       lam=st.floats(0.2, 20.0), alpha2=st.sampled_from([-2.0, -4.0, -12.0]),
       a0=st.floats(0.0, 3.0))
def test_scaling_identity_property(q, p, ell, lam, alpha2, a0):
    spec = make_spec([(1.3, 4.0), (0.2, 1.0), (0.1, alpha2)], a0)
    lhs = eval_hamiltonian(spec, scale_map((q, p), ell, 4.0), lam)
    rhs = ell**2 * eval_hamiltonian(spec, (q, p), ell * lam)
    assert lhs == pytest.approx(rhs, rel=1e-12)


# --- offset -----------------------------------------------------------------


def _golden_min(spec):
    r = minimize_scalar(lambda x: float(eval_potential(spec, math.exp(x))), bracket=(-3, 0, 3),
                        method="golden", tol=1e-12)
    return float(r.fun)


def test_normalize_offset_soft_wall():
    expected = -(0.05 ** (2 / 3) + 0.1 * 0.05 ** (-1 / 3))
    norm = normalize_offset(SOFT_WALL)
    assert norm.a0 == pytest.approx(expected, rel=1e-12)
    assert norm.a0 == pytest.approx(-_golden_min(SOFT_WALL), rel=1e-9)
    assert potential_minimum(norm)[1] == pytest.approx(0.0, abs=1e-13)
    assert normalize_offset(norm) is norm


def test_normalize_offset_two_term():
    spec = make_spec([(1, 4), (1, -2)])
    norm = normalize_offset(spec)
    assert norm.a0 == pytest.approx(-(2 ** (-2 / 3) + 2 ** (1 / 3)), rel=1e-12)
    assert norm.a0 == pytest.approx(-1.88988, abs=1e-5)
    assert potential_minimum(spec)[0] ** 6 == pytest.approx(0.5, rel=1e-12)


DOUBLE_WELL = make_spec([(1, 4), (-4, 3), (4.2, 2), (0.01, -2)])


def test_local_maxima_of_double_well():
    cps = critical_points(DOUBLE_WELL)
    assert len(cps) == 3
    (top,) = local_maxima(DOUBLE_WELL)
    assert top[0] == pytest.approx(cps[1], rel=1e-14)
    assert eval_curvature(DOUBLE_WELL, top[0]) < 0
    assert top[1] > potential_minimum(DOUBLE_WELL)[1]


def test_single_well_has_no_local_maximum():
    # a negative intermediate term does not by itself create a barrier
    assert local_maxima(make_spec([(1, 4), (-3, 1), (0.1, -2)])) == []


# --- states -----------------------------------------------------------------


def test_langevin_params():
    prm = LangevinParams(2.0, 0.5)
    assert prm.sigma == pytest.approx(math.sqrt(2.0), rel=1e-15)
    with pytest.raises(ValueError):
        LangevinParams(-1.0, 1.0)


def test_full_state_com_round_trip():
    s = FullState(1.3, -0.4, 0.25, -1.75)
    back = FullState.from_com(*s.to_com())
    for a, b in zip((back.q1, back.q2, back.p1, back.p2), (s.q1, s.q2, s.p1, s.p2)):
        assert a == pytest.approx(b, rel=2e-16, abs=1e-16)


def test_full_state_energy_matches_relative_coordinates():
    s = FullState(1.3, -0.4, 0.25, -1.75)
    H = 0.5 * (0.25**2 + 1.75**2) + eval_potential(SOFT_WALL, 1.7)
    assert s.energy(SOFT_WALL) == pytest.approx(H, rel=1e-14)

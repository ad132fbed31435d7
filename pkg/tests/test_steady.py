import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from vascnet.errors import DomainError, InfeasibleBoundaryDataError, WindowTooShortError
from vascnet.grid import HalfLineGrid
from vascnet.model import BoundaryData, ModelParams, PowerLaw, Quadratic, wall_integral
from vascnet.steady import (
    Direction,
    StationaryFunctions,
    SteadyProfile,
    compute_steady_profile,
    default_length,
    delta_G,
    estimate_decay_rate,
    eval_F,
    eval_H,
    solve_rho_minus,
    steady_residual,
    steady_rhs,
)

LAM = math.sqrt(0.5)


@pytest.fixture(scope="module")
def cubic():
    """p = rho^3 with mu = a = b = 1, rho_+ = 1, phi_- = 1.3."""
    params = ModelParams(1.0, 1.0, 1.0, 1.0)
    law = PowerLaw(1.0, 3.0)
    return StationaryFunctions(law, params, BoundaryData.from_params(params, 1.0, 1.3))


def quad_F(law, mu, rp, s):
    return integrate.quad(lambda t: law.dp(t) / (mu * t), rp, s, epsabs=1e-13)[0]


def test_F_examples(fns):
    assert eval_F(fns, 1.0) == 0.0
    assert eval_F(fns, 1.1) == pytest.approx(0.2, abs=1e-15)
    assert eval_F(fns, 0.5) == pytest.approx(-1.0, abs=1e-15)
    assert eval_F(fns, 1.1) == pytest.approx(quad_F(fns.law, 1.0, 1.0, 1.1), abs=1e-13)


def test_F_general_law_against_closed_form(cubic):
    # F = (3/2)(s^2 - 1) for p = rho^3, mu = 1
    for s in (0.4, 1.0, 1.7):
        assert eval_F(cubic, s) == pytest.approx(1.5 * (s * s - 1.0), abs=1e-12)


def test_H_examples(fns):
    assert eval_H(fns, 1.0) == 0.0
    assert eval_H(fns, 1.1) == pytest.approx(0.1, abs=1e-15)
    assert eval_H(fns, 0.9) == pytest.approx(-0.1, abs=1e-15)


def test_delta_G_examples(fns):
    assert delta_G(fns, 1.0) == 0.0
    assert delta_G(fns, 1.1) == pytest.approx(0.02, rel=1e-12)
    assert delta_G(fns, 0.9) == pytest.approx(0.02, rel=1e-12)


def test_delta_G_matches_nested_quadrature(fns, cubic):
    for f, s in ((fns, 1.1), (cubic, 1.25), (cubic, 0.6)):
        rp = f.bdry.rho_plus
        oracle = integrate.quad(lambda t: 2 * float(f.dF(t)) * (
            f.params.b * quad_F(f.law, f.params.mu, rp, t) + f.params.b * f.bdry.phi_plus
            - f.params.a * t), rp, s, epsabs=1e-14)[0]
        assert delta_G(f, s) == pytest.approx(oracle, rel=1e-10, abs=1e-15)


@pytest.mark.parametrize("s", [0.0, -0.5])
def test_stationary_functions_reject_nonpositive(fns, s):
    for fn in (eval_F, eval_H, delta_G):
        with pytest.raises(DomainError):
            fn(fns, s)


def test_rho_minus_examples(params, law):
    up = StationaryFunctions(law, params, BoundaryData.from_params(params, 1.0, 1.2))
    down = StationaryFunctions(law, params, BoundaryData.from_params(params, 1.0, 0.8))
    assert solve_rho_minus(up) == pytest.approx(1.1, abs=1e-12)
    assert solve_rho_minus(down) == pytest.approx(0.9, abs=1e-12)


def test_rho_minus_general_law(cubic):
    # 1.5 (s^2 - 1) = 0.3
    assert cubic.rho_minus == pytest.approx(math.sqrt(1.2), abs=1e-12)


def test_rho_minus_infeasible(params, law):
    bad = StationaryFunctions(law, params, BoundaryData.from_params(params, 1.0, -1.5))
    with pytest.raises(InfeasibleBoundaryDataError):
        solve_rho_minus(bad)


def test_steady_rhs_examples(fns):
    assert steady_rhs(fns, 1.0) == 0.0
    assert steady_rhs(fns, 1.1, Direction.DECREASING) == pytest.approx(-math.sqrt(0.02) / 2, rel=1e-12)
    assert steady_rhs(fns, 1.05) == pytest.approx(-LAM * 0.05, rel=1e-12)


def test_steady_rhs_domain(fns):
    with pytest.raises(DomainError):
        steady_rhs(fns, 1.2)
    with pytest.raises(DomainError):
        steady_rhs(fns, 1.05, Direction.INCREASING)


def test_steady_rhs_increasing_branch(params, law):
    f = StationaryFunctions(law, params, BoundaryData.from_params(params, 1.0, 0.8))
    assert f.direction is Direction.INCREASING
    assert steady_rhs(f, 0.95) == pytest.approx(LAM * 0.05, rel=1e-12)


def test_lipschitz_limit_general_law(cubic):
    # F'(1) = 3, so lambda = sqrt((3 - 1)/3)
    lam = math.sqrt(2.0 / 3.0)
    assert cubic.lambda_limit == pytest.approx(lam, rel=1e-14)
    for h in (1e-4, 1e-5):
        q = steady_rhs(cubic, 1.0 + h) / h
        assert q == pytest.approx(-lam, abs=1e-4)


def test_profile_matches_closed_form(fns):
    grid = HalfLineGrid(40.0, 2000)
    prof = compute_steady_profile(fns, grid)
    x = grid.nodes
    assert np.max(np.abs(prof.rho_bar - (1 + 0.1 * np.exp(-LAM * x)))) <= 1e-8
    assert np.max(np.abs(prof.phi_bar - (1 + 0.2 * np.exp(-LAM * x)))) <= 1e-8
    xc = grid.centers
    assert np.max(np.abs(prof.rho_c - (1 + 0.1 * np.exp(-LAM * xc)))) <= 1e-8
    assert prof.rho_bar[0] == prof.rho_minus == pytest.approx(1.1, abs=1e-15)


def test_profile_general_law_against_ivp(cubic):
    grid = HalfLineGrid(20.0, 200)
    prof = compute_steady_profile(cubic, grid)
    sol = integrate.solve_ivp(lambda x, r: [steady_rhs(cubic, min(max(r[0], 1.0), cubic.rho_minus))],
                              (0, 20), [cubic.rho_minus], t_eval=grid.nodes, method="DOP853",
                              rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(prof.rho_bar - sol.y[0])) < 1e-9
    # reconstruction identity
    ident = prof.phi_bar - cubic.F_array(prof.rho_bar) - cubic.bdry.phi_plus
    assert np.max(np.abs(ident)) <= 1e-12
    assert abs(prof.phi_bar[0] - cubic.bdry.phi_minus) <= 1e-10


def test_profile_direction_flips(params, law):
    f = StationaryFunctions(law, params, BoundaryData.from_params(params, 1.0, 0.8))
    prof = compute_steady_profile(f, HalfLineGrid(40.0, 400))
    assert prof.direction is Direction.INCREASING
    assert np.all(np.diff(prof.rho_bar) > 0)
    assert np.all(np.diff(prof.phi_bar) > 0)
    assert prof.rho_bar.min() >= 0.9 and prof.rho_bar.max() <= 1.0


def test_profile_rejects_odd_substeps(fns, small_grid):
    with pytest.raises(ValueError):
        compute_steady_profile(fns, small_grid, substeps=3)


def test_residual_exact_profile(fns, law, params):
    prof = compute_steady_profile(fns, HalfLineGrid(40.0, 4000))
    r1, r2 = steady_residual(prof, law, params)
    assert r1 <= 1e-3 and r2 <= 1e-3


def test_residual_constant_profile_is_zero(law, params):
    prof = SteadyProfile.constant(HalfLineGrid(10.0, 100), 1.0, 1.0)
    assert steady_residual(prof, law, params) == (0.0, 0.0)


def test_residual_second_order(fns, law, params):
    res = [steady_residual(compute_steady_profile(fns, HalfLineGrid(40.0, n)), law, params)
           for n in (2000, 4000, 8000)]
    for k in (0, 1):
        for lo, hi in zip(res[:-1], res[1:]):
            assert lo[k] / hi[k] == pytest.approx(4.0, rel=0.2)


@pytest.mark.parametrize("K, lam", [(2.0, math.sqrt(0.5)), (4.0, math.sqrt(0.75))])
def test_decay_rate(params, K, lam):
    f = StationaryFunctions(Quadratic(K), params, BoundaryData.from_params(params, 1.0, 1.2))
    prof = compute_steady_profile(f, HalfLineGrid(40.0, 2000))
    assert prof.lambda_fit == pytest.approx(lam, rel=1e-2)
    assert estimate_decay_rate(prof) == prof.lambda_fit


def test_decay_rate_needs_decay():
    prof = SteadyProfile.constant(HalfLineGrid(10.0, 100), 1.0, 1.0)
    with pytest.raises(WindowTooShortError):
        estimate_decay_rate(prof)


def test_default_length(fns, params):
    assert default_length(fns) == 40.0
    slow = StationaryFunctions(Quadratic(1.01), params, BoundaryData.from_params(params, 1.0, 1.2))
    assert default_length(slow) == pytest.approx(20.0 / math.sqrt(1 - 1 / 1.01))


@st.composite
def power_models(draw):
    a = draw(st.floats(0.2, 2.0))
    b = draw(st.floats(0.2, 2.0))
    mu = draw(st.floats(0.2, 2.0))
    gamma = draw(st.floats(2.0, 3.0))
    rp = draw(st.floats(0.5, 2.0))
    # K gamma rho^(gamma-2) > a mu / b on [rp/10, 10 rp]; tightest at the left end
    K = draw(st.floats(1.2, 4.0)) * a * mu / b / (gamma * (rp / 10) ** (gamma - 2))
    params = ModelParams(mu, 1.0, a, b)
    law = PowerLaw(K, gamma)
    wall = wall_integral(law, params, rp)
    d = draw(st.floats(0.02, 0.5)) * min(1.0, wall) * draw(st.sampled_from([-1, 1]))
    return StationaryFunctions(law, params, BoundaryData.from_params(params, rp, a / b * rp + d))


@given(f=power_models())
@settings(max_examples=15, deadline=None)
def test_general_law_profile_properties(f):
    rm = f.rho_minus
    rp = f.bdry.rho_plus
    dphi = f.bdry.phi_minus - f.bdry.phi_plus
    assert np.sign(rm - rp) == np.sign(dphi)
    assert abs(dphi) >= f.params.a / f.params.b * abs(rm - rp)
    L = default_length(f)
    prof = compute_steady_profile(f, HalfLineGrid(L, 200))
    sign = -np.sign(dphi)
    # the gap keeps full precision; rho_bar itself is rounded near rho_+, so it
    # is only strict where neighbouring values differ by more than an ulp
    assert np.all(np.sign(np.diff(prof.gap)) == sign)
    big = np.abs(np.diff(prof.gap)) > 2 * np.spacing(max(rm, rp))
    assert np.all(np.sign(np.diff(prof.rho_bar))[big] == sign)
    assert np.all(np.sign(np.diff(prof.rho_bar)) != -sign)
    assert abs(prof.phi_bar[0] - f.bdry.phi_minus) <= 1e-9
    assert prof.lambda_fit == pytest.approx(f.lambda_limit, rel=2e-2)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from vascnet.diagnostics import (
    EnergyLedger,
    Gap,
    energy_functional,
    enthalpy,
    fit_exponential,
    hardy_check,
    hardy_constant,
    perturbation_fields,
    random_wall_functions,
    sup_norm_gap,
    total_mass,
)
from vascnet.errors import InvalidInputError, VacuumError, WindowTooShortError
from vascnet.grid import HalfLineGrid, State
from vascnet.model import PowerLaw, Quadratic, Tabulated
from vascnet.steady import SteadyProfile


def on_profile(profile, d_rho=0.0, m=0.0, d_phi=0.0, t=0.0):
    n = profile.grid.N
    return State(profile.rho_c + d_rho, np.zeros(n) + m, profile.phi_c + d_phi, t)


def test_zero_perturbation(small_profile, params):
    pf = perturbation_fields(on_profile(small_profile), small_profile, params)
    for arr in (pf.varphi, pf.psi, pf.Phi, pf.Phi_t0, pf.Phi_tt0):
        assert np.all(arr == 0.0)
    assert pf.mass_defect == 0.0


def test_varphi_of_zero_mass_bump(params):
    grid = HalfLineGrid(40.0, 40000)
    prof = SteadyProfile.constant(grid, 1.0, 1.0)
    x = grid.centers
    h = grid.dx

    def V(y):
        return y * y * np.exp(-y)

    # finite-volume states hold cell averages of (2x - x^2) e^-x = V'
    d = (V(x + h / 2) - V(x - h / 2)) / h
    pf = perturbation_fields(on_profile(prof, d_rho=d), prof, params)
    assert abs(pf.mass_defect) <= 1e-8
    # -int_x^inf d/dy(y^2 e^-y) dy = +x^2 e^-x
    assert np.max(np.abs(pf.varphi - x * x * np.exp(-x))) <= 1e-6
    assert abs(pf.varphi[-1]) <= 1e-12
    assert abs(pf.varphi_wall) <= 1e-8


def test_varphi_central_difference_inverts(params):
    grid = HalfLineGrid(20.0, 2000)
    prof = SteadyProfile.constant(grid, 1.0, 1.0)
    x = grid.centers
    d = np.exp(-(x - 5) ** 2)
    pf = perturbation_fields(on_profile(prof, d_rho=d), prof, params)
    dv = (pf.varphi[2:] - pf.varphi[:-2]) / (2 * grid.dx)
    assert np.max(np.abs(dv - d[1:-1])) <= 5 * grid.dx**2
    assert pf.varphi_wall == pytest.approx(-pf.mass_defect, abs=1e-12)


def test_phi_t0_for_resting_concentration(small_profile, params):
    pf = perturbation_fields(on_profile(small_profile, d_rho=1e-3), small_profile, params)
    np.testing.assert_allclose(pf.Phi_t0, params.a * 1e-3, rtol=1e-12)


def test_grid_mismatch_rejected(small_profile, params):
    s = State(np.ones(10), np.zeros(10), np.ones(10))
    with pytest.raises(InvalidInputError):
        perturbation_fields(s, small_profile, params)
    with pytest.raises(InvalidInputError):
        sup_norm_gap(s, small_profile)


def test_enthalpy_closed_forms_match_quadrature():
    for law in (Quadratic(2.0), PowerLaw(1.5, 2.5), PowerLaw(1.0, 1.0)):
        for r in (0.4, 1.0, 2.3):
            inner = lambda s: integrate.quad(lambda t: law.dp(t) / t, 1.0, s)[0]
            oracle = integrate.quad(inner, 1.0, r)[0]
            assert enthalpy(law, r, 1.0) == pytest.approx(oracle, abs=1e-10)


def test_enthalpy_general_law_path():
    law = Tabulated(lambda r: r**3, lambda r: 3 * r**2, lambda r: 6 * r)
    assert enthalpy(law, 1.7, 1.0) == pytest.approx(float(enthalpy(PowerLaw(1.0, 3.0), 1.7, 1.0)),
                                                    rel=1e-10)


def test_energy_reference_state(law, params):
    grid = HalfLineGrid(10.0, 100)
    prof = SteadyProfile.constant(grid, 1.0, 1.0)
    e = energy_functional(on_profile(prof), law, params, prof)
    assert e.kinetic == 0.0
    assert e.internal == 0.0


def test_energy_uniform_slab(law, params):
    # rho = 1.1 on [0, 1]: internal = (K/2)(0.1)^2 / mu = 0.01
    grid = HalfLineGrid(1.0, 100)
    prof = SteadyProfile.constant(grid, 1.0, 1.0)
    e = energy_functional(on_profile(prof, d_rho=0.1), law, params, prof)
    assert e.internal == pytest.approx(0.01, rel=1e-12)
    assert e.F_value == e.kinetic + e.internal + e.field + e.coupling


def test_energy_kinetic(law, params):
    grid = HalfLineGrid(1.0, 100)
    prof = SteadyProfile.constant(grid, 2.0, 1.0)
    e = energy_functional(on_profile(prof, m=0.4), law, params, prof)
    # (1/2mu) int rho u^2 = 0.5 * 0.4^2 / 2
    assert e.kinetic == pytest.approx(0.04, rel=1e-12)


def test_energy_vacuum(law, params, small_profile):
    with pytest.raises(VacuumError):
        energy_functional(on_profile(small_profile, d_rho=-5.0), law, params, small_profile)


def test_ledger_stationary_state(law, params, small_profile):
    led = EnergyLedger()
    for t in (0.0, 0.5, 1.0):
        led.record(on_profile(small_profile, t=t), law, params, small_profile)
    assert led.residual == [0.0, 0.0]
    assert led.dissipation_pred == [0.0, 0.0]
    assert EnergyLedger.from_dict(led.to_dict()).F_value == led.F_value


def test_sup_norm_gap(small_profile):
    assert tuple(sup_norm_gap(on_profile(small_profile), small_profile)) == (0.0, 0.0, 0.0, 0.0)
    g = sup_norm_gap(on_profile(small_profile, m=0.01), small_profile)
    assert (g.rho, g.m, g.phi) == (0.0, 0.01, 0.0)
    assert g.total == 0.01
    assert Gap(1.0, 3.0, 2.0).total == 3.0


def test_gap_grid_invariance():
    vals = []
    for n in (1000, 3000):
        grid = HalfLineGrid(20.0, n)
        prof = SteadyProfile.constant(grid, 1.0, 1.0)
        # peak placed at x = 1.01, a cell centre of both grids
        y = grid.centers - 0.01
        vals.append(sup_norm_gap(on_profile(prof, d_rho=y * np.exp(-y)), prof).rho)
    assert abs(vals[0] - vals[1]) <= 1e-6
    assert vals[1] == pytest.approx(math.exp(-1), abs=1e-12)


def test_total_mass():
    s = State(np.full(10, 2.0), np.zeros(10), np.ones(10))
    assert total_mass(s, 0.1) == pytest.approx(2.0)


def test_hardy_constant():
    assert hardy_constant(1.0) == pytest.approx(16 / math.e, rel=1e-15)
    assert hardy_constant(1.0) == pytest.approx(5.886, abs=1e-3)
    assert hardy_constant(3.0) == 4.0
    with pytest.raises(InvalidInputError):
        hardy_constant(0.0)


def test_hardy_closed_form():
    x = np.linspace(0.0, 40.0, 40001)
    r = hardy_check(x * np.exp(-x), 1.0, x)
    assert r.lhs == pytest.approx(2 / 27, rel=1e-6)
    # second-order differencing at dx = 1e-3
    assert r.rhs == pytest.approx(0.25, rel=1e-5)
    assert r.ratio == pytest.approx(8 / 27, rel=1e-5)
    assert r.holds


def test_hardy_zero_function():
    x = np.linspace(0.0, 10.0, 101)
    r = hardy_check(np.zeros_like(x), 1.0, x)
    assert (r.lhs, r.rhs, r.ratio) == (0.0, 0.0, 0.0)
    assert r.holds


def test_hardy_rejects_nonzero_wall():
    x = np.linspace(0.0, 10.0, 101)
    with pytest.raises(InvalidInputError):
        hardy_check(np.ones_like(x), 1.0, x)


@given(seed=st.integers(0, 2**32 - 1), k=st.floats(0.1, 4.0))
@settings(max_examples=20, deadline=None)
def test_hardy_random_functions(seed, k):
    x = np.linspace(0.0, 60.0, 6001)
    for f in random_wall_functions(3, x, seed):
        assert hardy_check(f, k, x).holds


def test_fit_exact_exponential():
    t = np.arange(11.0)
    assert fit_exponential(t, 3 * np.exp(-0.4 * t)) == pytest.approx(0.4, abs=1e-10)


def test_fit_noisy_exponential():
    rng = np.random.default_rng(7)
    t = np.linspace(0, 10, 101)
    v = 3 * np.exp(-0.4 * t) * (1 + 0.01 * rng.standard_normal(t.size))
    assert fit_exponential(t, v) == pytest.approx(0.4, rel=0.05)


def test_fit_window_and_errors():
    t = np.arange(11.0)
    v = np.exp(-0.4 * t)
    assert fit_exponential(t, v, window=(5, 10)) == pytest.approx(0.4, abs=1e-10)
    with pytest.raises(WindowTooShortError):
        fit_exponential(t, np.zeros(11))
    with pytest.raises(WindowTooShortError):
        fit_exponential(t, v, window=(8, 10))

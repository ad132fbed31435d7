"""Measured quantities: perturbations, energy, sup-norm gaps, Hardy ratios, decay fits.

All integrals over the truncated domain use the cell (midpoint) rule on
cell-centred values unless noted; the face gradient of ``phi`` uses the
Dirichlet wall values carried by the steady profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import InvalidInputError, VacuumError, WindowTooShortError
from .grid import State
from .model import ModelParams, PowerLaw, PressureLaw, Quadratic
from .steady import SteadyProfile

__all__ = [
    "PerturbationFields",
    "perturbation_fields",
    "enthalpy",
    "EnergyEntry",
    "energy_functional",
    "EnergyLedger",
    "Gap",
    "sup_norm_gap",
    "hardy_constant",
    "HardyResult",
    "hardy_check",
    "random_wall_functions",
    "fit_exponential",
    "total_mass",
]


def _check_shared(state: State, profile: SteadyProfile):
    if len(state.rho) != profile.grid.N:
        raise InvalidInputError(
            f"state has {len(state.rho)} cells, profile grid has {profile.grid.N}")


@dataclass(frozen=True)
class PerturbationFields:
    """Anti-derivative perturbation variables and initial time derivatives of ``phi``."""

    varphi: np.ndarray
    psi: np.ndarray
    Phi: np.ndarray
    Phi_t0: np.ndarray
    Phi_tt0: np.ndarray
    mass_defect: float
    varphi_wall: float  # extrapolated to x = 0; equals -mass_defect


def _dirichlet_xx(f, dx, left=0.0, right=0.0):
    fe = np.concatenate(([2.0 * left - f[0]], f, [2.0 * right - f[-1]]))
    return (fe[2:] - 2.0 * f + fe[:-2]) / dx**2


def perturbation_fields(state: State, profile: SteadyProfile, params: ModelParams) -> PerturbationFields:
    """Perturbations ``(varphi, psi, Phi)`` of a state about the steady profile.

    ``varphi(x) = -int_x^inf (rho - rho_bar)``: cumulative trapezoid from the
    right edge (where it is 0) over cell centres, with half cells at both ends.
    """
    _check_shared(state, profile)
    dx = profile.grid.dx
    d = state.rho - profile.rho_c
    n = len(d)
    varphi = np.empty(n)
    varphi[-1] = -0.5 * dx * d[-1]
    # right-to-left running sum keeps the order of additions fixed
    steps = 0.5 * dx * (d[:-1] + d[1:])
    varphi[:-1] = varphi[-1] - np.cumsum(steps[::-1])[::-1]
    wall = varphi[0] - 0.5 * dx * d[0]
    mass_defect = float(np.sum(d) * dx)

    Phi = state.phi - profile.phi_c
    Phi_t0 = _dirichlet_xx(Phi, dx) + params.a * d - params.b * Phi
    me = np.concatenate(([-state.m[0]], state.m, [-state.m[-1]]))
    m_x = (me[2:] - me[:-2]) / (2 * dx)
    Phi_tt0 = _dirichlet_xx(Phi_t0, dx) - params.a * m_x - params.b * Phi_t0
    return PerturbationFields(varphi, state.m.copy(), Phi, Phi_t0, Phi_tt0, mass_defect,
                              float(wall))


def enthalpy(law: PressureLaw, rho, ref: float):
    """``G(rho)`` with ``rho G'' = p'`` and ``G(ref) = G'(ref) = 0``."""
    r = np.asarray(rho, dtype=float)
    if isinstance(law, Quadratic):
        return 0.5 * law.K * (r - ref) ** 2
    if isinstance(law, PowerLaw):
        K, g = law.K, law.gamma
        if g == 1.0:
            return K * (r * np.log(r / ref) - r + ref)
        return K / (g - 1) * (r**g - ref**g) - K * g / (g - 1) * ref ** (g - 1) * (r - ref)

    def one(v):
        val, _ = integrate.quad(lambda t: (v - t) * law.dp(t) / t, ref, v,
                                epsabs=1e-13, epsrel=1e-12)
        return val

    return np.vectorize(one, otypes=[float])(r)


@dataclass(frozen=True)
class EnergyEntry:
    t: float
    kinetic: float
    internal: float
    field: float
    coupling: float

    @property
    def F_value(self) -> float:
        return self.kinetic + self.internal + self.field + self.coupling


def _face_gradient_sq(phi, dx, left, right):
    g_int = np.diff(phi) / dx
    g_l = (phi[0] - left) / (0.5 * dx)
    g_r = (right - phi[-1]) / (0.5 * dx)
    return float(np.sum(g_int * g_int) * dx + 0.5 * dx * (g_l * g_l + g_r * g_r))


def energy_functional(state: State, law: PressureLaw, params: ModelParams,
                      profile: SteadyProfile, enthalpy_ref: float | None = None) -> EnergyEntry:
    """Components of the Lyapunov functional::

        F = (1/2mu) int rho u^2 + (1/mu) int G(rho) + (1/2a) int (phi_x^2 + b phi^2) - int rho phi
    """
    _check_shared(state, profile)
    if np.any(~(state.rho > 0)):
        i = int(np.argmin(state.rho))
        raise VacuumError(i, state.t, state.rho[i])
    dx = profile.grid.dx
    ref = profile.rho_plus if enthalpy_ref is None else enthalpy_ref
    mu, a, b = params.mu, params.a, params.b
    kinetic = 0.5 / mu * float(np.sum(state.m * state.m / state.rho) * dx)
    internal = float(np.sum(enthalpy(law, state.rho, ref)) * dx) / mu
    grad2 = _face_gradient_sq(state.phi, dx, profile.phi_minus, profile.far_field[1])
    fld = 0.5 / a * (grad2 + b * float(np.sum(state.phi * state.phi) * dx))
    coupling = -float(np.sum(state.rho * state.phi) * dx)
    return EnergyEntry(float(state.t), kinetic, internal, fld, coupling)


@dataclass
class EnergyLedger:
    """Energy samples with per-interval dissipation bookkeeping.

    Interval ``k`` spans samples ``k`` and ``k+1``. The predicted dissipation
    rate is ``(alpha/mu) int rho u^2`` averaged over the two ends plus
    ``(1/a) int phi_t^2`` with ``phi_t`` the difference quotient.
    """

    t: list = field(default_factory=list)
    F_value: list = field(default_factory=list)
    kinetic: list = field(default_factory=list)
    internal: list = field(default_factory=list)
    field_energy: list = field(default_factory=list)
    coupling: list = field(default_factory=list)
    dissipation_pred: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    _prev: tuple | None = field(default=None, repr=False, compare=False)

    def record(self, state: State, law, params: ModelParams, profile: SteadyProfile):
        e = energy_functional(state, law, params, profile)
        dx = profile.grid.dx
        rho_u2 = float(np.sum(state.m * state.m / state.rho) * dx)
        if self._prev is not None:
            t0, F0, ru0, phi0 = self._prev
            dt = e.t - t0
            if dt > 0:
                phi_t = (state.phi - phi0) / dt
                diss = (params.alpha / params.mu * 0.5 * (ru0 + rho_u2)
                        + float(np.sum(phi_t * phi_t) * dx) / params.a)
                self.dissipation_pred.append(diss)
                self.residual.append(abs((e.F_value - F0) / dt + diss))
        self.t.append(e.t)
        self.F_value.append(e.F_value)
        self.kinetic.append(e.kinetic)
        self.internal.append(e.internal)
        self.field_energy.append(e.field)
        self.coupling.append(e.coupling)
        self._prev = (e.t, e.F_value, rho_u2, state.phi.copy())
        return e

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in
                ("t", "F_value", "kinetic", "internal", "field_energy", "coupling",
                 "dissipation_pred", "residual")}

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyLedger":
        return cls(**{k: list(v) for k, v in d.items()})


@dataclass(frozen=True)
class Gap:
    rho: float
    m: float
    phi: float

    @property
    def total(self) -> float:
        return max(self.rho, self.m, self.phi)

    def __iter__(self):
        return iter((self.rho, self.m, self.phi, self.total))


def sup_norm_gap(state: State, profile: SteadyProfile) -> Gap:
    """Max-abs distance of ``(rho, m, phi)`` from ``(rho_bar, 0, phi_bar)``."""
    _check_shared(state, profile)
    return Gap(float(np.max(np.abs(state.rho - profile.rho_c))),
               float(np.max(np.abs(state.m))),
               float(np.max(np.abs(state.phi - profile.phi_c))))


def total_mass(state: State, dx: float) -> float:
    return float(np.sum(state.rho) * dx)


def hardy_constant(k: float) -> float:
    """``4 sup_x e^{-kx} (1+x)^2``; the sup sits at ``x = 2/k - 1`` when ``k < 2``."""
    if not k > 0:
        raise InvalidInputError("k must be positive")
    x = 2.0 / k - 1.0 if k < 2 else 0.0
    return 4.0 * math.exp(-k * x) * (1.0 + x) ** 2


@dataclass(frozen=True)
class HardyResult:
    lhs: float
    rhs: float
    ratio: float
    constant: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.constant * self.rhs


def hardy_check(f, k: float, x) -> HardyResult:
    """Compare ``int e^{-kx} f^2`` with ``int f_x^2`` for ``f`` sampled on nodes ``x``.

    ``f[0]`` must vanish. Trapezoid integrals; ``f_x`` by second-order differences.
    """
    f = np.asarray(f, dtype=float)
    x = np.asarray(x, dtype=float)
    if x[0] != 0.0:
        raise InvalidInputError("hardy_check needs nodes starting at x = 0")
    if abs(f[0]) > 1e-14:
        raise InvalidInputError(f"hardy_check needs f(0) = 0, got {f[0]:.3g}")
    ck = hardy_constant(k)
    fx = np.gradient(f, x, edge_order=2)
    lhs = float(np.trapezoid(np.exp(-k * x) * f * f, x))
    rhs = float(np.trapezoid(fx * fx, x))
    ratio = lhs / rhs if rhs > 0 else 0.0
    return HardyResult(lhs, rhs, ratio, ck)


def random_wall_functions(n: int, x, seed: int = 0):
    """``n`` smooth functions with ``f(0) = 0``, sampled on ``x``.

    Each is ``x (c0 + c1 x + c2 x^2) e^{-s x}`` with normal coefficients and
    ``s`` uniform in ``[0.3, 2]``.
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    out = []
    for _ in range(n):
        c = rng.normal(size=3)
        s = rng.uniform(0.3, 2.0)
        out.append(x * (c[0] + c[1] * x + c[2] * x * x) * np.exp(-s * x))
    return out


def fit_exponential(t, values, window=None, min_points: int = 5) -> float:
    """Decay rate of ``values ~ C e^{-rate t}`` by least squares on ``log(values)``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = v > 0
    if window is not None:
        sel &= (t >= window[0]) & (t <= window[1])
    if sel.sum() < min_points:
        raise WindowTooShortError(f"{int(sel.sum())} usable points, need {min_points}")
    slope = np.polyfit(t[sel], np.log(v[sel]), 1)[0]
    return float(-slope)

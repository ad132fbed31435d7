"""Finite-volume time stepping of the full system on ``[0, L]``.

One step:

1. Rusanov update of ``(rho, m)`` plus the sources ``mu rho phi_x - alpha m``,
   all evaluated on the pre-step state (forward Euler). The wall ghost cell
   reflects (``rho_g = rho_0``, ``m_g = -m_0``); the right ghost is clamped to
   ``(rho_bar(L), 0)``.
2. Theta-scheme solve of ``phi_t = phi_xx - b phi + a rho_new`` with Dirichlet
   values ``phi_-`` at ``x = 0`` and ``phi_bar(L)`` at ``x = L``.

With ``SchemeConfig.well_balanced`` the discrete residual of the steady
profile is subtracted from both updates, which makes the sampled profile an
exact fixed point while leaving the perturbation dynamics first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__, kernels
from .diagnostics import EnergyLedger, sup_norm_gap, total_mass
from .errors import (
    HyperbolicityLossError,
    InvalidInputError,
    NumericalError,
    NumericalFailure,
    VacuumError,
)
from .grid import HalfLineGrid, SchemeConfig, State
from .model import ModelParams, PressureLaw
from .steady import SteadyProfile

__all__ = [
    "hyperbolic_flux",
    "stable_dt",
    "Solver",
    "step",
    "simulate",
    "theta_diffusion_step",
    "Observer",
    "RunReport",
    "REPORT_VERSION",
]

REPORT_VERSION = 1


def hyperbolic_flux(left, right, law: PressureLaw):
    """Rusanov flux between states ``left = (rho, m)`` and ``right = (rho, m)``."""
    rl, ml = (np.asarray(v, dtype=float) for v in left)
    rr, mr = (np.asarray(v, dtype=float) for v in right)
    if np.any(~(rl > 0)) or np.any(~(rr > 0)):
        raise VacuumError(-1, math.nan, float(min(np.min(rl), np.min(rr))))
    pl, dpl = law.p(rl), law.dp(rl)
    pr, dpr = law.p(rr), law.dp(rr)
    s = np.maximum(np.abs(ml / rl) + np.sqrt(dpl), np.abs(mr / rr) + np.sqrt(dpr))
    f_rho = 0.5 * (ml + mr) - 0.5 * s * (rr - rl)
    f_m = 0.5 * ((ml * ml / rl + pl) + (mr * mr / rr + pr)) - 0.5 * s * (mr - ml)
    if f_rho.ndim == 0:
        return float(f_rho), float(f_m)
    return f_rho, f_m


def stable_dt(state: State, cfg: SchemeConfig, law: PressureLaw, params: ModelParams,
              dx: float) -> float:
    """CFL step ``cfl dx / max(|u| + c)``, capped by ``0.9/alpha`` and ``0.9/b``."""
    dp = law.dp(state.rho)
    if np.any(~(dp > 0)):
        raise HyperbolicityLossError("p'(rho) <= 0 in the current state")
    smax = float(np.max(np.abs(state.m / state.rho) + np.sqrt(dp)))
    return min(cfg.cfl * dx / smax, 0.9 / params.alpha, 0.9 / params.b)


@dataclass(frozen=True)
class Observer:
    """Callback ``fn(state)`` invoked every ``period`` time units (every step if 0)."""

    period: float
    fn: Callable


@dataclass
class RunReport:
    """Time series and metadata of one simulation.

    ``gap_*`` are sup-norm distances from the steady profile; ``outflow`` is
    the cumulative mass that left through ``x = L``.
    """

    metadata: dict = field(default_factory=dict)
    times: list = field(default_factory=list)
    gap_rho: list = field(default_factory=list)
    gap_m: list = field(default_factory=list)
    gap_phi: list = field(default_factory=list)
    gap_total: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    outflow: list = field(default_factory=list)
    min_rho: list = field(default_factory=list)
    energy: EnergyLedger = field(default_factory=EnergyLedger)
    dt_history: list = field(default_factory=list)
    status: str = "ok"
    version: int = REPORT_VERSION

    _SERIES = ("times", "gap_rho", "gap_m", "gap_phi", "gap_total", "mass", "outflow",
               "min_rho", "dt_history")

    def to_dict(self) -> dict:
        d = {"version": self.version, "status": self.status, "metadata": self.metadata}
        for k in self._SERIES:
            d[k] = list(getattr(self, k))
        d["energy"] = self.energy.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        kw = {k: list(d[k]) for k in cls._SERIES}
        return cls(metadata=dict(d["metadata"]), energy=EnergyLedger.from_dict(d["energy"]),
                   status=d["status"], version=d["version"], **kw)

    def __eq__(self, other):
        return isinstance(other, RunReport) and self.to_dict() == other.to_dict()


class Solver:
    """Time stepper bound to one grid, law, parameter set and steady profile."""

    def __init__(self, grid: HalfLineGrid, cfg: SchemeConfig, law: PressureLaw,
                 params: ModelParams, profile: SteadyProfile):
        if profile.grid.N != grid.N or profile.grid.L != grid.L:
            raise InvalidInputError("profile and solver grids differ")
        self.grid = grid
        self.cfg = cfg
        self.law = law
        self.params = params
        self.profile = profile
        self.dx = grid.dx
        self.rho_r, self.phi_r = profile.far_field
        self.p_r = float(law.p(self.rho_r))
        self.c_r = float(np.sqrt(law.dp(self.rho_r)))
        self.phi_l = profile.phi_minus
        n = grid.N
        self._Rr = np.empty(n)
        self._Rm = np.empty(n)
        if cfg.well_balanced:
            eq = State(profile.rho_c, np.zeros(n), profile.phi_c)
            self._Rr_eq, self._Rm_eq = self._hyperbolic(eq)
            self._Rr_eq = self._Rr_eq.copy()
            self._Rm_eq = self._Rm_eq.copy()
            self._Rp_eq = self._diffusion_op(profile.phi_c) + params.a * profile.rho_c
            # right-face mass flux of the profile, for outflow bookkeeping
            self._fr_eq = self._right_flux(profile.rho_c[-1], 0.0)
        else:
            self._Rr_eq = self._Rm_eq = self._Rp_eq = None
            self._fr_eq = 0.0

    # -- pieces ----------------------------------------------------------------
    def _hyperbolic(self, s: State):
        rho = s.rho
        p = self.law.p(rho)
        dp = self.law.dp(rho)
        if np.any(~(dp > 0)):
            raise HyperbolicityLossError(f"p'(rho) <= 0 at t={s.t}")
        c = np.sqrt(dp)
        kernels.hyperbolic_rhs(rho, s.m, s.phi, p, c, self.rho_r, self.p_r, self.c_r,
                               self.phi_l, self.phi_r, self.dx, self.params.mu,
                               self.params.alpha, self._Rr, self._Rm)
        return self._Rr, self._Rm

    def _diffusion_op(self, phi):
        """``phi_xx - b phi`` with the Dirichlet faces folded in."""
        pe = np.concatenate(([2.0 * self.phi_l - phi[0]], phi, [2.0 * self.phi_r - phi[-1]]))
        return (pe[2:] - 2.0 * phi + pe[:-2]) / self.dx**2 - self.params.b * phi

    def _right_flux(self, rho_last, m_last):
        return hyperbolic_flux((rho_last, m_last), (self.rho_r, 0.0), self.law)[0]

    def right_outflow_rate(self, s: State) -> float:
        """Mass flux through ``x = L`` as used by the update."""
        return self._right_flux(s.rho[-1], s.m[-1]) - self._fr_eq

    def stable_dt(self, s: State) -> float:
        return stable_dt(s, self.cfg, self.law, self.params, self.dx)

    def step(self, s: State, dt: float, check_dt: bool = True) -> State:
        if check_dt:
            lim = self.stable_dt(s)
            if dt > lim * (1 + 1e-12):
                raise InvalidInputError(f"dt={dt:.6g} exceeds stable_dt={lim:.6g}")
        if np.any(~(s.rho > 0)):
            i = int(np.argmin(s.rho))
            raise VacuumError(i, s.t, s.rho[i])
        Rr, Rm = self._hyperbolic(s)
        if self._Rr_eq is not None:
            Rr = Rr - self._Rr_eq
            Rm = Rm - self._Rm_eq
        rho = s.rho + dt * Rr
        m = s.m + dt * Rm
        t_new = s.t + dt
        if np.any(~(rho > 0)):
            i = int(np.argmin(rho))
            raise VacuumError(i, t_new, rho[i])
        phi = self._phi_update(s.phi, rho, dt)
        return State(rho, m, phi, t_new)

    def _phi_update(self, phi, rho_new, dt):
        return theta_diffusion_step(phi, self.params.a * rho_new, dt, self.dx, self.params.b,
                                    self.cfg.diffusion_theta, self.phi_l, self.phi_r,
                                    self._Rp_eq)

    # -- driver ------------------------------------------------------------------
    def metadata(self) -> dict:
        return {
            "tool": "vascnet",
            "tool_version": __version__,
            "backend": kernels.BACKEND,
            "scheme": self.cfg.to_dict(),
            "grid": {"L": self.grid.L, "N": self.grid.N, "dx": self.dx},
            "law": self.law.to_dict(),
            "params": {"mu": self.params.mu, "alpha": self.params.alpha,
                       "a": self.params.a, "b": self.params.b},
            "boundary": {"rho_plus": self.profile.rho_plus, "phi_minus": self.profile.phi_minus,
                         "phi_plus": self.profile.phi_plus, "rho_minus": self.profile.rho_minus},
        }

    def _record(self, rep: RunReport, s: State, outflow: float, energy: bool):
        g = sup_norm_gap(s, self.profile)
        rep.times.append(float(s.t))
        rep.gap_rho.append(g.rho)
        rep.gap_m.append(g.m)
        rep.gap_phi.append(g.phi)
        rep.gap_total.append(g.total)
        rep.mass.append(total_mass(s, self.dx))
        rep.outflow.append(float(outflow))
        rep.min_rho.append(float(np.min(s.rho)))
        if energy:
            rep.energy.record(s, self.law, self.params, self.profile)

    def simulate(self, initial: State, T_end: float, sample_every: float = 0.5,
                 observers=(), energy: bool = True, max_steps: int | None = None):
        """Advance to ``T_end`` with adaptive steps; returns ``(final_state, report)``.

        Steps are shortened to land exactly on multiples of ``sample_every``
        (every step is sampled when it is 0). On a numerical error the partial
        report is attached to the exception as ``.report``.
        """
        rep = RunReport(metadata=self.metadata())
        rep.metadata["T_end"] = float(T_end)
        rep.metadata["sample_every"] = float(sample_every)
        s = initial
        outflow = 0.0
        self._record(rep, s, outflow, energy)
        obs_next = [0.0 for _ in observers]
        self._notify(observers, obs_next, s)
        k_sample = 1
        n = 0
        run_min = float(np.min(s.rho))
        eps = 1e-12 * max(1.0, T_end)
        try:
            while s.t < T_end - eps:
                if max_steps is not None and n >= max_steps:
                    break
                dt = self.stable_dt(s)
                target = T_end
                if sample_every > 0:
                    target = min(target, k_sample * sample_every + initial.t)
                hit = s.t + dt >= target - eps
                if hit:
                    dt = target - s.t
                fr = self.right_outflow_rate(s)
                s_new = self.step(s, dt, check_dt=False)
                if hit:
                    # land exactly on the sample time
                    s_new = State(s_new.rho, s_new.m, s_new.phi, target)
                outflow += dt * fr
                s = s_new
                run_min = min(run_min, float(np.min(s.rho)))
                n += 1
                rep.dt_history.append(float(dt))
                if sample_every == 0 or (hit and sample_every > 0):
                    self._record(rep, s, outflow, energy)
                    if hit and sample_every > 0 and target < T_end:
                        k_sample += 1
                elif s.t >= T_end - eps:
                    self._record(rep, s, outflow, energy)
                self._notify(observers, obs_next, s)
        except NumericalError as exc:
            rep.status = f"failed: {exc}"
            rep.metadata["steps"] = n
            exc.report = rep
            exc.state = s
            raise
        if rep.times[-1] != s.t:
            self._record(rep, s, outflow, energy)
        rep.metadata["steps"] = n
        rep.metadata["min_rho_all_steps"] = run_min
        return s, rep

    @staticmethod
    def _notify(observers, nxt, s):
        for i, ob in enumerate(observers):
            if ob.period <= 0 or s.t >= nxt[i] - 1e-12:
                ob.fn(s)
                if ob.period > 0:
                    while nxt[i] <= s.t + 1e-12:
                        nxt[i] += ob.period


def theta_diffusion_step(phi, source, dt: float, dx: float, b: float, theta: float,
                         phi_l: float, phi_r: float, residual=None) -> np.ndarray:
    """One theta-step of ``phi_t = phi_xx - b phi + source`` on cell centres.

    Dirichlet values ``phi_l``/``phi_r`` sit on the outer faces (ghost
    ``2 phi_b - phi_edge``). ``source`` is taken at the new time level.
    ``residual``, if given, is subtracted from the right-hand side as a rate.
    """
    n = len(phi)
    r = dt / dx**2
    lower = np.full(n, -theta * r)
    upper = np.full(n, -theta * r)
    diag = np.full(n, 1.0 + theta * (2.0 * r + dt * b))
    diag[0] += theta * r
    diag[-1] += theta * r
    lower[0] = 0.0
    upper[-1] = 0.0
    rhs = phi + dt * source
    if theta < 1.0:
        pe = np.concatenate(([2.0 * phi_l - phi[0]], phi, [2.0 * phi_r - phi[-1]]))
        rhs = rhs + (1.0 - theta) * dt * ((pe[2:] - 2.0 * phi + pe[:-2]) / dx**2 - b * phi)
    rhs[0] += theta * 2.0 * r * phi_l
    rhs[-1] += theta * 2.0 * r * phi_r
    if residual is not None:
        rhs = rhs - dt * residual
    out = np.empty(n)
    try:
        kernels.thomas(lower, diag, upper, rhs, out)
    except (ZeroDivisionError, np.linalg.LinAlgError) as exc:
        raise NumericalFailure(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("tridiagonal solve produced non-finite values")
    return out


def step(state: State, dt: float, cfg: SchemeConfig, law: PressureLaw, params: ModelParams,
         profile: SteadyProfile) -> State:
    """Single step; builds a throwaway :class:`Solver`. Prefer the class in loops."""
    return Solver(profile.grid, cfg, law, params, profile).step(state, dt)


def simulate(initial: State, T_end: float, cfg: SchemeConfig, law: PressureLaw,
             params: ModelParams, profile: SteadyProfile, observers=(),
             sample_every: float = 0.5, energy: bool = True):
    return Solver(profile.grid, cfg, law, params, profile).simulate(
        initial, T_end, sample_every=sample_every, observers=observers, energy=energy)

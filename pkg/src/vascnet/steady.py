"""Non-constant steady states on the half-line.

The stationary problem is reduced to a scalar first-order ODE for the density.
The concentration follows from ``phi = F(rho) + phi_plus``, where::

    F(s)  = int_{rho+}^s p'(t) / (mu t) dt
    H(s)  = b F(s) + b phi_plus - a s
    dG(s) = int_{rho+}^s 2 F'(t) H(t) dt          (>= 0, zero only at rho+)
    rho'  = -/+ sqrt(dG(rho)) / F'(rho)           (sign of phi_minus - phi_plus)

Writing ``w = rho - rho+`` and ``dG = w^2 g`` with ``g`` smooth and positive,
the slope is ``-w sqrt(g)/F'`` in both monotone directions. Integrating the
gap ``w`` rather than ``rho`` keeps full relative precision in the tail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize

from .errors import (
    DomainError,
    InfeasibleBoundaryDataError,
    NumericalFailure,
    WindowTooShortError,
)
from .grid import HalfLineGrid
from .model import BoundaryData, ModelParams, PressureLaw, Quadratic, wall_integral

__all__ = [
    "Direction",
    "StationaryFunctions",
    "SteadyProfile",
    "eval_F",
    "eval_H",
    "delta_G",
    "solve_rho_minus",
    "steady_rhs",
    "compute_steady_profile",
    "steady_residual",
    "residual_fields",
    "estimate_decay_rate",
    "default_length",
]

_QUAD_TOL = 1e-12
_CLAMP = 1e-14


class Direction(enum.Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"

    @classmethod
    def of(cls, bdry: BoundaryData) -> "Direction":
        return cls.DECREASING if bdry.phi_minus > bdry.phi_plus else cls.INCREASING


class StationaryFunctions:
    """``F``, ``H`` and ``G(s) - G(rho+)`` for one model and far field.

    Quadratic pressure uses closed forms. Other laws use adaptive quadrature
    for ``F`` and a cached Gauss-Legendre rule for the scaled ``g``.
    """

    def __init__(self, law: PressureLaw, params: ModelParams, bdry: BoundaryData,
                 gl_order: int = 20):
        self.law = law
        self.params = params
        self.bdry = bdry
        self._t, w = np.polynomial.legendre.leggauss(gl_order)
        self._t = 0.5 * (self._t + 1.0)
        self._w = 0.5 * w
        # tensor nodes for the inner integral of H'
        self._tu = np.outer(self._t, self._t)
        self._closed = isinstance(law, Quadratic)

    # -- F and derivatives -------------------------------------------------
    def dF(self, s):
        return self.law.dp(s) / (self.params.mu * np.asarray(s, dtype=float))

    def F(self, s: float) -> float:
        _check_density(s)
        rp = self.bdry.rho_plus
        if self._closed:
            return self.law.K / self.params.mu * (s - rp)
        if s == rp:
            return 0.0
        val, _ = integrate.quad(lambda t: float(self.dF(t)), rp, s,
                                epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200)
        return val

    def F_array(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self._closed:
            _check_density(s)
            return self.law.K / self.params.mu * (s - self.bdry.rho_plus)
        return np.array([self.F(float(v)) for v in s.ravel()]).reshape(s.shape)

    def H(self, s: float) -> float:
        p, b = self.params, self.bdry
        if self._closed:
            _check_density(s)
            return (p.b * self.law.K / p.mu - p.a) * (s - b.rho_plus)
        return p.b * self.F(s) + p.b * b.phi_plus - p.a * s

    # -- scaled first integral ----------------------------------------------
    def g(self, s: float) -> float:
        """``dG(s) / (s - rho+)^2``, continuous through ``rho+``."""
        _check_density(s)
        p = self.params
        if self._closed:
            k = self.law.K / p.mu
            return k * (p.b * k - p.a)
        rp = self.bdry.rho_plus
        w = s - rp
        # all nodes lie between rho+ and s > 0, so the domain check is skipped
        r_in = rp + self._tu * w
        r_out = rp + self._t * w
        inner = p.b * self.law._dp(r_in) / (p.mu * r_in) - p.a   # H' on [rho+, tau_i]
        h = inner @ self._w                                      # H(tau_i) / (tau_i - rho+)
        outer = 2.0 * self._t * self.law._dp(r_out) / (p.mu * r_out) * h
        return float(outer @ self._w)

    def delta_G(self, s: float) -> float:
        w = s - self.bdry.rho_plus
        val = w * w * self.g(s)
        if -_CLAMP < val < 0.0:
            val = 0.0
        return val

    def rate(self, s: float) -> float:
        """``sqrt(g(s)) / F'(s)``; the steady slope is ``-(s - rho+)`` times this."""
        if self._closed:
            return self.lambda_limit
        gs = self.g(s)
        if gs < 0:
            if gs > -_CLAMP:
                gs = 0.0
            else:
                raise NumericalFailure(f"negative first integral at s={s}")
        return math.sqrt(gs) / float(self.dF(s))

    @cached_property
    def lambda_limit(self) -> float:
        """``sqrt((b F'(rho+) - a) / F'(rho+))``: slope of the RHS at ``rho+``."""
        p = self.params
        d = float(self.dF(self.bdry.rho_plus))
        return math.sqrt((p.b * d - p.a) / d)

    @cached_property
    def rho_minus(self) -> float:
        return solve_rho_minus(self, self.bdry)

    @property
    def direction(self) -> Direction:
        return Direction.of(self.bdry)


def _check_density(s):
    if np.any(~(np.asarray(s) > 0)):
        raise DomainError("stationary functions need density > 0")


def eval_F(fns: StationaryFunctions, s: float) -> float:
    return fns.F(s)


def eval_H(fns: StationaryFunctions, s: float) -> float:
    return fns.H(s)


def delta_G(fns: StationaryFunctions, s: float) -> float:
    return fns.delta_G(s)


def solve_rho_minus(fns: StationaryFunctions, bdry: BoundaryData | None = None,
                    max_doublings: int = 60) -> float:
    """Wall density ``rho_-`` with ``F(rho_-) = phi_- - phi_+``.

    The bracket grows geometrically from ``rho_+`` (upwards or downwards)
    until the sign changes; Brent's method then closes it.
    """
    bdry = bdry or fns.bdry
    target = bdry.phi_minus - bdry.phi_plus
    rp = bdry.rho_plus
    if target == 0:
        return rp
    if target < 0:
        wall = wall_integral(fns.law, fns.params, rp)
        if not math.isinf(wall) and target <= -wall:
            raise InfeasibleBoundaryDataError(
                f"infeasible-boundary-data: phi_- - phi_+ = {target:.6g} "
                f"but F is bounded below by {-wall:.6g}")

    def resid(s):
        return fns.F(s) - target

    lo = hi = rp
    for k in range(1, max_doublings + 1):
        if target > 0:
            lo, hi = hi, rp * 2.0**k
            if resid(hi) >= 0:
                break
        else:
            lo, hi = rp / 2.0**k, lo
            if resid(lo) <= 0:
                break
    else:
        raise InfeasibleBoundaryDataError(
            f"infeasible-boundary-data: no bracket for F(s) = {target:.6g}")
    if resid(lo) == 0:
        return lo
    if resid(hi) == 0:
        return hi
    root = optimize.brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                           maxiter=500)
    if abs(resid(root)) > 1e-12:
        raise NumericalFailure(f"rho_- root residual {resid(root):.3g} above 1e-12")
    return root


def steady_rhs(fns: StationaryFunctions, rho: float, direction: Direction | None = None) -> float:
    """Slope ``d rho/dx`` of the steady density at value ``rho``."""
    rp = fns.bdry.rho_plus
    rm = fns.rho_minus
    if direction is not None and direction is not fns.direction:
        raise DomainError(f"direction {direction.value} contradicts the boundary data")
    if not (min(rm, rp) <= rho <= max(rm, rp)):
        raise DomainError(f"rho={rho} outside [{min(rm, rp)}, {max(rm, rp)}]")
    if rho == rp:
        return 0.0
    return -(rho - rp) * fns.rate(rho)


@dataclass(frozen=True)
class SteadyProfile:
    """Steady density and concentration sampled on a grid.

    Node arrays (``x``, ``rho_bar``, ``phi_bar``, ``gap``) include both ends of
    ``[0, L]``; ``*_c`` arrays are at cell centres and feed the time stepper.
    ``gap`` holds ``rho_bar - rho_plus`` at full relative precision.
    """

    grid: HalfLineGrid
    x: np.ndarray
    rho_bar: np.ndarray
    phi_bar: np.ndarray
    gap: np.ndarray
    rho_c: np.ndarray
    phi_c: np.ndarray
    rho_minus: float
    rho_plus: float
    phi_minus: float
    phi_plus: float
    lambda_fit: float
    lambda_limit: float
    direction: Direction | None

    @property
    def x_c(self) -> np.ndarray:
        return self.grid.centers

    @property
    def far_field(self) -> tuple:
        """Profile values at ``x = L`` used by the right boundary clamp."""
        return float(self.rho_bar[-1]), float(self.phi_bar[-1])

    @classmethod
    def constant(cls, grid: HalfLineGrid, rho: float, phi: float) -> "SteadyProfile":
        n, nc = grid.N + 1, grid.N
        return cls(grid, grid.nodes, np.full(n, rho), np.full(n, phi), np.zeros(n),
                   np.full(nc, rho), np.full(nc, phi), rho, rho, phi, phi,
                   math.nan, math.nan, None)


def default_length(fns: StationaryFunctions) -> float:
    """Domain length with ``exp(-lambda L) <= exp(-20)``, at least 40.

    Falls back to 40 when the far-field rate is not real (the model then
    fails validation anyway, and that is the error worth reporting).
    """
    p = fns.params
    d = float(fns.dF(fns.bdry.rho_plus))
    if not (p.b * d - p.a) / d > 0:
        return 40.0
    return max(40.0, 20.0 / fns.lambda_limit)


def compute_steady_profile(fns: StationaryFunctions, grid: HalfLineGrid,
                           substeps: int = 10) -> SteadyProfile:
    """Integrate the steady ODE from the wall with classical RK4.

    The step is ``dx / substeps``; ``substeps`` must be even so cell centres
    fall on step boundaries.
    """
    if substeps % 2:
        raise ValueError("substeps must be even")
    b = fns.bdry
    rp = b.rho_plus
    rm = fns.rho_minus
    h = grid.dx / substeps
    half = substeps // 2

    if fns._closed:
        lam = fns.lambda_limit

        def f(w):
            return -lam * w
    else:
        def f(w):
            return -w * fns.rate(rp + w)

    nn = grid.N + 1
    gap = np.empty(nn)
    gap_c = np.empty(grid.N)
    w = rm - rp
    gap[0] = w
    for i in range(grid.N):
        for k in range(substeps):
            k1 = f(w)
            k2 = f(w + 0.5 * h * k1)
            k3 = f(w + 0.5 * h * k2)
            k4 = f(w + h * k3)
            w = w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if k == half - 1:
                gap_c[i] = w
        gap[i + 1] = w

    d = np.diff(gap)
    sign = -np.sign(rm - rp)
    if not (np.all(np.sign(d) == sign) and np.all(np.sign(gap) == np.sign(rm - rp))):
        raise NumericalFailure("steady profile lost strict monotonicity")

    rho = rp + gap
    rho[0] = rm
    rho_c = rp + gap_c
    phi = b.phi_plus + _F_of_gap(fns, gap)
    phi_c = b.phi_plus + _F_of_gap(fns, gap_c)
    prof = SteadyProfile(grid, grid.nodes, rho, phi, gap, rho_c, phi_c, rm, rp,
                         b.phi_minus, b.phi_plus, math.nan, fns.lambda_limit,
                         fns.direction)
    return _with_rate(prof, estimate_decay_rate(prof))


def _F_of_gap(fns, gap):
    if fns._closed:
        return fns.law.K / fns.params.mu * gap
    return fns.F_array(fns.bdry.rho_plus + gap)


def _with_rate(prof: SteadyProfile, lam: float) -> SteadyProfile:
    d = dict(prof.__dict__)
    d["lambda_fit"] = lam
    return SteadyProfile(**d)


def residual_fields(profile: SteadyProfile, law: PressureLaw, params: ModelParams):
    """Pointwise residuals of the original steady equations on interior nodes.

    Returns ``(r1, r2)`` arrays of length ``len(x) - 2``:
    ``r1 = p(rho)_x - mu rho phi_x`` and ``r2 = phi_xx + a rho - b phi``,
    both with second-order central differences.
    """
    x, rho, phi = profile.x, profile.rho_bar, profile.phi_bar
    if len(x) < 5:
        raise ValueError("need at least 5 nodes")
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise ValueError("residuals need a uniform grid")
    p = law.p(rho)
    r1 = (p[2:] - p[:-2]) / (2 * dx) - params.mu * rho[1:-1] * (phi[2:] - phi[:-2]) / (2 * dx)
    r2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / dx**2 + params.a * rho[1:-1] - params.b * phi[1:-1]
    return r1, r2


def steady_residual(profile: SteadyProfile, law: PressureLaw, params: ModelParams):
    r1, r2 = residual_fields(profile, law, params)
    return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))


def estimate_decay_rate(profile: SteadyProfile, lo: float = 1e-8, hi: float = 1e-2) -> float:
    """Least-squares slope of ``log|rho_bar - rho_plus|`` over the decay window.

    The window keeps nodes whose gap lies in ``[lo, hi] * |rho_- - rho_+|``.
    """
    gap = np.abs(profile.gap)
    amp = abs(profile.rho_minus - profile.rho_plus)
    if amp == 0 or gap.min() > 1e-3 * amp:
        raise WindowTooShortError("profile does not decay below 1e-3 of its amplitude")
    sel = (gap >= lo * amp) & (gap <= hi * amp)
    if sel.sum() < 5:
        raise WindowTooShortError(f"only {int(sel.sum())} nodes inside the decay window")
    slope = np.polyfit(profile.x[sel], np.log(gap[sel]), 1)[0]
    return float(-slope)

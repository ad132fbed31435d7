"""Model constants, pressure laws and structural validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (
    DomainError,
    HyperbolicityLossError,
    InvalidInputError,
    LawEvaluationError,
)

__all__ = [
    "ModelParams",
    "BoundaryData",
    "PressureLaw",
    "Quadratic",
    "PowerLaw",
    "Tabulated",
    "pressure_eval",
    "sound_speed",
    "Check",
    "ValidationReport",
    "validate_model",
    "wall_integral",
]

# Integrand threshold used to declare the wall integral divergent.
_DIVERGENCE_PROBE = 1e-8
_DIVERGENCE_LEVEL = 1e8


@dataclass(frozen=True)
class ModelParams:
    """Chemotactic sensitivity ``mu``, drag ``alpha``, production ``a`` and decay ``b``."""

    mu: float
    alpha: float
    a: float
    b: float

    def __post_init__(self):
        bad = [k for k in ("mu", "alpha", "a", "b") if not getattr(self, k) > 0]
        if bad:
            raise InvalidInputError(f"model parameters must be positive: {', '.join(bad)}")


@dataclass(frozen=True)
class BoundaryData:
    """Far-field density, wall concentration and far-field concentration.

    Use :meth:`from_params` so that ``phi_plus = (a/b) rho_plus`` holds exactly.
    """

    rho_plus: float
    phi_minus: float
    phi_plus: float

    def __post_init__(self):
        if not self.rho_plus > 0:
            raise InvalidInputError("rho_plus must be positive")
        if not self.phi_plus > 0:
            raise InvalidInputError("phi_plus must be positive")
        if self.phi_minus == self.phi_plus:
            raise InvalidInputError("phi_minus must differ from phi_plus")

    @classmethod
    def from_params(cls, params: ModelParams, rho_plus: float, phi_minus: float) -> "BoundaryData":
        return cls(float(rho_plus), float(phi_minus), params.a / params.b * float(rho_plus))

    def far_field_error(self, params: ModelParams) -> float:
        """Relative mismatch in ``a rho_plus = b phi_plus``."""
        lhs = params.a * self.rho_plus
        rhs = params.b * self.phi_plus
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def _as_density(rho):
    r = np.asarray(rho, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("pressure laws are defined for density > 0 only")
    return r


class PressureLaw:
    """Pressure ``p(rho)`` with first and second derivatives.

    Subclasses implement ``_p``, ``_dp`` and ``_d2p`` on positive float arrays.
    """

    kind = "abstract"

    def eval(self, rho):
        r = _as_density(rho)
        out = (self._p(r), self._dp(r), self._d2p(r))
        if np.ndim(rho) == 0:
            return tuple(float(v) for v in out)
        return out

    def _one(self, fn, rho):
        v = fn(_as_density(rho))
        return float(v) if np.ndim(rho) == 0 else v

    def p(self, rho):
        return self._one(self._p, rho)

    def dp(self, rho):
        return self._one(self._dp, rho)

    def d2p(self, rho):
        return self._one(self._d2p, rho)

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class Quadratic(PressureLaw):
    """``p = (K/2) rho^2``."""

    K: float
    kind: str = field(default="quadratic", init=False, repr=False)

    def __post_init__(self):
        if not self.K > 0:
            raise InvalidInputError("K must be positive")

    def _p(self, r):
        return 0.5 * self.K * r * r

    def _dp(self, r):
        return self.K * r

    def _d2p(self, r):
        return np.full_like(r, self.K)

    def to_dict(self):
        return {"kind": "quadratic", "K": self.K}


@dataclass(frozen=True)
class PowerLaw(PressureLaw):
    """``p = K rho^gamma`` (no ``1/gamma`` factor), ``gamma >= 1``."""

    K: float
    gamma: float
    kind: str = field(default="power", init=False, repr=False)

    def __post_init__(self):
        if not self.K > 0:
            raise InvalidInputError("K must be positive")
        if not self.gamma >= 1:
            raise InvalidInputError("gamma must be >= 1")

    def _p(self, r):
        return self.K * r**self.gamma

    def _dp(self, r):
        return self.K * self.gamma * r ** (self.gamma - 1)

    def _d2p(self, r):
        g = self.gamma
        return self.K * g * (g - 1) * r ** (g - 2)

    def to_dict(self):
        return {"kind": "power", "K": self.K, "gamma": self.gamma}


@dataclass(frozen=True)
class Tabulated(PressureLaw):
    """User-supplied callables. They must accept and return numpy arrays."""

    p_fn: Callable
    dp_fn: Callable
    d2p_fn: Callable
    name: str = "tabulated"
    kind: str = field(default="tabulated", init=False, repr=False)

    def _call(self, fn, r):
        try:
            v = np.asarray(fn(r), dtype=float)
        except Exception as exc:
            raise LawEvaluationError(f"pressure law {self.name!r} failed: {exc}") from exc
        if v.shape != r.shape:
            v = np.broadcast_to(v, r.shape).copy()
        if not np.all(np.isfinite(v)):
            raise LawEvaluationError(f"pressure law {self.name!r} returned non-finite values")
        return v

    def _p(self, r):
        return self._call(self.p_fn, r)

    def _dp(self, r):
        return self._call(self.dp_fn, r)

    def _d2p(self, r):
        return self._call(self.d2p_fn, r)

    def to_dict(self):
        return {"kind": "tabulated", "name": self.name}


def pressure_eval(law: PressureLaw, rho):
    """Return ``(p, p', p'')`` at ``rho`` (scalar or array)."""
    return law.eval(rho)


def sound_speed(law: PressureLaw, rho):
    dp = law.dp(rho)
    if np.any(~(np.asarray(dp) > 0)):
        raise HyperbolicityLossError("p'(rho) <= 0: sound speed undefined")
    return np.sqrt(dp)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def table(self) -> str:
        rows = [f"{'check':<16} {'result':<6} {'margin':>14}  detail"]
        for c in self.checks:
            rows.append(f"{c.name:<16} {'PASS' if c.passed else 'FAIL':<6} {c.margin:>14.6g}  {c.detail}")
        return "\n".join(rows)


def wall_integral(law: PressureLaw, params: ModelParams, rho_plus: float) -> float:
    """``int_0^rho_plus p'(s)/(mu s) ds``; ``inf`` when the integrand blows up at 0."""
    if isinstance(law, Quadratic):
        return law.K * rho_plus / params.mu
    if isinstance(law, PowerLaw):
        g = law.gamma
        if g == 1.0:
            return math.inf
        return law.K * g / (params.mu * (g - 1.0)) * rho_plus ** (g - 1.0)
    probe = _DIVERGENCE_PROBE * rho_plus
    if law.dp(probe) / (params.mu * probe) >= _DIVERGENCE_LEVEL:
        return math.inf
    val, _ = integrate.quad(lambda s: law.dp(s) / (params.mu * s), 0.0, rho_plus,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def validate_model(params: ModelParams, law: PressureLaw, bdry: BoundaryData,
                   range=None, n_samples: int = 200) -> ValidationReport:
    """Check every structural hypothesis on sampled densities.

    ``range`` defaults to ``[rho_plus/10, 10 rho_plus]``; samples are log-spaced.
    """
    if range is None:
        range = (bdry.rho_plus / 10, 10 * bdry.rho_plus)
    lo, hi = float(range[0]), float(range[1])
    if not (0 < lo < hi):
        raise InvalidInputError("density range must satisfy 0 < lo < hi")
    if n_samples < 2:
        raise InvalidInputError("n_samples must be >= 2")
    rho = np.geomspace(lo, hi, n_samples)
    _, dp, _ = law.eval(rho)

    slack = dp - params.a * params.mu / params.b * rho
    i = int(np.argmin(slack))
    structural = Check("structural", bool(np.all(slack > 0)), float(slack[i]),
                       f"min p'-(a mu/b) rho at rho={rho[i]:.6g}")
    j = int(np.argmin(dp))
    hyperbolic = Check("hyperbolicity", bool(np.all(dp > 0)), float(dp[j]),
                       f"min p' at rho={rho[j]:.6g}")

    err = bdry.far_field_error(params)
    far = Check("far_field", err <= 1e-12, 1e-12 - err,
                "a rho+ = b phi+, slack against 1e-12 relative")

    wall = wall_integral(law, params, bdry.rho_plus)
    if math.isinf(wall):
        feas = Check("wall_integral", True, math.inf, "+inf, condition vacuous")
    else:
        m = bdry.phi_minus - bdry.phi_plus + wall
        feas = Check("wall_integral", m > 0, m, f"integral={wall:.12g}")
    return ValidationReport((structural, hyperbolic, far, feas))

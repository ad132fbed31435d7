"""Truncated half-line grid, solver state and scheme settings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = ["HalfLineGrid", "State", "SchemeConfig"]


@dataclass(frozen=True)
class HalfLineGrid:
    """``N`` uniform cells on ``[0, L]``.

    Cell centres sit at ``(i + 1/2) dx``; nodes at ``j dx`` for ``j = 0..N``.
    """

    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidInputError("grid length L must be positive")
        if int(self.N) != self.N or self.N < 16:
            raise InvalidInputError("grid needs an integer N >= 16")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dx

    def refined(self, factor: int = 2) -> "HalfLineGrid":
        return HalfLineGrid(self.L, self.N * factor)


@dataclass(frozen=True)
class State:
    """Cell values of density, momentum and concentration at time ``t``."""

    rho: np.ndarray
    m: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = len(self.rho)
        if len(self.m) != n or len(self.phi) != n:
            raise InvalidInputError("rho, m, phi must have equal length")

    @property
    def u(self) -> np.ndarray:
        return self.m / self.rho

    def copy(self) -> "State":
        return State(self.rho.copy(), self.m.copy(), self.phi.copy(), self.t)


@dataclass(frozen=True)
class SchemeConfig:
    """Time-stepping options.

    ``well_balanced`` advances the deviation from the steady profile, so the
    sampled profile is an exact discrete equilibrium. Switching it off gives
    the plain first-order scheme.
    """

    cfl: float = 0.45
    flux: str = "rusanov"
    diffusion_theta: float = 1.0
    well_balanced: bool = True

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise InvalidInputError("cfl must lie in (0, 1]")
        if self.flux != "rusanov":
            raise InvalidInputError(f"unsupported flux {self.flux!r}")
        if self.diffusion_theta not in (0.5, 1.0):
            raise InvalidInputError("diffusion_theta must be 0.5 or 1.0")

    def to_dict(self) -> dict:
        return {"cfl": self.cfl, "flux": self.flux, "diffusion_theta": self.diffusion_theta,
                "well_balanced": self.well_balanced}

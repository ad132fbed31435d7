"""Phase-transition steady states of a hyperbolic-parabolic chemotaxis model.

Build a steady profile, simulate the time-dependent system around it and
measure convergence, energy dissipation and decay rates.
"""

__version__ = "0.1.0"

"""Kernel backend selection.

The compiled extension is used when importable. ``VASCNET_BACKEND=python``
forces the numpy fallback; ``VASCNET_BACKEND=compiled`` makes a missing
extension an import error.
"""

import os

from . import _kernels_py

_choice = os.environ.get("VASCNET_BACKEND", "auto").lower()

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
    if _choice == "compiled":
        raise

if _choice == "python" or _compiled is None:
    _active = _kernels_py
else:
    _active = _compiled

BACKEND = _active.BACKEND
hyperbolic_rhs = _active.hyperbolic_rhs
thomas = _active.thomas


def use_backend(name: str):
    """Switch the active backend for the whole process; returns the previous name.

    Meant for benchmarks and agreement tests, not for use while solvers run
    on other threads.
    """
    global BACKEND, hyperbolic_rhs, thomas
    mods = available()
    if name not in mods:
        raise ValueError(f"backend {name!r} not available (have {sorted(mods)})")
    prev = BACKEND
    mod = mods[name]
    BACKEND, hyperbolic_rhs, thomas = mod.BACKEND, mod.hyperbolic_rhs, mod.thomas
    return prev


def available():
    """Mapping of backend name to kernel module for every importable backend."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out

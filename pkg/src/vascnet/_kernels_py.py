"""Numpy fallback for the compiled kernels in ``_kernels.pyx``."""

import numpy as np
from scipy.linalg import solve_banded

BACKEND = "python"


def hyperbolic_rhs(rho, m, phi, p, c, rho_r, p_r, c_r, phi_l, phi_r,
                   dx, mu, alpha, out_r, out_m):
    """Rusanov flux divergence plus chemotaxis and drag sources, per cell.

    Left ghost reflects (``rho, -m``); right ghost is ``(rho_r, 0)``.
    ``phi_l``/``phi_r`` are Dirichlet values on the domain faces.
    """
    rl = np.concatenate(([rho[0]], rho))
    ml = np.concatenate(([-m[0]], m))
    pl = np.concatenate(([p[0]], p))
    cl = np.concatenate(([c[0]], c))
    rr = np.concatenate((rho, [rho_r]))
    mr = np.concatenate((m, [0.0]))
    pr = np.concatenate((p, [p_r]))
    cr = np.concatenate((c, [c_r]))
    s = np.maximum(np.abs(ml / rl) + cl, np.abs(mr / rr) + cr)
    fr = 0.5 * (ml + mr) - 0.5 * s * (rr - rl)
    fm = 0.5 * ((ml * ml / rl + pl) + (mr * mr / rr + pr)) - 0.5 * s * (mr - ml)
    pe = np.concatenate(([2.0 * phi_l - phi[0]], phi, [2.0 * phi_r - phi[-1]]))
    out_r[:] = -(fr[1:] - fr[:-1]) * (1.0 / dx)
    out_m[:] = (-(fm[1:] - fm[:-1]) * (1.0 / dx)
                + mu * rho * (pe[2:] - pe[:-2]) * (0.5 / dx)
                - alpha * m)


def thomas(lower, diag, upper, rhs, out):
    n = len(diag)
    ab = np.empty((3, n))
    ab[0, 1:] = upper[:-1]
    ab[0, 0] = 0.0
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    ab[2, -1] = 0.0
    out[:] = solve_banded((1, 1), ab, rhs, check_finite=False)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: Rusanov residual sweep and tridiagonal solve.

Signatures and semantics match :mod:`vascnet._kernels_py`.
"""

from libc.math cimport fabs, fmax
from libc.stdlib cimport free, malloc

BACKEND = "compiled"


def hyperbolic_rhs(const double[::1] rho, const double[::1] m, const double[::1] phi,
                   const double[::1] p, const double[::1] c,
                   double rho_r, double p_r, double c_r,
                   double phi_l, double phi_r,
                   double dx, double mu, double alpha,
                   double[::1] out_r, double[::1] out_m):
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t k
    cdef double rl, ml, pl, cl, rr, mr, pr, cr, s, fr, fm
    cdef double fr_prev = 0.0, fm_prev = 0.0
    cdef double inv_dx = 1.0 / dx
    cdef double half_inv_dx = 0.5 / dx
    cdef double phi_lo, phi_hi
    with nogil:
        for k in range(n + 1):
            if k == 0:
                rl = rho[0]; ml = -m[0]; pl = p[0]; cl = c[0]
            else:
                rl = rho[k - 1]; ml = m[k - 1]; pl = p[k - 1]; cl = c[k - 1]
            if k == n:
                rr = rho_r; mr = 0.0; pr = p_r; cr = c_r
            else:
                rr = rho[k]; mr = m[k]; pr = p[k]; cr = c[k]
            s = fmax(fabs(ml / rl) + cl, fabs(mr / rr) + cr)
            fr = 0.5 * (ml + mr) - 0.5 * s * (rr - rl)
            fm = 0.5 * ((ml * ml / rl + pl) + (mr * mr / rr + pr)) - 0.5 * s * (mr - ml)
            if k > 0:
                phi_lo = phi[k - 2] if k >= 2 else 2.0 * phi_l - phi[0]
                phi_hi = phi[k] if k < n else 2.0 * phi_r - phi[n - 1]
                out_r[k - 1] = -(fr - fr_prev) * inv_dx
                out_m[k - 1] = (-(fm - fm_prev) * inv_dx
                                + mu * rho[k - 1] * (phi_hi - phi_lo) * half_inv_dx
                                - alpha * m[k - 1])
            fr_prev = fr
            fm_prev = fm


def thomas(const double[::1] lower, const double[::1] diag, const double[::1] upper,
           const double[::1] rhs, double[::1] out):
    """Solve ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double denom
    cdef double *cp = <double *> malloc(n * sizeof(double))
    cdef bint singular = False
    if cp == NULL:
        raise MemoryError()
    if diag[0] == 0.0:
        free(cp)
        raise ZeroDivisionError("singular tridiagonal system")
    with nogil:
        cp[0] = upper[0] / diag[0]
        out[0] = rhs[0] / diag[0]
        for i in range(1, n):
            denom = diag[i] - lower[i] * cp[i - 1]
            if denom == 0.0:
                singular = True
                break
            if i < n - 1:
                cp[i] = upper[i] / denom
            out[i] = (rhs[i] - lower[i] * out[i - 1]) / denom
        if not singular:
            for i in range(n - 2, -1, -1):
                out[i] = out[i] - cp[i] * out[i + 1]
    free(cp)
    if singular:
        raise ZeroDivisionError("singular tridiagonal system")

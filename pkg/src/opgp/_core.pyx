# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel evaluation loops.

Family codes: 0 = Matern 5/2, 1 = squared exponential. ``ds`` / ``dt`` are
derivative orders (0 or 1) in the first / second kernel argument.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()

cdef double SQRT5 = 2.23606797749978969640917366873127623544


cdef inline double _kval(double d, int family, double ls, double var,
                         int ds, int dt) noexcept nogil:
    cdef double a, r, e, q, sgn
    if family == 0:
        a = SQRT5 / ls
        r = fabs(d)
        e = var * exp(-a * r)
        if ds == 0 and dt == 0:
            return (1.0 + a * r + a * a * r * r / 3.0) * e
        if ds == 1 and dt == 1:
            return a * a / 3.0 * (1.0 + a * r - a * a * r * r) * e
        sgn = -1.0 if ds == 1 else 1.0
        return sgn * a * a / 3.0 * d * (1.0 + a * r) * e
    else:
        q = 1.0 / (ls * ls)
        e = var * exp(-0.5 * d * d * q)
        if ds == 0 and dt == 0:
            return e
        if ds == 1 and dt == 1:
            return (q - d * d * q * q) * e
        sgn = -1.0 if ds == 1 else 1.0
        return sgn * d * q * e


def kernel_matrix(const double[::1] x, const double[::1] y, int family,
                  double ls, double var, int ds=0, int dt=0):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0], i, j
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            for j in range(m):
                o[i, j] = _kval(x[i] - y[j], family, ls, var, ds, dt)
    return out


def weighted_kernel_sum(const double[::1] xs, const double[::1] ws,
                        const cnp.int64_t[::1] owner, const cnp.int64_t[::1] ds,
                        const double[::1] ys, int dt, Py_ssize_t p,
                        int family, double ls, double var):
    """out[owner[q], j] += ws[q] * d^ds[q]_1 d^dt_2 k(xs[q], ys[j])."""
    cdef Py_ssize_t nq = xs.shape[0], m = ys.shape[0], q, j, row
    cdef double w, x
    cdef int d
    out = np.zeros((p, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for q in range(nq):
            row = owner[q]
            w = ws[q]
            x = xs[q]
            d = <int>ds[q]
            for j in range(m):
                o[row, j] += w * _kval(x - ys[j], family, ls, var, d, dt)
    return out

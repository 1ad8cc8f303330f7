# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics mirror :mod:`lifs._pykernels` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY

cnp.import_array()


def rb_iterate(const double[::1] lam, const cnp.intp_t[::1] src,
               const double[::1] s, double[::1] f, double tol, long max_iter):
    """Iterate ``f <- lam + s * f[src]`` in place until the sup-norm step is <= tol.

    Returns ``(iterations, last_step)``.
    """
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t r
    cdef long it = 0
    cdef double step = INFINITY, d, v
    cdef double[::1] g = np.empty(n, dtype=np.float64)
    while it < max_iter:
        step = 0.0
        for r in range(n):
            v = lam[r] + s[r] * f[src[r]]
            g[r] = v
            d = fabs(v - f[r])
            if d > step or d != d:
                step = d
        for r in range(n):
            f[r] = g[r]
        it += 1
        if step <= tol:
            break
    return it, step


def directed_hausdorff(const double[:, ::1] a, const double[:, ::1] b):
    """max over rows of ``a`` of the Euclidean distance to the nearest row of ``b``."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t i, j
    cdef double best = 0.0, cmin, dx, dy, d2
    for i in range(na):
        cmin = INFINITY
        for j in range(nb):
            dx = a[i, 0] - b[j, 0]
            dy = a[i, 1] - b[j, 1]
            d2 = dx * dx + dy * dy
            if d2 < cmin:
                cmin = d2
                if cmin <= best:
                    break
        if cmin > best:
            best = cmin
    return sqrt(best)


def qtt_eval_grid(double lam1, double lam2, double s1, double s2, double f0, int d):
    """Rank-2 matrix-product values at ``n / 2**d`` for ``n = 0 .. 2**d - 1``."""
    cdef Py_ssize_t size = (<Py_ssize_t> 1) << d
    cdef Py_ssize_t n
    cdef int k
    cdef double v
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] o = out
    for n in range(size):
        v = f0
        for k in range(d):
            if (n >> k) & 1:
                v = lam2 + s2 * v
            else:
                v = lam1 + s1 * v
        o[n] = v
    return out

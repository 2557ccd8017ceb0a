# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the loops in ``_pycore``; same semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, isfinite, INFINITY
from scipy.linalg.cython_blas cimport dgemv, ddot

cnp.import_array()

cdef int CONVERGED = 0
cdef int MAX_ITERATIONS = 1
cdef int NONPOSITIVE = 2
cdef int NONFINITE = 3
cdef int OSCILLATION_WINDOW = 3
cdef double FALLBACK_DAMPING = 0.5


def lowrank_extremes(double[:, ::1] left, double[:, ::1] right):
    cdef Py_ssize_t R = left.shape[0], ni = left.shape[1], nj = right.shape[1]
    cdef Py_ssize_t i, j, r
    cdef double a, v, vmin = INFINITY, vmax = -INFINITY
    cdef Py_ssize_t imin = 0, jmin = 0, imax = 0, jmax = 0
    if right.shape[0] != R:
        raise ValueError("factor ranks differ")
    # one output row at a time; the inner j loop is contiguous and vectorises
    cdef double[::1] row = np.empty(nj)
    with nogil:
        for i in range(ni):
            a = left[0, i]
            for j in range(nj):
                row[j] = a * right[0, j]
            for r in range(1, R):
                a = left[r, i]
                for j in range(nj):
                    row[j] += a * right[r, j]
            for j in range(nj):
                v = row[j]
                if v < vmin:
                    vmin = v; imin = i; jmin = j
                if v > vmax:
                    vmax = v; imax = i; jmax = j
    return vmin, vmax, imin, jmin, imax, jmax


cdef int _apply_a(double[:, ::1] kw, double[::1] zw, double[::1] f,
                  double[::1] out, int k) noexcept nogil:
    cdef int n = <int>f.shape[0], inc = 1
    cdef double one = 1.0, zero = 0.0, z, q
    cdef Py_ssize_t i
    cdef char trans = b'T'
    # kw is C-ordered, i.e. the Fortran transpose: out = kw @ f
    dgemv(&trans, &n, &n, &one, &kw[0, 0], &n, &f[0], &inc, &zero, &out[0], &inc)
    z = ddot(&n, &zw[0], &inc, &f[0], &inc)
    if not isfinite(z):
        return NONFINITE
    for i in range(n):
        if not isfinite(out[i]):
            return NONFINITE
    if z <= 0.0:
        return NONPOSITIVE
    for i in range(n):
        if out[i] <= 0.0:
            return NONPOSITIVE
    for i in range(n):
        q = out[i] / z
        out[i] = pow(q, k)
    return CONVERGED


def iterate_composed(kw_in, zw_in, f0, int k, double theta, double tol,
                     int max_iter, double blowup):
    cdef double[:, ::1] kw = np.ascontiguousarray(kw_in, dtype=np.float64)
    cdef double[::1] zw = np.ascontiguousarray(zw_in, dtype=np.float64)
    cdef Py_ssize_t n = kw.shape[0], i
    if kw.shape[1] != n or zw.shape[0] != n:
        raise ValueError("shape mismatch")
    f_arr = np.array(f0, dtype=np.float64)
    g_arr = np.empty(n)
    h_arr = np.empty(n)
    prev_arr = np.zeros(n)
    cdef double[::1] f = f_arr, g = g_arr, h = h_arr, prev = prev_arr
    cdef double th = theta, d = INFINITY, top, dot, dv, nv
    cdef int it, status = CONVERGED, streak = 0
    cdef bint have_prev = False
    with nogil:
        for it in range(1, max_iter + 1):
            status = _apply_a(kw, zw, f, g, k)
            if status != CONVERGED:
                break
            status = _apply_a(kw, zw, g, h, k)
            if status != CONVERGED:
                break
            d = 0.0
            top = 0.0
            dot = 0.0
            for i in range(n):
                nv = (1.0 - th) * f[i] + th * h[i]
                dv = nv - f[i]
                if fabs(dv) > d or not isfinite(dv):
                    d = fabs(dv)
                if fabs(nv) > top or not isfinite(nv):
                    top = fabs(nv)
                dot += dv * prev[i]
                prev[i] = dv
                f[i] = nv
            if not isfinite(d) or top > blowup:
                status = NONFINITE
                break
            if have_prev and dot < 0.0:
                streak += 1
                if streak >= OSCILLATION_WINDOW and th > FALLBACK_DAMPING:
                    th = FALLBACK_DAMPING
                    streak = 0
            else:
                streak = 0
            have_prev = True
            if d <= tol * (top if top > 1.0 else 1.0):
                status = _apply_a(kw, zw, f, g, k)
                break
        else:
            status = MAX_ITERATIONS
            it = max_iter
    if status == CONVERGED:
        return f_arr, g_arr, it, status, th, d
    return f_arr, None, it, status, th, d

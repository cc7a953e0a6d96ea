# cython: language_level=3
"""Compiled elementwise kernels over dense symmetric matrices.

Each kernel walks the upper triangle once and mirrors into the lower
triangle, so outputs are symmetric by construction. Floating-point
operations are ordered exactly as in ``_kernels_py`` so both backends
return identical bits.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef inline double _sign(double x) noexcept nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def threshold_shrink(const double[:, ::1] m, double half_lambda,
                     double gamma, double shift):
    cdef Py_ssize_t p = m.shape[0]
    cdef Py_ssize_t i, j
    cdef double denom = 1.0 + gamma
    cdef double gshift = gamma * shift
    cdef double v, a
    out = np.empty((p, p), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(p):
            o[i, i] = (m[i, i] + gshift) / denom
            for j in range(i + 1, p):
                v = m[i, j]
                a = fabs(v) - half_lambda
                if a < 0.0:
                    a = 0.0
                a = (_sign(v) * a) / denom + 0.0
                o[i, j] = a
                o[j, i] = a
    return out


def sign_matrix(const double[:, ::1] m):
    cdef Py_ssize_t p = m.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    out = np.empty((p, p), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(p):
            o[i, i] = _sign(m[i, i])
            for j in range(i + 1, p):
                s = _sign(m[i, j])
                o[i, j] = s
                o[j, i] = s
    return out


def scale_symmetric(const double[:, ::1] m, const double[::1] scale):
    cdef Py_ssize_t p = m.shape[0]
    cdef Py_ssize_t i, j
    cdef double v
    out = np.empty((p, p), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(p):
            o[i, i] = m[i, i] * (scale[i] * scale[i])
            for j in range(i + 1, p):
                v = m[i, j] * (scale[i] * scale[j])
                o[i, j] = v
                o[j, i] = v
    return out


def l1_distance(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t p = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double diag = 0.0
    cdef double upper = 0.0
    with nogil:
        for i in range(p):
            diag += fabs(a[i, i] - b[i, i])
            for j in range(i + 1, p):
                upper += fabs(a[i, j] - b[i, j])
    return diag + 2.0 * upper


def count_offdiag_zeros(const double[:, ::1] m, double tol):
    cdef Py_ssize_t p = m.shape[0]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t count = 0
    with nogil:
        for i in range(p):
            for j in range(i + 1, p):
                if fabs(m[i, j]) <= tol:
                    count += 1
    return 2 * count

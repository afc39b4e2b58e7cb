# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, atan2, sqrt, fmin, fmax, M_PI, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()


def n_from_params(Py_ssize_t k):
    cdef Py_ssize_t n = <Py_ssize_t>((1 + sqrt(1 + 8 * k)) / 2 + 0.5)
    if n * (n - 1) // 2 != k:
        return -1
    return n


cdef void _givens(const double* ang, Py_ssize_t n, double* o) noexcept nogil:
    cdef Py_ssize_t i, j, r, k = 0
    cdef double c, s, a, b
    for i in range(n * n):
        o[i] = 0.0
    for i in range(n):
        o[i * n + i] = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            c = cos(ang[k])
            s = sin(ang[k])
            for r in range(n):
                a = o[r * n + i]
                b = o[r * n + j]
                o[r * n + i] = c * a + s * b
                o[r * n + j] = -s * a + c * b
            k += 1


def orthogonal_batch(angles_in, Py_ssize_t n):
    cdef const double[:, ::1] angles = np.ascontiguousarray(angles_in, dtype=np.float64)
    cdef Py_ssize_t m = angles.shape[0], t
    out = np.empty((m, n, n), dtype=np.float64)
    cdef double[:, :, ::1] ov = out
    cdef const double* ap = NULL
    if n < 1:
        return out
    with nogil:
        for t in range(m):
            if angles.shape[1] > 0:
                ap = &angles[t, 0]
            _givens(ap, n, &ov[t, 0, 0])
    return out


cdef inline double _phase_dist(double th, double lo, double hi) noexcept nogil:
    cdef double best = INFINITY, t, d
    cdef int q
    for q in range(-1, 2):
        t = th + q * M_PI
        d = fmax(lo - t, 0.0) + fmax(t - hi, 0.0)
        best = fmin(best, d)
    return best


def residual_batch(angles, uv, rh, double phase_lo=-INFINITY, double phase_hi=INFINITY,
                   double phase_weight=0.0):
    cdef const double[:, ::1] ang = np.ascontiguousarray(angles, dtype=np.float64)
    cdef const double complex[:, ::1] u = np.ascontiguousarray(uv, dtype=np.complex128)
    cdef const double complex[:, ::1] r = np.ascontiguousarray(rh, dtype=np.complex128)
    cdef Py_ssize_t m = ang.shape[0], n = u.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t t, i, j, k
    cdef double* o
    cdef double complex* w
    cdef double complex* p
    cdef double complex acc
    cdef double tot, th
    cdef const double* ap = NULL
    with nogil:
        o = <double*>malloc(n * n * sizeof(double))
        w = <double complex*>malloc(n * n * sizeof(double complex))
        p = <double complex*>malloc(n * n * sizeof(double complex))
        for t in range(m):
            if ang.shape[1] > 0:
                ap = &ang[t, 0]
            _givens(ap, n, o)
            # w = uv @ O
            for i in range(n):
                for j in range(n):
                    acc = 0
                    for k in range(n):
                        acc = acc + u[i, k] * o[k * n + j]
                    w[i * n + j] = acc
            # p = w @ rh
            for i in range(n):
                for j in range(n):
                    acc = 0
                    for k in range(n):
                        acc = acc + w[i * n + k] * r[k, j]
                    p[i * n + j] = acc
            tot = 0.0
            for i in range(n):
                for j in range(i, n):
                    acc = 0
                    for k in range(n):
                        acc = acc + p[k * n + i] * p[k * n + j]
                    if i == j:
                        if phase_weight > 0.0:
                            th = 0.5 * atan2(acc.imag, acc.real)
                            th = _phase_dist(th, phase_lo, phase_hi)
                            tot += phase_weight * th * th
                    else:
                        # symmetric matrix: count both off-diagonal entries
                        tot += 2.0 * (acc.real * acc.real + acc.imag * acc.imag)
            res[t] = tot
        free(o)
        free(w)
        free(p)
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot energy kernels.

Mirrors _corepy exactly; selected at import time by ops.py when available.
Half-integer exponents (p = 1.5, 2, 2.5, 3, ...) take sqrt/multiply fast
paths; other exponents fall back to libm pow.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()


cdef inline double _powa(double x, double p) nogil:
    # |x|^p for x >= 0 with fast paths for half-integer p
    if p == 2.0:
        return x * x
    if p == 1.5:
        return x * sqrt(x)
    if p == 3.0:
        return x * x * x
    if p == 1.0:
        return x
    if p == 2.5:
        return x * x * sqrt(x)
    if x == 0.0:
        return 0.0
    return pow(x, p)


cdef inline double _jp(double t, double p) nogil:
    if p == 2.0:
        return t
    if t >= 0.0:
        return _powa(t, p - 1.0)
    return -_powa(-t, p - 1.0)


def energy(double[:, ::1] w, double[::1] b, double[::1] u, double p):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, j
    cdef double total = 0.0, row, du
    with nogil:
        for i in range(n):
            row = 0.0
            if p == 2.0:
                for j in range(n):
                    du = u[i] - u[j]
                    row += w[i, j] * du * du
            else:
                for j in range(n):
                    row += w[i, j] * _powa(fabs(u[i] - u[j]), p)
            total += row + b[i] * _powa(fabs(u[i]), p)
    return total


def weak_action(double[:, ::1] w, double[::1] b, double[::1] u,
                double[::1] v, double p):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, j
    cdef double total = 0.0, row
    with nogil:
        for i in range(n):
            row = 0.0
            if p == 2.0:
                for j in range(n):
                    row += w[i, j] * (u[i] - u[j]) * (v[i] - v[j])
            else:
                for j in range(n):
                    row += w[i, j] * _jp(u[i] - u[j], p) * (v[i] - v[j])
            total += row + b[i] * _jp(u[i], p) * v[i]
    return total


def gradient(double[:, ::1] w, double[::1] b, double[::1] u, double p):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, j
    cdef double row
    g_arr = np.empty(n)
    cdef double[::1] g = g_arr
    with nogil:
        for i in range(n):
            row = 0.0
            if p == 2.0:
                for j in range(n):
                    row += w[i, j] * (u[i] - u[j])
            else:
                for j in range(n):
                    row += w[i, j] * _jp(u[i] - u[j], p)
            g[i] = 2.0 * p * row + p * b[i] * _jp(u[i], p)
    return g_arr

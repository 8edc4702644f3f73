# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the hot kernels (see _ref.py for the contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, pow

cnp.import_array()


def payoff_lp(double[:, ::1] points, double[::1] kbar, double kout, double p):
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    cdef cnp.ndarray[double, ndim=1] out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double u, umax, acc, inner
    cdef double inv_p = 1.0 / p
    with nogil:
        for i in range(m):
            umax = 0.0
            for j in range(n):
                u = points[i, j] - kbar[j]
                if u > umax:
                    umax = u
            if umax <= 0.0:
                out[i] = 0.0
                continue
            acc = 0.0
            for j in range(n):
                u = points[i, j] - kbar[j]
                if u > 0.0:
                    acc += pow(u / umax, p)
            inner = umax * pow(acc, inv_p) - kout
            out[i] = inner if inner > 0.0 else 0.0
    return out_arr


def payoff_max(double[:, ::1] points, double[::1] kbar, double kout):
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    cdef cnp.ndarray[double, ndim=1] out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double u, umax, inner
    with nogil:
        for i in range(m):
            umax = 0.0
            for j in range(n):
                u = points[i, j] - kbar[j]
                if u > umax:
                    umax = u
            inner = umax - kout
            out[i] = inner if inner > 0.0 else 0.0
    return out_arr


def lognormal_density(double[:, ::1] points, double[::1] mu, double[::1] s,
                      double[:, ::1] linv, double norm_const):
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    cdef cnp.ndarray[double, ndim=1] out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef cnp.ndarray[double, ndim=1] y_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef Py_ssize_t i, j, k
    cdef double q, v, prod_x
    cdef bint ok
    with nogil:
        for i in range(m):
            ok = True
            prod_x = 1.0
            for j in range(n):
                if points[i, j] <= 0.0:
                    ok = False
                    break
                prod_x *= points[i, j]
            if not ok:
                continue
            for j in range(n):
                y[j] = (log(points[i, j]) - mu[j]) / s[j]
            q = 0.0
            for j in range(n):
                v = 0.0
                for k in range(j + 1):  # linv is lower triangular
                    v += linv[j, k] * y[k]
                q += v * v
            out[i] = norm_const * exp(-0.5 * q) / prod_x
    return out_arr

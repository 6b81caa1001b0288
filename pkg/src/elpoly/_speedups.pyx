# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled spectral sums over the circulant-Laplacian eigenvalue table.

Same reductions as _kernels_py, fused into single passes without numpy
temporaries; selected at import time by elpoly.kernels.
"""

from libc.math cimport log, exp, pow

BACKEND = "compiled"


def sum_pow(const double[::1] w, const double[::1] mult, double mu, double t, int power):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double acc = 0.0, d
    if power == 1:
        for i in range(n):
            acc += mult[i] / (mu + t * w[i])
    elif power == 2:
        for i in range(n):
            d = mu + t * w[i]
            acc += mult[i] / (d * d)
    elif power == 3:
        for i in range(n):
            d = mu + t * w[i]
            acc += mult[i] / (d * d * d)
    else:
        for i in range(n):
            acc += mult[i] * pow(mu + t * w[i], -power)
    return acc


def sum_pow_weighted(const double[::1] w, const double[::1] mult, const double[::1] weight,
                     double mu, double t, int power):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double acc = 0.0, d
    if power == 1:
        for i in range(n):
            acc += mult[i] * weight[i] / (mu + t * w[i])
    elif power == 2:
        for i in range(n):
            d = mu + t * w[i]
            acc += mult[i] * weight[i] / (d * d)
    elif power == 3:
        for i in range(n):
            d = mu + t * w[i]
            acc += mult[i] * weight[i] / (d * d * d)
    else:
        for i in range(n):
            acc += mult[i] * weight[i] * pow(mu + t * w[i], -power)
    return acc


def sum_log(const double[::1] w, const double[::1] mult, double mu, double t):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += mult[i] * log(mu + t * w[i])
    return acc


def sum_exp_weighted(const double[::1] w, const double[::1] mult, const double[::1] weight, double tau):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += mult[i] * weight[i] * exp(-tau * w[i])
    return acc

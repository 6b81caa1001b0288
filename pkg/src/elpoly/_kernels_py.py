"""Pure-NumPy spectral sums over the circulant-Laplacian eigenvalues.

Fallback backend; the compiled extension in _speedups implements the same
four reductions.  Every function consumes the folded eigenvalue table
(w, mult) with w_k = 4 L sin^2(pi k / L) for k = 0..floor(L/2) and mult the
folding multiplicities (2 for paired modes, 1 for k = 0 and, at even L,
k = L/2).
"""

import numpy as np

BACKEND = "numpy"


def sum_pow(w, mult, mu, t, power):
    """sum_k mult_k (mu + t w_k)^(-power)"""
    return float(np.dot(mult, (mu + t * w) ** (-power)))


def sum_pow_weighted(w, mult, weight, mu, t, power):
    """sum_k mult_k weight_k (mu + t w_k)^(-power)"""
    return float(np.dot(mult * weight, (mu + t * w) ** (-power)))


def sum_log(w, mult, mu, t):
    """sum_k mult_k log(mu + t w_k)"""
    return float(np.dot(mult, np.log(mu + t * w)))


def sum_exp_weighted(w, mult, weight, tau):
    """sum_k mult_k weight_k exp(-tau w_k)"""
    return float(np.dot(mult * weight, np.exp(-tau * w)))

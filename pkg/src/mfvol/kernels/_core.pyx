# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: TGARCH recursion/likelihood and MF-DFA segment variances.

Mirrors mfvol.kernels._native exactly; the Python wrapper picks whichever
is importable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, isfinite, lgamma, log, log1p, pow, sqrt

cnp.import_array()

DIST_NORMAL = 0
DIST_STUDENT_T = 1
DIST_GED = 2

cdef double HALF_LN_2PI = 0.9189385332046727417803297364056176


def tgarch_recursion(r, double mu, double c1, double omega, double alpha,
                     double beta, double gamma, double sigma2_init):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eps = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sigma2 = np.empty(n)
    cdef Py_ssize_t t
    cdef double e, coef

    eps[0] = rr[0] - mu
    sigma2[0] = sigma2_init
    for t in range(1, n):
        eps[t] = rr[t] - mu - c1 * rr[t - 1]
        e = eps[t - 1]
        coef = alpha + (gamma if e < 0.0 else 0.0)
        sigma2[t] = omega + coef * e * e + beta * sigma2[t - 1]
    return sigma2, eps


def tgarch_nll(r, double mu, double c1, double omega, double alpha,
               double beta, double gamma, double sigma2_init,
               int dist, double shape):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0]
    cdef Py_ssize_t t
    cdef double e_prev, s2, e, coef, z, nll, log_c, lam, nu, kappa

    # Distribution constants (per-call; negligible next to the recursion).
    log_c = 0.0
    lam = 1.0
    nu = shape
    kappa = shape
    if dist == DIST_STUDENT_T:
        if nu <= 2.0:
            return INFINITY
        log_c = lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) \
            - 0.5 * log(3.141592653589793 * (nu - 2.0))
    elif dist == DIST_GED:
        if kappa <= 0.0:
            return INFINITY
        lam = sqrt(exp(lgamma(1.0 / kappa) - lgamma(3.0 / kappa)) * pow(2.0, -2.0 / kappa))
        log_c = log(kappa) - log(lam) - (1.0 + 1.0 / kappa) * log(2.0) - lgamma(1.0 / kappa)

    nll = 0.0
    e_prev = rr[0] - mu
    s2 = sigma2_init
    for t in range(1, n):
        coef = alpha + (gamma if e_prev < 0.0 else 0.0)
        s2 = omega + coef * e_prev * e_prev + beta * s2
        if not (s2 > 0.0 and isfinite(s2)):
            return INFINITY
        e = rr[t] - mu - c1 * rr[t - 1]
        z = e / sqrt(s2)
        if dist == DIST_NORMAL:
            nll += HALF_LN_2PI + 0.5 * z * z + 0.5 * log(s2)
        elif dist == DIST_STUDENT_T:
            nll += -log_c + 0.5 * (nu + 1.0) * log1p(z * z / (nu - 2.0)) + 0.5 * log(s2)
        else:
            nll += -log_c + 0.5 * pow(fabs(z / lam), kappa) + 0.5 * log(s2)
        e_prev = e

    if not isfinite(nll):
        return INFINITY
    return nll


def segment_variances(profile, Py_ssize_t s, basis):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(profile, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(basis, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t ns = n // s
    cdef Py_ssize_t k = b.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(2 * ns)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] coef = np.empty(k)
    cdef Py_ssize_t v, i, j, off
    cdef double c, fit, resid, acc

    # Residuals computed explicitly (not via the Pythagorean identity) so
    # that exactly-fitted segments come out at round-off level.
    for v in range(2 * ns):
        off = v * s if v < ns else n - (2 * ns - v) * s
        for j in range(k):
            c = 0.0
            for i in range(s):
                c += y[off + i] * b[i, j]
            coef[j] = c
        acc = 0.0
        for i in range(s):
            fit = 0.0
            for j in range(k):
                fit += coef[j] * b[i, j]
            resid = y[off + i] - fit
            acc += resid * resid
        out[v] = acc / s
    return out

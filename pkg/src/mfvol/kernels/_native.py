"""Pure-NumPy implementations of the hot kernels.

Used when the compiled extension (``mfvol.kernels._core``) is unavailable.
Both backends implement the same three functions with identical semantics;
``tests/test_kernels.py`` cross-checks them when the extension is present.
"""

import math

import numpy as np
from scipy.special import gammaln

DIST_NORMAL = 0
DIST_STUDENT_T = 1
DIST_GED = 2

_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)


def tgarch_recursion(r, mu, c1, omega, alpha, beta, gamma, sigma2_init):
    """Run the AR(1) residual and threshold-GARCH variance recursion.

    Returns ``(sigma2, eps)``, both of length ``len(r)``.  The first
    residual has no lagged return available, so it is ``r[0] - mu``; the
    first variance is the supplied presample value.
    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    n = r.shape[0]
    eps = np.empty(n)
    eps[0] = r[0] - mu
    eps[1:] = r[1:] - mu - c1 * r[:-1]

    sigma2 = np.empty(n)
    sigma2[0] = sigma2_init
    for t in range(1, n):
        e = eps[t - 1]
        coef = alpha + (gamma if e < 0.0 else 0.0)
        sigma2[t] = omega + coef * e * e + beta * sigma2[t - 1]
    return sigma2, eps


def _neg_log_density(z, dist, shape):
    """Negative log of the unit-variance standardized density at z (vectorized)."""
    if dist == DIST_NORMAL:
        return _HALF_LN_2PI + 0.5 * z * z
    if dist == DIST_STUDENT_T:
        nu = shape
        log_c = (
            gammaln(0.5 * (nu + 1.0))
            - gammaln(0.5 * nu)
            - 0.5 * math.log(math.pi * (nu - 2.0))
        )
        return -log_c + 0.5 * (nu + 1.0) * np.log1p(z * z / (nu - 2.0))
    if dist == DIST_GED:
        kappa = shape
        lam = math.sqrt(
            math.exp(gammaln(1.0 / kappa) - gammaln(3.0 / kappa)) * 2.0 ** (-2.0 / kappa)
        )
        log_c = (
            math.log(kappa)
            - math.log(lam)
            - (1.0 + 1.0 / kappa) * math.log(2.0)
            - gammaln(1.0 / kappa)
        )
        return -log_c + 0.5 * np.abs(z / lam) ** kappa
    raise ValueError(f"unknown distribution code {dist}")


def tgarch_nll(r, mu, c1, omega, alpha, beta, gamma, sigma2_init, dist, shape):
    """Negative log-likelihood, conditional on the first return.

    Evaluated observations are t = 1 .. n-1 (the AR(1) lag consumes one).
    Returns +inf if the variance recursion leaves the positive domain.
    """
    sigma2, eps = tgarch_recursion(r, mu, c1, omega, alpha, beta, gamma, sigma2_init)
    s2 = sigma2[1:]
    if not np.all(s2 > 0.0) or not np.all(np.isfinite(s2)):
        return math.inf
    z = eps[1:] / np.sqrt(s2)
    nll = float(np.sum(_neg_log_density(z, dist, shape) + 0.5 * np.log(s2)))
    return nll if math.isfinite(nll) else math.inf


def segment_variances(profile, s, basis):
    """Detrended variance of every length-s segment, forward then backward.

    ``basis`` is an (s, k) matrix with orthonormal columns spanning the
    detrending polynomials on the segment abscissa.  Returns 2*floor(N/s)
    residual variances (mean squared residual per segment).
    """
    y = np.ascontiguousarray(profile, dtype=np.float64)
    n = y.shape[0]
    ns = n // s
    fwd = y[: ns * s].reshape(ns, s)
    bwd = y[n - ns * s :].reshape(ns, s)
    segs = np.concatenate([fwd, bwd], axis=0)
    coeffs = segs @ basis
    # Residuals computed explicitly (not via the Pythagorean identity) so
    # that exactly-fitted segments come out at round-off level, not at the
    # much larger cancellation error of total - fitted.
    resid = segs - coeffs @ basis.T
    return np.einsum("ij,ij->i", resid, resid) / s

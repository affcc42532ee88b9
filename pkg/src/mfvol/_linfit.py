"""Ordinary least-squares line fit with slope standard error and R^2."""

import numpy as np


def fit_line(x, y):
    """Fit y = a + b*x by OLS.

    Returns (slope, intercept, slope_se, r_squared).  slope_se is None for
    fewer than 3 points (zero residual degrees of freedom).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 points for a line fit")
    xm = x - x.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise ValueError("degenerate abscissa: all x equal")
    slope = float(xm @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    se = float(np.sqrt(ss_res / (n - 2) / sxx)) if n > 2 else None
    return slope, intercept, se, r2

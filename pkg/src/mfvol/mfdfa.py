"""Multifractal detrended fluctuation analysis.

Pipeline: profile (cumulative mean-removed sum) -> segment-wise polynomial
detrending over a grid of scales -> q-th order fluctuation functions ->
generalized Hurst exponents h(q) by log-log fit -> multifractality degrees
and the singularity spectrum.

Segments are taken forward from the start and backward from the end
(2 * floor(N/s) per scale).  q = 0 uses logarithmic averaging; negative
moments exclude zero-variance segments (counts are recorded).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import kernels
from ._linfit import fit_line

_LOG_FLOOR = 1e-30


def default_q_grid():
    # -25 .. 25, step 0.2, landing exactly on 0
    return np.arange(-125, 126, dtype=np.float64) / 5.0


def scale_grid(s_min: int, s_max: int, n_scales: int = 20):
    """Log-spaced integer scale grid spanning [s_min, s_max]."""
    if not 2 <= s_min < s_max:
        raise ValueError("need 2 <= s_min < s_max")
    return np.unique(np.round(np.geomspace(s_min, s_max, n_scales)).astype(int))


def default_s_grid():
    # 20 log-spaced integer scales spanning [16, 128]; fit restricted later
    return scale_grid(16, 128, 20)


@dataclass
class MfdfaConfig:
    q_grid: np.ndarray = field(default_factory=default_q_grid)
    s_grid: np.ndarray = field(default_factory=default_s_grid)
    detrend_order: int = 3
    fit_range: tuple = (20, 100)
    degree_q: float = 4.0

    def validate(self):
        q = np.asarray(self.q_grid, dtype=np.float64)
        s = np.asarray(self.s_grid, dtype=int)
        if len(s) == 0 or np.any(s < self.detrend_order + 2):
            raise ValueError("every scale must be >= detrend_order + 2")
        if not np.allclose(np.sort(q), np.sort(-q), atol=1e-12):
            raise ValueError("q_grid must be symmetric about 0")
        if self.fit_range[0] < s.min() or self.fit_range[1] > s.max():
            raise ValueError("fit_range must lie within the scale grid span")


@dataclass
class FluctuationMatrix:
    q_grid: np.ndarray
    s_grid: np.ndarray
    values: np.ndarray     # (n_q, n_s)
    excluded: np.ndarray   # (n_q, n_s) int, zero-variance segments dropped


@dataclass
class HurstCurve:
    q_grid: np.ndarray
    h: np.ndarray
    slope_se: np.ndarray
    r_squared: np.ndarray
    fit_range: tuple


@dataclass
class SingularitySpectrum:
    q_grid: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    derivative_scheme: str = "central differences, one-sided at ends"


def profile(returns) -> np.ndarray:
    """Cumulative sum of mean-removed values; endpoint is 0 by construction."""
    r = np.asarray(returns, dtype=np.float64)
    if len(r) < 2:
        raise ValueError("profile needs at least 2 values")
    return np.cumsum(r - r.mean())


def _segment_basis(s: int, order: int) -> np.ndarray:
    # Abscissa 1..s rescaled to [-1, 1]; orthonormal columns via QR so the
    # cubic fit stays well conditioned at s ~ 100.
    x = (2.0 * np.arange(1, s + 1) - (s + 1)) / (s - 1)
    v = np.vander(x, order + 1, increasing=True)
    q, _ = np.linalg.qr(v)
    return np.ascontiguousarray(q)


def fluctuation(prof, config: MfdfaConfig) -> FluctuationMatrix:
    """Fluctuation functions F_q(s) over the configured (q, s) grid."""
    config.validate()
    y = np.asarray(prof, dtype=np.float64)
    s_grid = np.asarray(config.s_grid, dtype=int)
    q_grid = np.asarray(config.q_grid, dtype=np.float64)
    n = len(y)
    if n < 2 * int(s_grid.max()):
        raise ValueError(
            f"profile of length {n} too short for 2 segments at s={int(s_grid.max())}"
        )

    zero_tol = max(float(np.max(np.abs(y))) ** 2 * 1e-26, 0.0)
    values = np.empty((len(q_grid), len(s_grid)))
    excluded = np.zeros((len(q_grid), len(s_grid)), dtype=int)

    for js, s in enumerate(s_grid):
        basis = _segment_basis(int(s), config.detrend_order)
        fv = kernels.segment_variances(y, int(s), basis)
        nonzero = fv > zero_tol
        n_excl = int(np.sum(~nonzero))
        log_all = np.log(np.maximum(fv, _LOG_FLOOR))
        log_kept = np.log(fv[nonzero]) if n_excl else log_all
        if len(log_kept) == 0:
            raise ValueError(f"all segments have zero variance at s={int(s)}")

        for jq, q in enumerate(q_grid):
            if q > 0:
                # positive moments tolerate zero variances (floored in logs)
                lf = (logsumexp(0.5 * q * log_all) - math.log(len(log_all))) / q
                values[jq, js] = math.exp(lf)
            elif q < 0:
                lf = (logsumexp(0.5 * q * log_kept) - math.log(len(log_kept))) / q
                values[jq, js] = math.exp(lf)
                excluded[jq, js] = n_excl
            else:
                values[jq, js] = math.exp(0.5 * float(np.mean(log_kept)))
                excluded[jq, js] = n_excl

    return FluctuationMatrix(q_grid=q_grid, s_grid=s_grid, values=values, excluded=excluded)


def generalized_hurst(fmat: FluctuationMatrix, fit_range=None) -> HurstCurve:
    """h(q) as the OLS slope of ln F_q(s) vs ln s over scales in fit_range."""
    if fit_range is None:
        fit_range = (int(fmat.s_grid.min()), int(fmat.s_grid.max()))
    mask = (fmat.s_grid >= fit_range[0]) & (fmat.s_grid <= fit_range[1])
    if int(mask.sum()) < 3:
        raise ValueError("need at least 3 scales inside fit_range")
    ls = np.log(fmat.s_grid[mask].astype(np.float64))
    h = np.empty(len(fmat.q_grid))
    se = np.empty(len(fmat.q_grid))
    r2 = np.empty(len(fmat.q_grid))
    for jq in range(len(fmat.q_grid)):
        lf = np.log(fmat.values[jq, mask])
        slope, _, s_se, s_r2 = fit_line(ls, lf)
        h[jq], se[jq], r2[jq] = slope, s_se, s_r2
    return HurstCurve(q_grid=fmat.q_grid, h=h, slope_se=se, r_squared=r2,
                      fit_range=tuple(fit_range))


def _grid_index(q_grid, q):
    idx = np.nonzero(np.abs(q_grid - q) < 1e-9)[0]
    if len(idx) == 0:
        raise ValueError(f"q={q} is not on the moment grid (no interpolation)")
    return int(idx[0])


def multifractality_degree(curve: HurstCurve, q: float) -> float:
    """Delta h(q) = h(-q) - h(q); zero for a monofractal series."""
    if q <= 0:
        raise ValueError("q must be positive")
    return float(curve.h[_grid_index(curve.q_grid, -q)]
                 - curve.h[_grid_index(curve.q_grid, q)])


def singularity_spectrum(curve: HurstCurve) -> SingularitySpectrum:
    """alpha(q) = h + q h'(q), f(alpha) = q (alpha - h) + 1.

    h'(q) by central differences on the uniform q grid (one-sided at the
    ends); f is exactly 1 at q = 0.
    """
    q = np.asarray(curve.q_grid, dtype=np.float64)
    if len(q) < 3:
        raise ValueError("need at least 3 grid points")
    dq = np.diff(q)
    if np.max(np.abs(dq - dq[0])) > 1e-9:
        raise ValueError("q grid must be uniform")
    hprime = np.gradient(curve.h, q, edge_order=1)
    alpha = curve.h + q * hprime
    f = q * (alpha - curve.h) + 1.0
    return SingularitySpectrum(q_grid=q, alpha=alpha, f=f)


def delta_alpha(spec: SingularitySpectrum, q: float) -> float:
    """Delta alpha(q) = alpha(-q) - alpha(q) from the singularity spectrum."""
    if q <= 0:
        raise ValueError("q must be positive")
    return float(spec.alpha[_grid_index(spec.q_grid, -q)]
                 - spec.alpha[_grid_index(spec.q_grid, q)])


def analyze(returns, config: MfdfaConfig | None = None) -> dict:
    """Full pipeline on a return window; summary measures for tracks.

    Returns h(2), Delta h and Delta alpha at the configured degree moment,
    plus the intermediate curve objects.
    """
    cfg = config or MfdfaConfig()
    prof = profile(returns)
    fmat = fluctuation(prof, cfg)
    curve = generalized_hurst(fmat, cfg.fit_range)
    spec = singularity_spectrum(curve)
    return {
        "h2": float(curve.h[_grid_index(curve.q_grid, 2.0)]),
        "dh": multifractality_degree(curve, cfg.degree_q),
        "dalpha": delta_alpha(spec, cfg.degree_q),
        "fluctuation": fmat,
        "hurst": curve,
        "spectrum": spec,
    }


def _fmt(x):
    return format(float(x), ".17g")


def fluct_to_csv(fmat: FluctuationMatrix) -> str:
    out = ["q,s,F"]
    for jq, q in enumerate(fmat.q_grid):
        for js, s in enumerate(fmat.s_grid):
            out.append(f"{_fmt(q)},{int(s)},{_fmt(fmat.values[jq, js])}")
    return "\n".join(out) + "\n"


def hurst_to_csv(curve: HurstCurve) -> str:
    out = ["q,h,se"]
    for q, h, se in zip(curve.q_grid, curve.h, curve.slope_se):
        out.append(f"{_fmt(q)},{_fmt(h)},{_fmt(se)}")
    return "\n".join(out) + "\n"


def spectrum_to_csv(spec: SingularitySpectrum) -> str:
    out = ["q,alpha,f"]
    for q, a, f in zip(spec.q_grid, spec.alpha, spec.f):
        out.append(f"{_fmt(q)},{_fmt(a)},{_fmt(f)}")
    return "\n".join(out) + "\n"

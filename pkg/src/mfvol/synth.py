"""Synthetic series with known scaling behavior, used as analysis oracles.

Random draws use NumPy's default_rng (PCG64 bit generator, ziggurat normal
sampling), which is specified and bit-stable across platforms, so seeded
tests are reproducible.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class CascadeSpec:
    """Binomial multiplicative cascade: 2**levels values, weight a."""

    levels: int
    a: float

    def validate(self):
        if not 2 <= self.levels <= 24:
            raise ValueError("levels must be in [2, 24]")
        if not 0.5 < self.a < 1.0:
            raise ValueError("weight a must be in (0.5, 1)")


def gaussian_noise(n: int, seed: int) -> np.ndarray:
    """n IID standard normal draws, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.random.default_rng(seed).standard_normal(n)


def binomial_cascade(spec: CascadeSpec) -> np.ndarray:
    """Deterministic binomial multifractal series.

    x_k = a**(n - phi(k-1)) * (1-a)**phi(k-1), where phi is the binary digit
    sum; the 2**n values sum to 1.  The exact generalized Hurst exponent is
    cascade_h_analytic.
    """
    spec.validate()
    n, a = spec.levels, spec.a
    k = np.arange(2**n, dtype=np.uint64)
    # binary digit sum via the uint8 popcount table over the 8 bytes
    phi = np.unpackbits(k.view(np.uint8).reshape(-1, 8), axis=1).sum(axis=1)
    return a ** (n - phi.astype(np.float64)) * (1.0 - a) ** phi.astype(np.float64)


def cascade_h_analytic(q, a: float):
    """Closed-form h(q) of the binomial cascade.

    h(q) = 1/q - ln(a^q + (1-a)^q) / (q ln 2); the q -> 0 limit is
    -ln(a(1-a)) / (2 ln 2).  Accepts scalars or arrays of q.
    """
    if not 0.5 <= a < 1.0:
        raise ValueError("weight a must be in [0.5, 1)")
    q_arr = np.asarray(q, dtype=np.float64)
    scalar = q_arr.ndim == 0
    q_arr = np.atleast_1d(q_arr)
    out = np.empty_like(q_arr)
    small = np.abs(q_arr) < 1e-8
    out[small] = -math.log(a * (1.0 - a)) / (2.0 * math.log(2.0))
    qq = q_arr[~small]
    out[~small] = 1.0 / qq - np.log(a**qq + (1.0 - a) ** qq) / (qq * math.log(2.0))
    return float(out[0]) if scalar else out

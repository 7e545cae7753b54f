"""Probabilists' Hermite polynomials and the centered normal pdf/cdf.

Every function accepts a float or a numpy array and returns the same kind.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

__all__ = ["MAX_HERMITE_ORDER", "hermite", "gaussian_pdf", "gaussian_cdf", "std_pdf"]

MAX_HERMITE_ORDER = 16
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def hermite(n: int, z):
    """He_n(z) from the three-term recurrence He_{k+1} = z He_k - k He_{k-1}."""
    if not 0 <= n <= MAX_HERMITE_ORDER:
        raise ValueError(f"Hermite order {n} outside [0, {MAX_HERMITE_ORDER}]")
    z = _as_float(z)
    prev = np.ones_like(z) if isinstance(z, np.ndarray) else 1.0
    if n == 0:
        return prev
    cur = z
    for k in range(1, n):
        prev, cur = cur, z * cur - k * prev
    return cur


def std_pdf(z):
    z = _as_float(z)
    if isinstance(z, np.ndarray):
        return _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def gaussian_pdf(y, sigma: float):
    """Density of N(0, sigma**2) at ``y``."""
    _check_sigma(sigma)
    return std_pdf(_as_float(y) / sigma) / sigma


def gaussian_cdf(y, sigma: float):
    """Phi(y / sigma). Absolute error is at the level of double rounding."""
    _check_sigma(sigma)
    z = _as_float(y) / sigma
    if isinstance(z, np.ndarray):
        return ndtr(z)
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _check_sigma(sigma):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")


def _as_float(z):
    if isinstance(z, np.ndarray):
        return z.astype(np.float64, copy=False)
    if isinstance(z, (list, tuple)):
        return np.asarray(z, dtype=np.float64)
    return float(z)

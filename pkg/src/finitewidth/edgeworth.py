"""Fourth-Hermite corrections to the Gaussian limit and their fits.

Fits work in standardized coordinates ``z = y / sigma_hat``. The CDF
difference model is ``D(z) = alpha phi(z) He_3(z)``; for a sum of ``N``
i.i.d. symmetric terms the classical one-term Edgeworth expansion gives
``alpha = -gamma2 / (24 N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .special import gaussian_cdf, gaussian_pdf, hermite, std_pdf

__all__ = [
    "FitError",
    "EdgeworthFit",
    "PowerLawFit",
    "perturbed_pdf",
    "model_cdf_diff",
    "fit_alpha",
    "repeated_eigenvalue",
    "fit_power_law",
]


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeworthFit:
    alpha: float
    n_width: int
    residual_rms: float
    correlation: float

    @property
    def c4_std(self) -> float:
        return self.alpha * self.n_width

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "c4_std": self.c4_std,
            "n_width": self.n_width,
            "residual_rms": self.residual_rms,
            "correlation": self.correlation,
        }


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_prefactor: float
    r_squared: float

    def predict(self, n_width) -> float:
        return math.exp(self.log_prefactor) * np.asarray(n_width, dtype=float) ** self.exponent

    def to_json(self) -> dict:
        return {"exponent": self.exponent, "log_prefactor": self.log_prefactor, "r_squared": self.r_squared}


def perturbed_pdf(y, sigma: float, c4: float, n_width: int):
    """N(y; 0, sigma^2) * [1 - (c4 / N) (3 - 6 (y/sigma)^2 + (y/sigma)^4)]."""
    z = np.asarray(y, dtype=float) / sigma if isinstance(y, np.ndarray) else float(y) / sigma
    return gaussian_pdf(y, sigma) * (1.0 - (c4 / n_width) * hermite(4, z))


def model_cdf_diff(z, alpha: float):
    return alpha * std_pdf(z) * hermite(3, z)


def fit_alpha(table, n_width: int, weighted: bool = False) -> EdgeworthFit:
    """Least-squares amplitude of ``phi(z) He_3(z)`` in an ECDF-difference table.

    ``table`` is a :class:`~finitewidth.stats.DiffTable` or rows of ``(z, d)``.
    With ``weighted=True`` each row is weighted by the inverse binomial
    variance ``1 / (Phi(z) (1 - Phi(z)))`` of the ECDF.
    """
    if hasattr(table, "z") and hasattr(table, "d"):
        z = np.asarray(table.z, dtype=float)
        d = np.asarray(table.d, dtype=float)
    else:
        rows = np.asarray(table, dtype=float).reshape(-1, 2)
        z, d = rows[:, 0], rows[:, 1]
    if len(z) < 8 or not (np.any(z < 0) and np.any(z > 0)):
        raise FitError("need at least 8 rows spanning both signs of z")
    m = std_pdf(z) * hermite(3, z)
    if weighted:
        f = gaussian_cdf(z, 1.0)
        w = 1.0 / np.maximum(f * (1.0 - f), 1e-300)
    else:
        w = np.ones_like(z)
    denom = float(np.sum(w * m * m))
    # He_3 roots (0, +-sqrt 3) evaluate to rounding noise, not exact zeros
    if denom == 0.0 or float(np.max(np.abs(m))) < 1e-12:
        raise FitError("model vanishes on every grid point")
    alpha = float(np.sum(w * d * m)) / denom
    resid = d - alpha * m
    rms = math.sqrt(float(np.mean(resid * resid)))
    return EdgeworthFit(alpha, int(n_width), rms, _correlation(d, alpha * m))


def _correlation(a, b) -> float:
    a = a - a.mean()
    b = b - b.mean()
    norm = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if norm == 0.0:
        return 0.0
    return max(-1.0, min(1.0, float(np.dot(a, b)) / norm))


def repeated_eigenvalue(n: int, n_width: int) -> float:
    """Eigenvalue of the renormalization step applied log2(N) times: N**(1 - n/2)."""
    if n_width < 1:
        raise ValueError("n_width must be >= 1")
    return float(n_width) ** (1.0 - n / 2.0)


def fit_power_law(points: Iterable[tuple[int, float]]) -> PowerLawFit:
    """OLS of log|alpha| on log N; every alpha must be nonzero with a common sign."""
    pts = list(points)
    if len(pts) < 3:
        raise FitError(f"need at least 3 points, have {len(pts)}")
    widths = np.array([p[0] for p in pts], dtype=float)
    alphas = np.array([p[1] for p in pts], dtype=float)
    if len(set(widths.tolist())) != len(widths):
        raise FitError("widths must be distinct")
    if np.any(widths <= 0):
        raise FitError("widths must be positive")
    if np.any(alphas == 0) or not np.all(np.isfinite(alphas)):
        raise FitError("alpha values must be finite and nonzero")
    if not (np.all(alphas > 0) or np.all(alphas < 0)):
        raise FitError("alpha values have mixed signs")
    lx = np.log(widths)
    ly = np.log(np.abs(alphas))
    xm, ym = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    slope = float(np.sum((lx - xm) * (ly - ym))) / sxx
    icept = float(ym - slope * xm)
    resid = ly - (icept + slope * lx)
    sst = float(np.sum((ly - ym) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return PowerLawFit(slope, icept, min(1.0, max(0.0, r2)))

"""Mergeable streaming moments and a fixed-grid empirical CDF.

Moments use the population convention (divide by ``count``). Neither
accumulator stores samples, so ensembles of 1e8 outputs fit in a few KiB.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .special import gaussian_cdf

__all__ = [
    "CapacityError",
    "InsufficientDataError",
    "MomentAccumulator",
    "Moments",
    "BinnedEcdf",
    "DiffTable",
    "ecdf_diff",
]

MAX_COUNT = 2**63 - 1


class CapacityError(OverflowError):
    """A 64-bit sample counter would overflow."""


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class Moments:
    count: int
    mean: float
    variance: float
    skewness: float | None
    excess_kurtosis: float | None

    @property
    def degenerate(self) -> bool:
        return self.skewness is None


@dataclass(frozen=True)
class MomentAccumulator:
    """Count, mean and central power sums ``m2 = sum (y - mean)**2`` etc."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def from_values(cls, values) -> "MomentAccumulator":
        """Two-pass accumulation of a whole array."""
        y = np.asarray(values, dtype=np.float64)
        if y.size == 0:
            return cls()
        if not np.all(np.isfinite(y)):
            raise ValueError("non-finite sample")
        mean = float(y.mean())
        d = y - mean
        d2 = d * d
        return cls(int(y.size), mean, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))

    def accumulate(self, y: float) -> "MomentAccumulator":
        y = float(y)
        if not math.isfinite(y):
            raise ValueError(f"non-finite sample {y}")
        return self.merge(MomentAccumulator(1, y))

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        na, nb = self.count, other.count
        n = na + nb
        if n > MAX_COUNT:
            raise CapacityError(f"combined count {n} exceeds 2**63 - 1")
        # float copies of the counts: keeps the products below from growing bigints
        fa, fb, fn = float(na), float(nb), float(n)
        delta = other.mean - self.mean
        d_n = delta / fn
        mean = self.mean + d_n * fb
        m2 = self.m2 + other.m2 + delta * d_n * fa * fb
        m3 = (
            self.m3 + other.m3
            + delta * d_n * d_n * fa * fb * (fa - fb)
            + 3.0 * d_n * (fa * other.m2 - fb * self.m2)
        )
        m4 = (
            self.m4 + other.m4
            + delta * d_n * d_n * d_n * fa * fb * (fa * fa - fa * fb + fb * fb)
            + 6.0 * d_n * d_n * (fa * fa * other.m2 + fb * fb * self.m2)
            + 4.0 * d_n * (fa * other.m3 - fb * self.m3)
        )
        return MomentAccumulator(n, mean, m2, m3, m4)

    def finalize(self) -> Moments:
        if self.count < 2:
            raise InsufficientDataError(f"need at least 2 samples for a variance, have {self.count}")
        n = float(self.count)
        var = self.m2 / n
        if var <= 0.0:
            return Moments(self.count, self.mean, 0.0, None, None)
        skew = (self.m3 / n) / var**1.5
        kurt = (self.m4 / n) / (var * var) - 3.0
        return Moments(self.count, self.mean, var, skew, kurt)


@dataclass
class BinnedEcdf:
    """Histogram on ``n_bins`` equal bins over [lo, hi) with under/overflow counters."""

    lo: float
    hi: float
    n_bins: int
    counts: np.ndarray = field(default=None, repr=False)
    underflow: int = 0
    overflow: int = 0

    def __post_init__(self):
        if not (self.hi > self.lo) or self.n_bins < 1:
            raise ValueError("need hi > lo and n_bins >= 1")
        if self.counts is None:
            self.counts = np.zeros(self.n_bins, dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            if self.counts.shape != (self.n_bins,):
                raise ValueError("counts must have length n_bins")

    @property
    def inv_width(self) -> float:
        return self.n_bins / (self.hi - self.lo)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def right_edges(self) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * np.arange(1, self.n_bins + 1) / self.n_bins

    def add(self, values) -> None:
        t = (np.asarray(values, dtype=np.float64) - self.lo) * self.inv_width
        under = t < 0.0
        inside = ~under & (t < float(self.n_bins))
        self.underflow += int(under.sum())
        self.overflow += int(t.size - under.sum() - inside.sum())
        self.counts += np.bincount(t[inside].astype(np.int64), minlength=self.n_bins)

    def merge(self, other: "BinnedEcdf") -> "BinnedEcdf":
        if (self.lo, self.hi, self.n_bins) != (other.lo, other.hi, other.n_bins):
            raise ValueError("cannot merge histograms on different grids")
        if self.total + other.total > MAX_COUNT:
            raise CapacityError("combined histogram count exceeds 2**63 - 1")
        return BinnedEcdf(self.lo, self.hi, self.n_bins, self.counts + other.counts,
                          self.underflow + other.underflow, self.overflow + other.overflow)

    def cumulative(self) -> np.ndarray:
        """Number of samples below each right edge."""
        return self.underflow + np.cumsum(self.counts)

    def cdf_at_edges(self) -> np.ndarray:
        total = self.total
        if total == 0:
            raise InsufficientDataError("empty histogram")
        return self.cumulative() / total

    def to_json(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "n_bins": self.n_bins,
            "underflow": self.underflow,
            "overflow": self.overflow,
            "cumulative": [int(c) for c in self.cumulative()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BinnedEcdf":
        cum = np.asarray(obj["cumulative"], dtype=np.int64)
        counts = np.diff(cum, prepend=obj["underflow"])
        return cls(obj["lo"], obj["hi"], obj["n_bins"], counts, obj["underflow"], obj["overflow"])


@dataclass(frozen=True)
class DiffTable:
    """Standardized grid ``z`` and ECDF minus normal CDF ``d``."""

    z: np.ndarray
    d: np.ndarray
    count: int = 0

    def __len__(self):
        return len(self.z)

    def stderr(self) -> np.ndarray:
        """Binomial standard error of the ECDF at each row."""
        f = gaussian_cdf(self.z, 1.0)
        return np.sqrt(f * (1.0 - f) / max(self.count, 1))

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "ecdf_diff"])
            for z, d in zip(self.z, self.d):
                w.writerow([repr(float(z)), repr(float(d))])

    @classmethod
    def from_csv(cls, path) -> "DiffTable":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


def ecdf_diff(ecdf: BinnedEcdf, sigma_hat: float, z_max: float = 5.0,
              min_count: int = 10_000) -> DiffTable:
    """ECDF minus Phi(y / sigma_hat) at interior right edges with |z| <= z_max."""
    if not sigma_hat > 0:
        raise ValueError("sigma_hat must be positive")
    total = ecdf.total
    if total == 0:
        raise InsufficientDataError("empty histogram")
    if total < min_count:
        raise InsufficientDataError(f"need at least {min_count} samples, have {total}")
    edges = ecdf.right_edges()[:-1]
    cdf = ecdf.cdf_at_edges()[:-1]
    z = edges / sigma_hat
    keep = np.abs(z) <= z_max
    z = z[keep]
    return DiffTable(z, cdf[keep] - gaussian_cdf(z, 1.0), total)

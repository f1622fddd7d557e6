"""Summary statistics and histogram binning for BCT tables and figure data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["SummaryStats", "summarize", "Histogram", "histogram"]

_CHUNK = 65_536


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    variance: float  # sample (n - 1) variance; 0 for n == 1
    min: float
    max: float

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.n)

    @property
    def _m2(self) -> float:
        return self.variance * (self.n - 1)

    def merge(self, other: "SummaryStats") -> "SummaryStats":
        """Combine two partial summaries (Chan et al. pairwise update)."""
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self._m2 + other._m2 + delta * delta * self.n * other.n / n
        return SummaryStats(
            n=n,
            mean=mean,
            variance=m2 / (n - 1) if n > 1 else 0.0,
            min=min(self.min, other.min),
            max=max(self.max, other.max),
        )

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "min": self.min,
            "max": self.max,
            "std_error": self.std_error,
        }


def _block_summary(block: np.ndarray) -> SummaryStats:
    n = block.size
    mean = math.fsum(block) / n
    dev = block - mean
    # compensated second pass: subtract the residual of the mean
    resid = math.fsum(dev)
    m2 = math.fsum(dev * dev) - resid * resid / n
    return SummaryStats(
        n=n,
        mean=mean + resid / n,
        variance=max(m2, 0.0) / (n - 1) if n > 1 else 0.0,
        min=float(block.min()),
        max=float(block.max()),
    )


def summarize(sample) -> SummaryStats:
    """Mean, sample variance, extremes and standard error of ``sample``.

    Blocks are summarized with compensated sums and merged pairwise, so the
    result is a single pass over the data in blocks.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("cannot summarize an empty sample")
    out = None
    for start in range(0, x.size, _CHUNK):
        part = _block_summary(x[start : start + _CHUNK])
        out = part if out is None else out.merge(part)
    return out


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        """Counts normalized to unit area over the in-range mass."""
        inside = self.counts.sum()
        if inside == 0:
            return np.zeros_like(self.widths)
        return self.counts / (inside * self.widths)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow


def histogram(sample, bins: int, range: tuple[float, float]) -> Histogram:
    """Equal-width histogram on ``[lo, hi]``; values outside go to under/overflow."""
    if bins < 1:
        raise DomainError("bins must be >= 1")
    lo, hi = float(range[0]), float(range[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"invalid histogram range ({lo}, {hi})")
    x = np.asarray(sample, dtype=float).ravel()
    edges = np.linspace(lo, hi, bins + 1)
    below = int(np.count_nonzero(x < lo))
    above = int(np.count_nonzero(x > hi))
    inside = x[(x >= lo) & (x <= hi)]
    idx = np.minimum(((inside - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(edges=edges, counts=counts, underflow=below, overflow=above)

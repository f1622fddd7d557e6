"""Rejection sampler for the OCNID target and two-sample KS comparison.

Proposing ``X_i ~ f_i`` independently and keeping the vector only when it
is already in increasing order gives draws with density proportional to
``prod f_i(x_i)`` on the ordered cone.  Sorting the proposals instead would
give ordinary inid order statistics, which is a different law.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .distributions import Distribution, validate_family
from .errors import DomainError
from .gibbs import clamp_uniforms

__all__ = [
    "OracleBatch",
    "OracleInfeasibleWarning",
    "rejection_draw",
    "rejection_batch",
    "KSResult",
    "two_sample_distance",
]

MIN_ACCEPTANCE = 1e-6
WINDOW = 1_000_000


class OracleInfeasibleWarning(RuntimeWarning):
    pass


@dataclass
class OracleBatch:
    draws: np.ndarray  # (count, m)
    proposals_used: int

    @property
    def acceptance_rate(self) -> float:
        return self.draws.shape[0] / self.proposals_used


def _propose(dists, rng, size):
    u = clamp_uniforms(rng.random((size, len(dists))))
    return np.column_stack([d.quantile(u[:, i]) for i, d in enumerate(dists)])


def _ordered(x):
    return np.all(np.diff(x, axis=1) > 0, axis=1) if x.shape[1] > 1 else np.ones(x.shape[0], bool)


def rejection_draw(dists: Sequence[Distribution], rng: np.random.Generator, max_proposals: int = 10**8):
    """One exact draw from the OCNID target; returns ``(x, proposals_used)``."""
    validate_family(dists)
    for used in range(1, max_proposals + 1):
        x = _propose(dists, rng, 1)
        if _ordered(x)[0]:
            return x[0], used
        if used == WINDOW:
            warnings.warn(
                f"no acceptance in {WINDOW} proposals; rejection oracle is impractical here",
                OracleInfeasibleWarning,
                stacklevel=2,
            )
    raise RuntimeError(f"rejection oracle exceeded {max_proposals} proposals")


def rejection_batch(
    dists: Sequence[Distribution],
    count: int,
    seed: int,
    block: int = 200_000,
    max_proposals: int = 10**10,
) -> OracleBatch:
    """``count`` exact draws by vectorized rejection from one seeded stream."""
    validate_family(dists)
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng(seed)
    kept, n_kept, used = [], 0, 0
    warned = False
    while n_kept < count:
        x = _propose(dists, rng, block)
        ok = _ordered(x)
        # count proposals only up to the one that completes the batch
        hits = np.flatnonzero(ok)
        need = count - n_kept
        if hits.size >= need:
            used += int(hits[need - 1]) + 1
            kept.append(x[hits[:need]])
            n_kept = count
            break
        used += block
        kept.append(x[hits])
        n_kept += hits.size
        if not warned and used >= WINDOW and n_kept / used < MIN_ACCEPTANCE:
            warnings.warn(
                f"acceptance rate {n_kept / used:.2e} below {MIN_ACCEPTANCE:g}; "
                "rejection oracle is impractical for this configuration",
                OracleInfeasibleWarning,
                stacklevel=2,
            )
            warned = True
        if used >= max_proposals:
            raise RuntimeError(f"rejection oracle exceeded {max_proposals} proposals")
    return OracleBatch(draws=np.concatenate(kept, axis=0), proposals_used=used)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float


def two_sample_distance(a, b) -> KSResult:
    """Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    return KSResult(statistic=d, pvalue=float(sps.kstwobign.sf(en * d)))

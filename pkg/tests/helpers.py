"""Shared configurations and random-state builders for the tests."""

import numpy as np

from ocnid.distributions import Cauchy, Exponential, FoldedCauchy, Pareto, Weibull

CONFIGS = {
    "exponential": [Exponential(t) for t in (8, 6, 4, 2)],
    "weibull": [Weibull(3, t) for t in (8, 6, 4, 2)],
    "cauchy": [Cauchy(t) for t in (8, 6, 4, 2)],
    "pareto": [Pareto(t) for t in (8, 6, 4, 2)],
    "mixed": [Exponential(2), Weibull(3, 2), FoldedCauchy(2)],
}


def ordered_states(dists, rng, rows):
    """Random nondecreasing states drawn from the product marginals, then sorted."""
    u = rng.uniform(0.001, 0.999, (rows, len(dists)))
    x = np.column_stack([d.quantile(u[:, i]) for i, d in enumerate(dists)])
    return np.sort(x, axis=1)


def sandwiched_pairs(dists, rng, rows):
    """(low, high) nondecreasing states with low <= high componentwise."""
    low = ordered_states(dists, rng, rows)
    bump = np.abs(ordered_states(dists, rng, rows)) * rng.uniform(0, 1, (rows, 1))
    bump[rng.uniform(size=rows) < 0.1] = 0.0  # some exactly coupled rows
    high = np.maximum.accumulate(low + bump, axis=1)
    return low, high

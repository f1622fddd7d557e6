"""Forward Gibbs kernel for the OCNID target.

The target is ``prod_i f_i(x_i)`` restricted to ``x_1 < x_2 < ... < x_m``.
Each full conditional is ``f_i`` truncated to ``(x_{i-1}, x_{i+1})`` and is
drawn by inverting the cdf, which makes a sweep a deterministic function of
the current state and one vector of uniforms.  That function is monotone in
the state, the fact the coupling engine relies on.

State arrays may be 1-D (one chain, shape ``(m,)``) or 2-D (``(rows, m)``,
one chain per row); the same uniform vector layout applies.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .distributions import Distribution
from .errors import DomainError

__all__ = ["U_MIN", "U_MAX", "clamp_uniforms", "truncated_draw", "gibbs_sweep", "forward_chain"]

U_MIN = 2.0**-53
U_MAX = 1.0 - 2.0**-53


def clamp_uniforms(u):
    return np.clip(u, U_MIN, U_MAX)


def _truncated(dist: Distribution, lower, upper, u):
    # unchecked kernel: lower <= upper elementwise, u in (0, 1)
    tail = lower >= dist.median
    if np.ndim(tail) == 0:
        if tail:
            s_lo, s_hi = dist.sf(lower), dist.sf(upper)
            x = dist.isf(s_lo - (s_lo - s_hi) * u)
        else:
            f_lo, f_hi = dist.cdf(lower), dist.cdf(upper)
            x = dist.quantile(f_lo + (f_hi - f_lo) * u)
    else:
        x = np.empty(np.shape(tail))
        lower, upper, u = np.broadcast_arrays(lower, upper, u)
        body = ~tail
        if body.any():
            f_lo, f_hi = dist.cdf(lower[body]), dist.cdf(upper[body])
            x[body] = dist.quantile(f_lo + (f_hi - f_lo) * u[body])
        if tail.any():
            s_lo, s_hi = dist.sf(lower[tail]), dist.sf(upper[tail])
            x[tail] = dist.isf(s_lo - (s_lo - s_hi) * u[tail])
    # rounding can push the inverse a hair outside the bracket
    return np.minimum(np.maximum(x, lower), upper)


def truncated_draw(dist: Distribution, lower, upper, u):
    """Draw from ``dist`` restricted to ``[lower, upper]`` by cdf inversion.

    Returns ``F^-1(F(lower) + (F(upper) - F(lower)) * u)``.  Above the median
    the same point is computed through the survival function.  When
    ``lower == upper`` the common value is returned.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(lower > upper):
        raise DomainError("truncated_draw needs lower <= upper")
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise DomainError("uniform outside (0, 1)")
    x = _truncated(dist, lower, upper, u)
    return x[()] if np.ndim(x) == 0 else x


def _sweep(dists: Sequence[Distribution], state: np.ndarray, u: np.ndarray) -> np.ndarray:
    # state, u: (rows, m); ascending update order, left neighbour already refreshed
    m = len(dists)
    support = dists[0].support
    new = np.empty_like(state)
    left = np.full(state.shape[0], support.lower)
    top = np.full(state.shape[0], support.upper)
    for i, dist in enumerate(dists):
        right = state[:, i + 1] if i + 1 < m else top
        new[:, i] = _truncated(dist, left, right, u[:, i])
        left = new[:, i]
    return new


def gibbs_sweep(dists: Sequence[Distribution], state, u) -> np.ndarray:
    """One systematic-scan Gibbs sweep ``i = 1..m``.

    ``state`` and ``u`` are ``(m,)`` or ``(rows, m)``; component ``i`` is
    redrawn between the freshly updated ``x_{i-1}`` and the old ``x_{i+1}``,
    with the support endpoints standing in for the missing neighbours.
    """
    state = np.asarray(state, dtype=float)
    u = np.asarray(u, dtype=float)
    single = state.ndim == 1
    s2, u2 = np.atleast_2d(state), np.atleast_2d(u)
    if s2.shape[1] != len(dists) or u2.shape != s2.shape:
        raise DomainError(f"state {state.shape} / uniforms {u.shape} do not match m={len(dists)}")
    if np.any(np.diff(s2, axis=1) < 0):
        raise DomainError("state must be nondecreasing")
    out = _sweep(dists, s2, u2)
    return out[0] if single else out


def forward_chain(dists, start, n_sweeps, rng, burn_in=0, thin=1):
    """Plain forward Gibbs run, returning every ``thin``-th state after ``burn_in``."""
    state = np.atleast_2d(np.asarray(start, dtype=float))
    m = len(dists)
    kept = []
    for t in range(burn_in + n_sweeps):
        state = _sweep(dists, state, clamp_uniforms(rng.random((state.shape[0], m))))
        if t >= burn_in and (t - burn_in) % thin == 0:
            kept.append(state.copy())
    return np.stack(kept, axis=0)

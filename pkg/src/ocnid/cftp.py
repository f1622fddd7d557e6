"""Epsilon-perfect coupling from the past for OCNID order statistics.

An attempt from time ``-n`` starts an upper process (one sweep down from
``+inf``) and a lower process seeded by a scalar obtained through a
descending chain over times ``-n-m+1 .. -n``.  Both are swept forward to time
0 with shared uniforms.  If the squared distance between them at time 0 is
below ``eps`` the midpoint is returned; otherwise ``n`` grows by one and one
more uniform vector (at time ``-n-m+1``) is appended to the store.  Uniforms
at times already generated are always reused.

Everything is vectorized over independent draws: a :class:`UniformStore`
may hold several streams (rows), and all still-running draws in a batch are
at the same ``n``, so an attempt is a handful of array sweeps.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .distributions import Distribution, validate_family
from .errors import DomainError, InvariantError, NonCoalescenceError
from .gibbs import _sweep, _truncated, clamp_uniforms
from .stats import summarize

__all__ = [
    "UniformStore",
    "CoupledState",
    "PerfectDraw",
    "DrawBatch",
    "upper_start",
    "lower_start",
    "coupled_sweep",
    "perfect_draw",
    "draw_batch",
    "stream_generator",
    "start_state",
    "evolve",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_N = 10_000


def stream_generator(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for sub-stream ``key`` of ``seed``.

    Addressed by key rather than by spawn order, so draw ``j`` sees the same
    uniforms however the work is split.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


class UniformStore:
    """Uniform vectors ``V_t`` for ``t = 0, -1, -2, ...``, one stream per row.

    ``V_t`` for each row is taken from that row's generator in order of
    increasing depth ``-t``, so a vector, once created, is never redrawn and
    its value does not depend on when it was asked for.  ``size`` counts the
    time steps generated so far; the generator itself is read ahead in blocks.
    """

    def __init__(self, m: int, generators: Sequence[np.random.Generator], block: int = 16):
        if m < 1:
            raise DomainError("m must be >= 1")
        self.m = m
        self._gens = list(generators)
        self._block = block
        self._buf = np.empty((len(self._gens), 0, m))
        self.size = 0

    @classmethod
    def from_seed(cls, m: int, seed: int, streams: int = 1, first: int = 0, key: tuple = ()):
        gens = [stream_generator(seed, *key, first + j) for j in range(streams)]
        return cls(m, gens)

    @classmethod
    def fixed(cls, vectors):
        """Single-stream store replaying ``vectors[d]`` as ``V_{-d}``; cannot grow past them."""
        vectors = np.asarray(vectors, dtype=float)
        return cls(vectors.shape[1], [_Replay(vectors)], block=1)

    @property
    def rows(self) -> int:
        return len(self._gens)

    def ensure(self, depth: int) -> None:
        """Make times ``0 .. -depth`` available."""
        need = depth + 1
        have = self._buf.shape[1]
        if need > have:
            extra = max(self._block, need - have)
            fresh = np.stack([g.random((extra, self.m)) for g in self._gens]) if self._gens else (
                np.empty((0, extra, self.m))
            )
            self._buf = np.concatenate([self._buf, clamp_uniforms(fresh)], axis=1)
        self.size = max(self.size, need)

    def at(self, t: int, rows=None) -> np.ndarray:
        """Uniforms at time ``t <= 0`` as a ``(rows, m)`` array."""
        depth = -t
        if t > 0 or depth >= self.size:
            raise IndexError(f"time {t} has not been generated (size {self.size})")
        block = self._buf[:, depth]
        return block if rows is None else block[rows]

    def vector(self, t: int, row: int = 0) -> np.ndarray:
        return self.at(t)[row]

    def keep(self, mask) -> None:
        """Drop the rows where ``mask`` is False (finished draws in a batch)."""
        mask = np.asarray(mask, dtype=bool)
        self._gens = [g for g, k in zip(self._gens, mask) if k]
        self._buf = self._buf[mask]


class _Replay:
    """Generator stand-in that hands out preset rows in order."""

    def __init__(self, rows):
        self._rows = rows
        self._pos = 0

    def random(self, shape):
        k = shape[0]
        if self._pos + k > len(self._rows):
            raise IndexError("replay store exhausted")
        out = self._rows[self._pos : self._pos + k]
        self._pos += k
        return out


@dataclass
class CoupledState:
    lower: np.ndarray
    upper: np.ndarray
    time: int

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)

    @property
    def gap(self):
        return np.sum((self.lower - self.upper) ** 2, axis=-1)

    def check_sandwich(self) -> None:
        if np.any(self.lower > self.upper):
            raise InvariantError(f"lower process above upper process at time {self.time}")


@dataclass(frozen=True)
class PerfectDraw:
    values: np.ndarray
    bct: int
    gap: float
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)


# Largest lower-above-upper inversion treated as rounding, relative to |x|.
SANDWICH_RTOL = 1e-9


def _restore_sandwich(lower, upper, time):
    """Undo rounding-level inversions between the bounding processes.

    The truncated inverse-cdf map is monotone in exact arithmetic but not to
    the last ulp, so nearly coupled paths can swap by a few ulps.  Such
    inversions are collapsed onto the upper value; anything larger is a bug.
    """
    over = lower > upper
    if over.any():
        excess = (lower - upper)[over]
        scale = np.maximum(np.abs(upper[over]), np.finfo(float).tiny)
        if np.any(excess > SANDWICH_RTOL * scale):
            raise InvariantError(f"lower process above upper process at time {time}")
        lower = np.where(over, upper, lower)
    return lower


def upper_start(dists: Sequence[Distribution], u) -> np.ndarray:
    """Upper process at time ``-n``: one sweep from the all-``+inf`` state with ``V_{-n}``."""
    u = np.asarray(u, dtype=float)
    u2 = np.atleast_2d(u)
    top = np.full(u2.shape, dists[0].support.upper)
    out = _sweep(dists, top, u2)
    return out[0] if u.ndim == 1 else out


def lower_start(dists: Sequence[Distribution], store: UniformStore, n: int, rows=None):
    """Scalar lower bound at time ``-n`` seeding every lower component.

    Starts from ``F_m^-1(V_m)`` at time ``-n-m+1`` and walks down the
    components, ``x <- F_i^-1(F_i(x) V_i)`` at time ``-n-i+1``, ending with
    component 1 at time ``-n``.
    """
    m = len(dists)
    support = dists[0].support
    x = None
    for j in range(m - 1, -1, -1):
        v = store.at(-n - j, rows)[:, j]
        bound = np.full(v.shape, support.upper) if x is None else x
        x = _truncated(dists[j], np.full(v.shape, support.lower), bound, v)
    return x[0] if store.rows == 1 and rows is None else x


def coupled_sweep(dists: Sequence[Distribution], state: CoupledState, u) -> CoupledState:
    """Advance lower and upper processes one step with the same uniforms."""
    state.check_sandwich()
    u = np.asarray(u, dtype=float)
    single = state.lower.ndim == 1
    both = np.vstack([np.atleast_2d(state.lower), np.atleast_2d(state.upper)])
    u2 = np.atleast_2d(u)
    out = _sweep(dists, both, np.vstack([u2, u2]))
    k = out.shape[0] // 2
    lower, upper = out[:k], out[k:]
    lower = _restore_sandwich(lower, upper, state.time + 1)
    if single:
        lower, upper = lower[0], upper[0]
    return CoupledState(lower=lower, upper=upper, time=state.time + 1)


Observer = Callable[[int, CoupledState], None]


def evolve(dists, state: CoupledState, store: UniformStore, rows=None, observer=None, n=0) -> CoupledState:
    """Coupled sweeps from ``state.time`` up to time 0 using the stored uniforms."""
    lower = np.atleast_2d(state.lower)
    k = lower.shape[0]
    both = np.vstack([lower, np.atleast_2d(state.upper)])
    for t in range(state.time + 1, 1):
        u = store.at(t, rows)
        both = _sweep(dists, both, np.vstack([u, u]))
        both[:k] = _restore_sandwich(both[:k], both[k:], t)
        if observer is not None:
            observer(n, CoupledState(both[:k].copy(), both[k:].copy(), t))
    return CoupledState(both[:k], both[k:], 0)


def start_state(dists, store: UniformStore, n: int, rows=None) -> CoupledState:
    """Bounding processes at time ``-n``: upper start and the scalar lower start."""
    m = len(dists)
    upper = upper_start(dists, store.at(-n, rows))
    x_low = np.atleast_1d(lower_start(dists, store, n, rows))
    lower = np.repeat(x_low[:, None], m, axis=1)
    return CoupledState(lower, upper, -n)


def _attempt(dists, store, n, rows=None, observer: Optional[Observer] = None):
    """Run the bounding processes from time ``-n`` to 0; returns (lower, upper)."""
    state = start_state(dists, store, n, rows)
    if observer is not None:
        observer(n, CoupledState(state.lower.copy(), state.upper.copy(), -n))
    end = evolve(dists, state, store, rows, observer, n)
    return end.lower, end.upper


def _next_n(n, doubling):
    return 2 * n if doubling else n + 1


def _coalesce(dists, eps, store: UniformStore, max_n, doubling=False, compact=False, observer=None):
    """Run all rows of ``store`` to coalescence; returns (lower, upper, bct, gap)."""
    m = len(dists)
    rows = store.rows
    lower_out = np.empty((rows, m))
    upper_out = np.empty((rows, m))
    bct = np.zeros(rows, dtype=np.int64)
    gaps = np.empty(rows)
    active = np.arange(rows)
    store.ensure(m)
    n = 1
    last_gap = np.inf
    while active.size:
        if n > max_n:
            raise NonCoalescenceError(max_n, last_gap)
        store.ensure(n + m - 1)
        sel = None if compact else active
        lower, upper = _attempt(dists, store, n, sel, observer)
        gap = np.sum((lower - upper) ** 2, axis=1)
        done = gap < eps
        if done.any():
            idx = active[done]
            lower_out[idx] = lower[done]
            upper_out[idx] = upper[done]
            bct[idx] = n
            gaps[idx] = gap[done]
            active = active[~done]
            if compact:
                store.keep(~done)
        if active.size:
            last_gap = float(np.max(gap[~done]))
        n = _next_n(n, doubling)
    return lower_out, upper_out, bct, gaps


def perfect_draw(
    dists: Sequence[Distribution],
    eps: float,
    store: UniformStore,
    max_n: int = DEFAULT_MAX_N,
    doubling: bool = False,
    observer: Optional[Observer] = None,
) -> PerfectDraw:
    """One epsilon-perfect draw from the OCNID target driven by ``store``.

    ``observer(n, state)`` is called with every coupled state visited during
    every attempt, which is how the tests watch the sandwich.
    """
    validate_family(dists)
    if not eps > 0:
        raise DomainError("eps must be positive")
    if store.rows != 1 or store.m != len(dists):
        raise DomainError("perfect_draw needs a single-stream store of width m")
    lower, upper, bct, gap = _coalesce(dists, eps, store, max_n, doubling, observer=observer)
    return PerfectDraw(
        values=0.5 * (lower[0] + upper[0]),
        bct=int(bct[0]),
        gap=float(gap[0]),
        lower=lower[0],
        upper=upper[0],
    )


@dataclass
class DrawBatch:
    """Batch of independent draws; ``values`` etc. are ``None`` with ``bct_only``."""

    bct: np.ndarray
    gap: np.ndarray
    values: Optional[np.ndarray]
    lower: Optional[np.ndarray]
    upper: Optional[np.ndarray]
    eps: float
    seed: int

    def __len__(self):
        return self.bct.size

    def __getitem__(self, j) -> PerfectDraw:
        if self.values is None:
            raise IndexError("batch was run with bct_only")
        return PerfectDraw(self.values[j], int(self.bct[j]), float(self.gap[j]), self.lower[j], self.upper[j])

    def summary(self) -> dict:
        s = summarize(self.bct)
        return {
            "mean_bct": s.mean,
            "min_bct": int(s.min),
            "max_bct": int(s.max),
            "bct_std_error": s.std_error,
            "n_draws": s.n,
            "epsilon": self.eps,
            "seed": self.seed,
        }


def draw_batch(
    dists: Sequence[Distribution],
    eps: float,
    count: int,
    seed: int,
    max_n: int = DEFAULT_MAX_N,
    doubling: bool = False,
    threads: int = 1,
    chunk: int = 4096,
    bct_only: bool = False,
    key: tuple = (),
) -> DrawBatch:
    """``count`` independent draws; draw ``j`` uses sub-stream ``key + (j,)`` of ``seed``.

    Draws are processed in fixed chunks of ``chunk`` rows (optionally on
    several threads), so results do not depend on ``threads``.
    """
    validate_family(dists)
    if count < 1:
        raise DomainError("count must be >= 1")
    if not eps > 0:
        raise DomainError("eps must be positive")
    m = len(dists)

    def run(start):
        size = min(chunk, count - start)
        store = UniformStore.from_seed(m, seed, streams=size, first=start, key=key)
        return start, _coalesce(dists, eps, store, max_n, doubling, compact=True)

    starts = range(0, count, chunk)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]

    bct = np.empty(count, dtype=np.int64)
    gap = np.empty(count)
    lower = None if bct_only else np.empty((count, m))
    upper = None if bct_only else np.empty((count, m))
    for start, (lo, up, b, g) in parts:
        sl = slice(start, start + b.size)
        bct[sl], gap[sl] = b, g
        if not bct_only:
            lower[sl], upper[sl] = lo, up
    values = None if bct_only else 0.5 * (lower + upper)
    log.debug("draw_batch m=%d count=%d mean bct %.3f", m, count, bct.mean())
    return DrawBatch(bct=bct, gap=gap, values=values, lower=lower, upper=upper, eps=eps, seed=seed)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocnid.distributions import Exponential, Weibull
from ocnid.errors import DomainError
from ocnid.gibbs import U_MAX, U_MIN, clamp_uniforms, forward_chain, gibbs_sweep, truncated_draw
from ocnid.oracle import rejection_batch
from ocnid.stats import summarize
from tests.helpers import CONFIGS, sandwiched_pairs


def test_truncated_draw_examples():
    e = Exponential(1.0)
    assert truncated_draw(e, 0.0, math.inf, 0.5) == pytest.approx(math.log(2), abs=1e-15)
    assert truncated_draw(e, 1.0, math.inf, 0.5) == pytest.approx(1 + math.log(2), abs=1e-14)
    w = Weibull(3.0, 2.0)
    v = truncated_draw(w, 0.2, 0.6, 0.25)
    target = w.cdf(0.2) + 0.25 * (w.cdf(0.6) - w.cdf(0.2))
    assert 0.2 < v < 0.6
    assert w.cdf(v) == pytest.approx(target, abs=1e-14)


def test_truncated_draw_equal_bounds_returns_common_value():
    assert truncated_draw(Exponential(1.0), 2.5, 2.5, 0.3) == 2.5


def test_truncated_draw_errors():
    with pytest.raises(DomainError):
        truncated_draw(Exponential(1.0), 2.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        truncated_draw(Exponential(1.0), 0.0, 1.0, 1.0)


def test_far_tail_truncation_stays_inside_bracket():
    # survival-side branch: F(lower) rounds to 1 here
    e = Exponential(1.0)
    x = truncated_draw(e, 50.0, 51.0, 0.5)
    assert 50.0 < x < 51.0
    assert x == pytest.approx(50 - math.log(0.5 + 0.5 * math.exp(-1)), rel=1e-14)


def test_clamp():
    u = clamp_uniforms(np.array([0.0, 0.5, 1.0]))
    assert u[0] == U_MIN and u[2] == U_MAX and u[1] == 0.5


def test_sweep_single_component_ignores_state():
    e = Exponential(1.0)
    assert gibbs_sweep([e], [123.0], [0.5])[0] == pytest.approx(math.log(2))


def test_sweep_two_exponentials():
    d1, d2 = Exponential(2.0), Exponential(1.0)
    x1, x2 = gibbs_sweep([d1, d2], [1.0, 2.0], [0.5, 0.5])
    assert d1.cdf(x1) == pytest.approx(d1.cdf(2.0) * 0.5, rel=1e-14)
    assert d2.cdf(x2) == pytest.approx(d2.cdf(x1) + (1 - d2.cdf(x1)) * 0.5, rel=1e-14)
    assert x1 < x2


def test_sweep_rejects_unordered_state():
    with pytest.raises(DomainError):
        gibbs_sweep(CONFIGS["exponential"], [1.0, 0.5, 2.0, 3.0], [0.5] * 4)


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_sweep_monotone_and_ordered(name):
    dists = CONFIGS[name]
    rng = np.random.default_rng(11)
    low, high = sandwiched_pairs(dists, rng, 10_000)
    u = clamp_uniforms(rng.random(low.shape))
    a, b = gibbs_sweep(dists, low, u), gibbs_sweep(dists, high, u)
    assert np.all(a <= b)
    assert np.all(np.diff(a, axis=1) > 0)
    assert np.all(np.diff(b, axis=1) > 0)


@given(
    seed=st.integers(0, 2**32 - 1),
    thetas=st.lists(st.floats(0.1, 20), min_size=1, max_size=6),
)
def test_sweep_monotone_random_families(seed, thetas):
    dists = [Exponential(t) for t in thetas]
    rng = np.random.default_rng(seed)
    low, high = sandwiched_pairs(dists, rng, 8)
    u = clamp_uniforms(rng.random(low.shape))
    assert np.all(gibbs_sweep(dists, low, u) <= gibbs_sweep(dists, high, u))


@pytest.mark.slow
def test_stationary_means_match_oracle():
    dists = [Exponential(2.0), Exponential(1.0)]
    rng = np.random.default_rng(5)
    # 20 independent chains side by side; standard error from the chain means
    chain = forward_chain(dists, np.tile([0.5, 1.0], (20, 1)), 20_000, rng, burn_in=10_000, thin=10)
    oracle = rejection_batch(dists, 50_000, seed=6).draws
    for i in range(2):
        means = chain[:, :, i].mean(axis=0)
        se_chain = means.std(ddof=1) / math.sqrt(means.size)
        o = summarize(oracle[:, i])
        se = math.hypot(se_chain, o.std_error)
        assert abs(means.mean() - o.mean) < 3 * se

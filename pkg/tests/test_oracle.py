import math

import numpy as np
import pytest
from scipy import integrate, stats as sps

from ocnid.distributions import Exponential, Weibull
from ocnid.errors import DomainError
from ocnid.oracle import OracleInfeasibleWarning, rejection_batch, rejection_draw, two_sample_distance


def _binomial_ok(rate, p, n):
    return abs(rate - p) < 5 * math.sqrt(p * (1 - p) / n)


def test_single_component_accepts_everything():
    b = rejection_batch([Exponential(2.0)], 1000, seed=1)
    assert b.acceptance_rate == 1.0
    assert b.proposals_used == 1000


@pytest.mark.parametrize("m", [2, 4])
def test_iid_acceptance_is_one_over_m_factorial(m):
    dists = [Weibull(3.0, 2.0)] * m
    b = rejection_batch(dists, 20_000, seed=2)
    assert _binomial_ok(b.acceptance_rate, 1 / math.factorial(m), b.proposals_used)


def test_draws_are_strictly_ordered():
    b = rejection_batch([Exponential(t) for t in (8, 6, 4, 2)], 5000, seed=3)
    assert b.draws.shape == (5000, 4)
    assert np.all(np.diff(b.draws, axis=1) > 0)


def test_single_draw():
    rng = np.random.default_rng(0)
    x, used = rejection_draw([Exponential(1.0), Exponential(1.0)], rng)
    assert x[0] < x[1] and used >= 1


def test_two_component_moments_against_integration():
    f1, f2 = Exponential(2.0), Exponential(1.0)
    dens = lambda y, x: f1.pdf(x) * f2.pdf(y)
    z, _ = integrate.dblquad(dens, 0, np.inf, lambda x: x, lambda x: np.inf)
    m1, _ = integrate.dblquad(lambda y, x: x * dens(y, x), 0, np.inf, lambda x: x, lambda x: np.inf)
    m2, _ = integrate.dblquad(lambda y, x: y * dens(y, x), 0, np.inf, lambda x: x, lambda x: np.inf)
    v1, _ = integrate.dblquad(lambda y, x: x * x * dens(y, x), 0, np.inf, lambda x: x, lambda x: np.inf)
    v2, _ = integrate.dblquad(lambda y, x: y * y * dens(y, x), 0, np.inf, lambda x: x, lambda x: np.inf)
    mean = np.array([m1, m2]) / z
    var = np.array([v1, v2]) / z - mean**2
    d = rejection_batch([f1, f2], 200_000, seed=4).draws
    np.testing.assert_allclose(d.mean(axis=0), mean, rtol=0.01)
    np.testing.assert_allclose(d.var(axis=0), var, rtol=0.01)


def test_infeasible_configuration_warns():
    # P(X1 < X2) = 1e-3 / (1e-3 + 1e4) = 1e-7
    dists = [Exponential(1e-3), Exponential(1e4)]
    with pytest.warns(OracleInfeasibleWarning), pytest.raises(RuntimeError):
        rejection_batch(dists, 10, seed=1, max_proposals=2_000_000)


def test_ks_identical_samples():
    a = np.random.default_rng(0).normal(size=500)
    r = two_sample_distance(a, a)
    assert r.statistic == 0.0 and r.pvalue == pytest.approx(1.0)


def test_ks_shifted_uniforms():
    rng = np.random.default_rng(1)
    r = two_sample_distance(rng.uniform(size=10_000), rng.uniform(0.5, 1.5, 10_000))
    assert r.statistic == pytest.approx(0.5, abs=0.02)
    assert r.pvalue < 1e-100


def test_ks_matches_scipy():
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=3000), rng.normal(0.05, 1, 2500)
    ours = two_sample_distance(a, b)
    ref = sps.ks_2samp(a, b, method="asymp")
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-15)
    assert ours.pvalue == pytest.approx(ref.pvalue, rel=0.05)


def test_ks_empty_sample():
    with pytest.raises(DomainError):
        two_sample_distance([], [1.0])

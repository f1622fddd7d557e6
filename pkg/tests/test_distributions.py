import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from ocnid.distributions import (
    Cauchy,
    Exponential,
    FoldedCauchy,
    InverseGamma,
    Pareto,
    Weibull,
    parse_distribution,
    reg_incomplete_gamma,
    validate_family,
)
from ocnid.errors import ConfigError, DomainError

FAMILIES = [
    Exponential(2.0),
    Exponential(0.3),
    Weibull(3.0, 2.0),
    Weibull(0.7, 5.0),
    Cauchy(2.0),
    FoldedCauchy(2.0),
    Pareto(2.0),
    Pareto(0.05),
    InverseGamma(2.0, 3.0),
    InverseGamma(52.0, 481.41),
]
ids = [d.spec for d in FAMILIES]


def test_cdf_examples():
    assert Exponential(2.0).cdf(0.0) == 0.0
    assert Exponential(1.0).cdf(math.log(2)) == pytest.approx(0.5, abs=1e-15)


def test_inverse_gamma_cdf_against_quadrature():
    ig = InverseGamma(2.0, 3.0)
    ref, _ = integrate.quad(ig.pdf, 0, 1.5, epsabs=1e-13, epsrel=1e-12)
    assert ig.cdf(1.5) == pytest.approx(ref, abs=1e-8)


def test_quantile_examples():
    assert Exponential(1.0).quantile(0.5) == pytest.approx(0.693147, abs=1e-6)
    assert Pareto(2.0).quantile(0.0) == 0.0
    ig = InverseGamma(2.0, 3.0)
    assert ig.cdf(ig.quantile(0.5)) == pytest.approx(0.5, abs=1e-12)


def test_quantile_endpoints_are_support_limits():
    assert Exponential(1.0).quantile(1.0) == math.inf
    assert Cauchy(1.0).quantile(0.0) == -math.inf
    assert Cauchy(1.0).quantile(1.0) == math.inf


@pytest.mark.parametrize("p", [-0.1, 1.5, math.nan])
def test_quantile_rejects_bad_probability(p):
    with pytest.raises(DomainError):
        Exponential(1.0).quantile(p)


def test_logpdf_examples():
    assert Exponential(2.0).logpdf(0.5) == pytest.approx(math.log(2) - 1, abs=1e-12)
    assert Weibull(3.0, 2.0).logpdf(-1.0) == -math.inf
    assert InverseGamma(2.0, 3.0).logpdf(1.0) == pytest.approx(2 * math.log(3) - 3, abs=1e-12)


def test_nonpositive_parameters_rejected():
    for make in (lambda: Exponential(0.0), lambda: Weibull(-1, 1), lambda: InverseGamma(1, 0)):
        with pytest.raises(ConfigError):
            make()


@pytest.mark.parametrize("dist", FAMILIES, ids=ids)
def test_round_trip(dist):
    rng = np.random.default_rng(7)
    p = rng.uniform(1e-6, 1 - 1e-6, 1000)
    assert np.max(np.abs(dist.cdf(dist.quantile(p)) - p)) <= 1e-9
    assert np.max(np.abs(dist.sf(dist.isf(p)) - p)) <= 1e-9
    # and back through x
    x = dist.quantile(rng.uniform(1e-3, 1 - 1e-3, 1000))
    back = dist.quantile(dist.cdf(x))
    assert np.max(np.abs(back - x) / np.maximum(np.abs(x), 1e-300)) <= 1e-9


@pytest.mark.parametrize("dist", FAMILIES, ids=ids)
def test_pdf_matches_cdf_derivative(dist):
    p = np.linspace(0.01, 0.99, 100)
    x = dist.quantile(p)
    h = 1e-5 * np.maximum(np.abs(x), 1e-3)
    deriv = (dist.cdf(x + h) - dist.cdf(x - h)) / (2 * h)
    np.testing.assert_allclose(dist.pdf(x), deriv, rtol=1e-5)


@pytest.mark.parametrize("dist", FAMILIES, ids=ids)
@given(p1=st.floats(0, 1), p2=st.floats(0, 1))
def test_monotone(dist, p1, p2):
    lo, hi = min(p1, p2), max(p1, p2)
    x1, x2 = dist.quantile(lo), dist.quantile(hi)
    assert x1 <= x2
    assert dist.cdf(x1) <= dist.cdf(x2)


def test_inverse_gamma_cdf_at_fifty_points():
    ig = InverseGamma(2.0, 3.0)
    xs = np.geomspace(0.05, 50, 50)
    for x in xs:
        ref, _ = integrate.quad(ig.pdf, 0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert abs(ig.cdf(x) - ref) <= 1e-8
        assert abs(ig.reference_cdf(x) - ref) <= 1e-8


def test_inverse_gamma_two_routes_agree():
    for ig in (InverseGamma(2.0, 3.0), InverseGamma(52.0, 481.41), InverseGamma(402.0, 27.0)):
        for p in (1e-8, 0.01, 0.3, 0.5, 0.9, 0.999):
            ref = ig.reference_quantile(p)
            assert ig.quantile(p) == pytest.approx(ref, rel=1e-10)
            assert ig.reference_cdf(ref) == pytest.approx(p, rel=1e-9)


def _gamma_quad(a, x):
    f = lambda t: math.exp((a - 1) * math.log(t) - t - math.lgamma(a)) if t > 0 else 0.0
    val, _ = integrate.quad(f, 0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def test_incomplete_gamma_examples():
    assert reg_incomplete_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert reg_incomplete_gamma(3.3, 0.0) == 0.0
    assert abs(reg_incomplete_gamma(2.5, 2.5) - _gamma_quad(2.5, 2.5)) <= 1e-10


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 7.0, 30.0])
@pytest.mark.parametrize("x", [0.1, 1.0, 3.0, 10.0, 45.0])
def test_incomplete_gamma_against_quadrature(a, x):
    assert abs(reg_incomplete_gamma(a, x) - _gamma_quad(a, x)) <= 1e-10
    assert reg_incomplete_gamma(a, x, upper=True) == pytest.approx(special.gammaincc(a, x), rel=1e-12, abs=1e-300)


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        reg_incomplete_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        reg_incomplete_gamma(1.0, -1.0)


def test_validate_family():
    validate_family([Exponential(2), Weibull(3, 2), FoldedCauchy(2)])
    validate_family([Exponential(2)])
    with pytest.raises(ConfigError, match="1"):
        validate_family([Exponential(2), Cauchy(2)])


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp:2", Exponential(2.0)),
        ("weibull:3:2", Weibull(3.0, 2.0)),
        ("cauchy:8", Cauchy(8.0)),
        ("fcauchy:2", FoldedCauchy(2.0)),
        ("pareto:1.2", Pareto(1.2)),
        ("invgamma:2:3", InverseGamma(2.0, 3.0)),
    ],
)
def test_parse(text, expected):
    assert parse_distribution(text) == expected


@pytest.mark.parametrize("text", ["gauss:1", "exp", "exp:a", "weibull:3", "exp:-1"])
def test_parse_rejects(text):
    with pytest.raises(ConfigError):
        parse_distribution(text)

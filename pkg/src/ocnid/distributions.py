"""Univariate laws used as OCNID marginals.

Every family exposes ``cdf``, ``sf``, ``quantile``, ``isf``, ``pdf`` and
``logpdf``.  All of them accept scalars or numpy arrays and treat ``-inf`` /
``+inf`` as ordinary arguments, since the bounding processes of the sampler
evaluate the cdf at the ends of the support.

Survival-side functions (``sf`` / ``isf``) are kept accurate in the upper
tail; the Gibbs kernel switches to them above the median so that truncated
draws far out in a heavy tail do not collapse to ``F = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Sequence

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError

__all__ = [
    "Support",
    "Distribution",
    "Exponential",
    "Weibull",
    "Cauchy",
    "FoldedCauchy",
    "Pareto",
    "InverseGamma",
    "reg_incomplete_gamma",
    "validate_family",
    "parse_distribution",
]


def _out(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


@dataclass(frozen=True)
class Support:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ConfigError(f"empty support ({self.lower}, {self.upper})")

    def __str__(self):
        return f"({self.lower:g}, {self.upper:g})"


POSITIVE = Support(0.0, math.inf)
REAL_LINE = Support(-math.inf, math.inf)


class Distribution:
    """Base class; subclasses implement the interior formulas ``_cdf`` etc.

    The public methods clamp to exact 0/1 outside the support and map the
    probabilities 0 and 1 onto the support endpoints.
    """

    family: ClassVar[str] = ""
    support: ClassVar[Support] = POSITIVE

    def _check_params(self, **params):
        for name, value in params.items():
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{self.family}: parameter {name} must be positive, got {value!r}")

    # interior formulas -------------------------------------------------
    def _cdf(self, x):
        raise NotImplementedError

    def _sf(self, x):
        raise NotImplementedError

    def _ppf(self, p):
        raise NotImplementedError

    def _isf(self, s):
        raise NotImplementedError

    def _logpdf(self, x):
        raise NotImplementedError

    # public surface ----------------------------------------------------
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support.lower, self.support.upper
        with np.errstate(all="ignore"):
            out = self._cdf(x)
        out = np.where(x <= lo, 0.0, np.where(x >= hi, 1.0, out))
        return _out(out)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support.lower, self.support.upper
        with np.errstate(all="ignore"):
            out = self._sf(x)
        out = np.where(x <= lo, 1.0, np.where(x >= hi, 0.0, out))
        return _out(out)

    def quantile(self, p):
        p = _check_probability(p)
        with np.errstate(all="ignore"):
            out = self._ppf(p)
        out = np.where(p <= 0.0, self.support.lower, np.where(p >= 1.0, self.support.upper, out))
        return _out(out)

    def isf(self, s):
        """Inverse of the survival function, ``x`` with ``sf(x) = s``."""
        s = _check_probability(s)
        with np.errstate(all="ignore"):
            out = self._isf(s)
        out = np.where(s <= 0.0, self.support.upper, np.where(s >= 1.0, self.support.lower, out))
        return _out(out)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.support.lower) & (x < self.support.upper)
        with np.errstate(all="ignore"):
            out = np.where(inside, self._logpdf(np.where(inside, x, self.median)), -np.inf)
        return _out(out)

    def pdf(self, x):
        return _out(np.exp(self.logpdf(x)))

    @cached_property
    def median(self) -> float:
        return float(self._ppf(np.float64(0.5)))

    @property
    def spec(self) -> str:
        """The textual form accepted by :func:`parse_distribution`."""
        raise NotImplementedError

    def __str__(self):
        return self.spec


def _check_probability(p):
    p = np.asarray(p, dtype=float)
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise DomainError("probability outside [0, 1]")
    return p


@dataclass(frozen=True)
class Exponential(Distribution):
    """``f(x) = rate * exp(-rate * x)`` on (0, inf)."""

    rate: float
    family: ClassVar[str] = "exp"

    def __post_init__(self):
        self._check_params(rate=self.rate)

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def _sf(self, x):
        return np.exp(-self.rate * x)

    def _ppf(self, p):
        return -np.log1p(-p) / self.rate

    def _isf(self, s):
        return -np.log(s) / self.rate

    def _logpdf(self, x):
        return math.log(self.rate) - self.rate * x

    @property
    def spec(self):
        return f"exp:{self.rate:g}"


@dataclass(frozen=True)
class Weibull(Distribution):
    """Weibull with shape ``k`` and inverse scale ``rate``:
    ``f(x) = k rate^k x^(k-1) exp(-(rate x)^k)``.
    """

    shape: float
    rate: float
    family: ClassVar[str] = "weibull"

    def __post_init__(self):
        self._check_params(shape=self.shape, rate=self.rate)

    def _cdf(self, x):
        return -np.expm1(-((self.rate * x) ** self.shape))

    def _sf(self, x):
        return np.exp(-((self.rate * x) ** self.shape))

    def _ppf(self, p):
        return (-np.log1p(-p)) ** (1.0 / self.shape) / self.rate

    def _isf(self, s):
        return (-np.log(s)) ** (1.0 / self.shape) / self.rate

    def _logpdf(self, x):
        k, r = self.shape, self.rate
        return math.log(k) + k * math.log(r) + (k - 1.0) * np.log(x) - (r * x) ** k

    @property
    def spec(self):
        return f"weibull:{self.shape:g}:{self.rate:g}"


@dataclass(frozen=True)
class Cauchy(Distribution):
    """Centred Cauchy on the whole line, ``f(x) = rate / (pi (1 + (rate x)^2))``."""

    rate: float
    family: ClassVar[str] = "cauchy"
    support: ClassVar[Support] = REAL_LINE

    def __post_init__(self):
        self._check_params(rate=self.rate)

    # arctan2(1, t) = pi/2 - arctan(t) without cancellation for large t
    def _cdf(self, x):
        return np.arctan2(1.0, -self.rate * x) / np.pi

    def _sf(self, x):
        return np.arctan2(1.0, self.rate * x) / np.pi

    def _ppf(self, p):
        return -1.0 / (self.rate * np.tan(np.pi * p))

    def _isf(self, s):
        return 1.0 / (self.rate * np.tan(np.pi * s))

    def _logpdf(self, x):
        return math.log(self.rate / math.pi) - np.log1p((self.rate * x) ** 2)

    @property
    def median(self):
        return 0.0

    @property
    def spec(self):
        return f"cauchy:{self.rate:g}"


@dataclass(frozen=True)
class FoldedCauchy(Distribution):
    """Cauchy folded onto (0, inf): ``cdf = (2/pi) arctan(rate x)``."""

    rate: float
    family: ClassVar[str] = "fcauchy"

    def __post_init__(self):
        self._check_params(rate=self.rate)

    def _cdf(self, x):
        return 2.0 * np.arctan(self.rate * x) / np.pi

    def _sf(self, x):
        return 2.0 * np.arctan2(1.0, self.rate * x) / np.pi

    def _ppf(self, p):
        return np.tan(0.5 * np.pi * p) / self.rate

    def _isf(self, s):
        return 1.0 / (self.rate * np.tan(0.5 * np.pi * s))

    def _logpdf(self, x):
        return math.log(2.0 * self.rate / math.pi) - np.log1p((self.rate * x) ** 2)

    @property
    def spec(self):
        return f"fcauchy:{self.rate:g}"


@dataclass(frozen=True)
class Pareto(Distribution):
    """Pareto (Lomax) with shape ``shape``: ``f(x) = shape / (1 + x)^(shape + 1)``."""

    shape: float
    family: ClassVar[str] = "pareto"

    def __post_init__(self):
        self._check_params(shape=self.shape)

    def _cdf(self, x):
        return -np.expm1(-self.shape * np.log1p(x))

    def _sf(self, x):
        return np.exp(-self.shape * np.log1p(x))

    def _ppf(self, p):
        return np.expm1(-np.log1p(-p) / self.shape)

    def _isf(self, s):
        return np.expm1(-np.log(s) / self.shape)

    def _logpdf(self, x):
        return math.log(self.shape) - (self.shape + 1.0) * np.log1p(x)

    @property
    def spec(self):
        return f"pareto:{self.shape:g}"


@dataclass(frozen=True)
class InverseGamma(Distribution):
    """Inverse gamma with shape ``shape`` and inverse scale ``rate``::

        f(x) = rate^shape x^-(shape+1) exp(-rate/x) / Gamma(shape)

    The sampling path uses scipy's incomplete gamma routines.  ``reference_cdf``
    and ``reference_quantile`` are an independent route built on
    :func:`reg_incomplete_gamma` and bracketed root finding.
    """

    shape: float
    rate: float
    family: ClassVar[str] = "invgamma"

    def __post_init__(self):
        self._check_params(shape=self.shape, rate=self.rate)

    def _cdf(self, x):
        return special.gammaincc(self.shape, self.rate / x)

    def _sf(self, x):
        return special.gammainc(self.shape, self.rate / x)

    def _ppf(self, p):
        return self.rate / special.gammainccinv(self.shape, p)

    def _isf(self, s):
        return self.rate / special.gammaincinv(self.shape, s)

    def _logpdf(self, x):
        a, b = self.shape, self.rate
        return a * math.log(b) - math.lgamma(a) - (a + 1.0) * np.log(x) - b / x

    def mean(self) -> float:
        return self.rate / (self.shape - 1.0) if self.shape > 1 else math.inf

    def reference_cdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        if math.isinf(x):
            return 1.0
        return float(reg_incomplete_gamma(self.shape, self.rate / x, upper=True))

    def reference_quantile(self, p: float, rtol: float = 1e-12) -> float:
        """Bracketed bisection on ``reference_cdf`` followed by Newton polishing."""
        if not 0.0 <= p <= 1.0:
            raise DomainError("probability outside [0, 1]")
        if p == 0.0:
            return 0.0
        if p == 1.0:
            return math.inf
        a, b = self.shape, self.rate
        lo, hi = b / (a + 1.0) * 1e-6, b * 1e6
        while self.reference_cdf(lo) > p:
            lo *= 1e-3
        while self.reference_cdf(hi) < p:
            hi *= 1e3
        while hi - lo > rtol * hi:
            mid = math.sqrt(lo * hi) if hi / lo > 4.0 else 0.5 * (lo + hi)
            if self.reference_cdf(mid) < p:
                lo = mid
            else:
                hi = mid
        x = 0.5 * (lo + hi)
        for _ in range(2):
            dens = float(self.pdf(x))
            if dens <= 0:
                break
            step = (self.reference_cdf(x) - p) / dens
            if abs(step) > (hi - lo) + rtol * x:
                break
            x -= step
        return x

    @property
    def spec(self):
        return f"invgamma:{self.shape:g}:{self.rate:g}"


# --------------------------------------------------------------------------
# regularized incomplete gamma
# --------------------------------------------------------------------------

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 100_000


def _gamma_series(a, x, log_pref):
    # P(a, x) by its power series, valid for x < a + 1
    ap, term = a, 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(log_pref)


def _gamma_contfrac(a, x, log_pref):
    # Q(a, x) by the Legendre continued fraction (modified Lentz)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(log_pref) * h


def _reg_gamma_scalar(a, x, upper):
    if a <= 0 or math.isnan(a):
        raise DomainError(f"incomplete gamma needs a > 0, got {a!r}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"incomplete gamma needs x >= 0, got {x!r}")
    if x == 0.0:
        return 1.0 if upper else 0.0
    if math.isinf(x):
        return 0.0 if upper else 1.0
    log_pref = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        p = _gamma_series(a, x, log_pref)
        return 1.0 - p if upper else p
    q = _gamma_contfrac(a, x, log_pref)
    return q if upper else 1.0 - q


def reg_incomplete_gamma(a, x, upper=False):
    """Regularized lower incomplete gamma ``P(a, x)`` (or ``Q = 1 - P`` with ``upper``).

    Series for ``x < a + 1``, continued fraction otherwise.  Broadcasts over
    array arguments.
    """
    a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    out = np.empty(a_arr.shape)
    for idx in np.ndindex(a_arr.shape):
        out[idx] = _reg_gamma_scalar(float(a_arr[idx]), float(x_arr[idx]), upper)
    return _out(out)


# --------------------------------------------------------------------------
# families and parsing
# --------------------------------------------------------------------------


def validate_family(dists: Sequence[Distribution]) -> None:
    """Raise :class:`ConfigError` unless every distribution has the same support."""
    if len(dists) == 0:
        raise ConfigError("need at least one distribution")
    ref = dists[0].support
    for i, dist in enumerate(dists):
        if dist.support != ref:
            raise ConfigError(
                f"distribution {i} ({dist.spec}) has support {dist.support}, "
                f"expected {ref} as for distribution 0"
            )


_GRAMMAR = {
    "exp": (Exponential, 1),
    "weibull": (Weibull, 2),
    "cauchy": (Cauchy, 1),
    "fcauchy": (FoldedCauchy, 1),
    "pareto": (Pareto, 1),
    "invgamma": (InverseGamma, 2),
}


def parse_distribution(text: str) -> Distribution:
    """Parse ``family:p1[:p2]``, e.g. ``exp:2`` or ``weibull:3:8``."""
    name, *raw = text.strip().split(":")
    if name not in _GRAMMAR:
        raise ConfigError(f"unknown distribution family {name!r} in {text!r}")
    cls, nparams = _GRAMMAR[name]
    if len(raw) != nparams:
        raise ConfigError(f"{name} takes {nparams} parameter(s), got {len(raw)} in {text!r}")
    try:
        params = [float(r) for r in raw]
    except ValueError:
        raise ConfigError(f"non-numeric parameter in {text!r}") from None
    return cls(*params)

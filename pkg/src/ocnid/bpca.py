"""Bayesian PCA dimensionality selection on top of the OCNID sampler.

For a fixed latent dimension ``q`` and eigenvectors pinned to those of the
sample covariance, the posterior over ``(lambda_1 > ... > lambda_q > sigma2)``
is a product of inverse-gamma marginals restricted to that ordering, i.e.
OCNID order statistics.  We draw from it with the CFTP engine, take the
sample argmax of the posterior as the MAP, and score each ``q`` by the
maximized log-likelihood, a BIC-style evidence and a Laplace evidence.

Sampler orientation: the engine works with ascending vectors, so a
parameter vector is fed as ``(sigma2, lambda_q, ..., lambda_1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .cftp import DEFAULT_MAX_N, UniformStore, draw_batch, perfect_draw
from .distributions import InverseGamma
from .errors import DataError, DegenerateEvidenceError, DomainError

__all__ = [
    "PRESETS",
    "EigenData",
    "BpcaModel",
    "ThetaQ",
    "ThetaSamples",
    "jacobi_eigenvalues",
    "covariance_eigs",
    "simulate",
    "posterior_marginals",
    "sample_theta",
    "sample_thetas",
    "log_likelihood",
    "log_posterior_terms",
    "log_posterior",
    "map_estimate",
    "bic_evidence",
    "laplace_evidence",
    "ScanRow",
    "model_scan",
]

PRESETS = {
    "paper8": (10.0, 8.0, 6.0, 4.0, 2.0, 0.5, 0.5, 0.5),
    "paper10": (10.0, 8.0, 6.0, 4.0, 2.0, 0.5, 0.5, 0.5, 0.5, 0.5),
}


# --------------------------------------------------------------------------
# data and eigenvalues
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenData:
    g: np.ndarray  # descending eigenvalues of the sample covariance
    N: int

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "g", g)
        if g.ndim != 1 or g.size < 2:
            raise DataError("need at least two eigenvalues")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise DataError("eigenvalues must be finite and nonnegative")
        if np.any(np.diff(g) > 0):
            raise DataError("eigenvalues must be in descending order")
        if self.N < 2:
            raise DataError("need N >= 2 observations")

    @property
    def d(self) -> int:
        return self.g.size


def jacobi_eigenvalues(S, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.

    Sweeps stop once the off-diagonal Frobenius norm is at most
    ``tol * ||S||_F``.
    """
    a = np.array(S, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise DataError("matrix must be square and symmetric")
    scale = np.linalg.norm(a)
    if scale == 0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                h = a[q, q] - a[p, p]
                if abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    # negligible next to both diagonal entries
                    a[p, q] = a[q, p] = 0.0
                    continue
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))[::-1]


def covariance_eigs(data) -> EigenData:
    """Descending eigenvalues of ``S = (1/N) sum (y_n - ybar)(y_n - ybar)^T``."""
    y = np.asarray(data, dtype=float)
    if y.ndim != 2:
        raise DataError("data must be an N x d matrix")
    N, d = y.shape
    if N < 2 or d < 2:
        raise DataError(f"need N >= 2 and d >= 2, got {N} x {d}")
    bad = np.argwhere(~np.isfinite(y))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"non-finite entry at row {r}, column {c}")
    centred = y - y.mean(axis=0)
    S = centred.T @ centred / N
    g = jacobi_eigenvalues(0.5 * (S + S.T))
    # rank-deficient data: round-off below zero is reported as zero
    return EigenData(g=np.maximum(g, 0.0), N=N)


def simulate(variances: Sequence[float], N: int, seed: int) -> np.ndarray:
    """Zero-mean Gaussian data with a diagonal covariance."""
    rng = np.random.default_rng(seed)
    sd = np.sqrt(np.asarray(variances, dtype=float))
    return rng.standard_normal((N, sd.size)) * sd


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BpcaModel:
    eig: EigenData
    q: int
    alpha: float = 2.0
    beta: float = 3.0

    def __post_init__(self):
        if not 1 <= self.q <= self.eig.d - 1:
            raise DomainError(f"q must lie in [1, {self.eig.d - 1}], got {self.q}")
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError("alpha and beta must be positive")

    @property
    def N(self) -> int:
        return self.eig.N

    @property
    def d(self) -> int:
        return self.eig.d

    @property
    def tail_sum(self) -> float:
        """``c(q)``: sum of the eigenvalues beyond the first ``q``."""
        return float(np.sum(self.eig.g[self.q :]))

    @property
    def k(self) -> int:
        """Free parameters of a d x q orthonormal frame, ``dq - q(q+1)/2``."""
        return self.d * self.q - self.q * (self.q + 1) // 2


@dataclass(frozen=True)
class ThetaQ:
    lam: np.ndarray  # descending, length q
    sigma2: float

    @classmethod
    def from_ascending(cls, x) -> "ThetaQ":
        x = np.asarray(x, dtype=float)
        return cls(lam=x[:0:-1].copy(), sigma2=float(x[0]))

    def is_ordered(self) -> bool:
        return bool(np.all(np.diff(self.lam) < 0) and self.lam[-1] > self.sigma2 > 0)


@dataclass
class ThetaSamples:
    lam: np.ndarray  # (count, q), each row descending
    sigma2: np.ndarray  # (count,)
    bct: np.ndarray

    def __len__(self):
        return self.sigma2.size

    def __getitem__(self, j) -> ThetaQ:
        return ThetaQ(lam=self.lam[j].copy(), sigma2=float(self.sigma2[j]))


def posterior_marginals(model: BpcaModel) -> list[InverseGamma]:
    """Inverse-gamma marginals in sampler order ``(sigma2, lambda_q, ..., lambda_1)``."""
    N, a, b = model.N, model.alpha, model.beta
    noise = InverseGamma(N * (model.d - model.q) / 2.0 + a, N * model.tail_sum / 2.0 + b)
    signal = [InverseGamma(N / 2.0 + a, N * gi / 2.0 + b) for gi in model.eig.g[: model.q]]
    return [noise] + signal[::-1]


def sample_theta(model: BpcaModel, eps: float, store: UniformStore, max_n: int = DEFAULT_MAX_N):
    """One epsilon-perfect posterior draw; returns ``(ThetaQ, bct)``."""
    draw = perfect_draw(posterior_marginals(model), eps, store, max_n=max_n)
    return ThetaQ.from_ascending(draw.values), draw.bct


def sample_thetas(
    model: BpcaModel,
    eps: float,
    count: int,
    seed: int,
    max_n: int = DEFAULT_MAX_N,
    threads: int = 1,
) -> ThetaSamples:
    """``count`` independent draws, on sub-streams keyed by ``q``."""
    batch = draw_batch(
        posterior_marginals(model), eps, count, seed, max_n=max_n, threads=threads, key=(model.q,)
    )
    x = batch.values
    return ThetaSamples(lam=x[:, :0:-1].copy(), sigma2=x[:, 0].copy(), bct=batch.bct)


# --------------------------------------------------------------------------
# likelihood, posterior, MAP
# --------------------------------------------------------------------------


def _as_arrays(theta):
    # ThetaQ or ThetaSamples -> (rows, q) and (rows,)
    return np.atleast_2d(theta.lam), np.atleast_1d(theta.sigma2)


def _ordered_rows(lam, sigma2):
    ok = lam[:, -1] > sigma2
    ok &= sigma2 > 0
    if lam.shape[1] > 1:
        ok &= np.all(np.diff(lam, axis=1) < 0, axis=1)
    return ok


def log_likelihood(model: BpcaModel, theta):
    """Log of the profile likelihood with eigenvectors fixed at the sample ones."""
    lam, s2 = _as_arrays(theta)
    N, d, q = model.N, model.d, model.q
    g = model.eig.g[:q]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            -0.5 * N * np.sum(np.log(lam), axis=1)
            - 0.5 * N * (d - q) * np.log(s2)
            - 0.5 * N * np.sum(g / lam, axis=1)
            - 0.5 * N * model.tail_sum / s2
        )
    return out[0] if isinstance(theta, ThetaQ) else out


def log_posterior_terms(model: BpcaModel, theta) -> dict:
    """Additive pieces of the unnormalized log posterior for fixed ``q``."""
    lam, s2 = _as_arrays(theta)
    prior = InverseGamma(model.alpha, model.beta)
    terms = {
        "likelihood": np.atleast_1d(log_likelihood(model, ThetaSamples(lam, s2, None))),
        "prior_lambda": np.sum(prior.logpdf(lam), axis=1),
        "prior_sigma2": np.atleast_1d(prior.logpdf(s2)),
        "ordering": np.full(s2.shape, math.lgamma(model.q + 2)),
        "prior_q": np.full(s2.shape, -math.log(model.d - 1)),
    }
    if isinstance(theta, ThetaQ):
        return {k: float(v[0]) for k, v in terms.items()}
    return terms


def log_posterior(model: BpcaModel, theta):
    """Unnormalized log posterior; ``-inf`` when the ordering is violated."""
    lam, s2 = _as_arrays(theta)
    terms = log_posterior_terms(model, ThetaSamples(lam, s2, None))
    total = sum(terms.values())
    total = np.where(_ordered_rows(lam, s2), total, -np.inf)
    return float(total[0]) if isinstance(theta, ThetaQ) else total


def map_estimate(draws, model: BpcaModel) -> ThetaQ:
    """The draw with the largest log posterior (first one on ties)."""
    if isinstance(draws, ThetaSamples):
        samples = draws
    else:
        draws = list(draws)
        if not draws:
            raise DomainError("no draws to maximize over")
        samples = ThetaSamples(
            lam=np.stack([np.asarray(t.lam, dtype=float) for t in draws]),
            sigma2=np.array([t.sigma2 for t in draws], dtype=float),
            bct=None,
        )
    if len(samples) == 0:
        raise DomainError("no draws to maximize over")
    scores = log_posterior(model, samples)
    return samples[int(np.argmax(scores))]


# --------------------------------------------------------------------------
# evidence
# --------------------------------------------------------------------------


def bic_evidence(model: BpcaModel, theta: ThetaQ) -> float:
    """Log BIC evidence ``-(N/2) sum log lam - N(d-q)/2 log s2 - (k + q/2) log N``."""
    N, d, q = model.N, model.d, model.q
    return float(
        -0.5 * N * np.sum(np.log(theta.lam))
        - 0.5 * N * (d - q) * math.log(theta.sigma2)
        - (model.k + 0.5 * q) * math.log(N)
    )


def laplace_log_det(model: BpcaModel, theta: ThetaQ) -> float:
    """``log |A|`` with the noise-subspace eigenvalues all set to ``sigma2``."""
    d, q = model.d, model.q
    hat = np.concatenate([theta.lam, np.full(d - q, theta.sigma2)])
    tilde = hat  # the noise block is already constant, so its average is sigma2
    total = model.k * math.log(model.N)
    for i in range(q):
        for j in range(i + 1, d):
            factor = (1.0 / tilde[j] - 1.0 / tilde[i]) * (hat[i] - hat[j])
            if not factor > 0:
                raise DegenerateEvidenceError(f"eigenvalue estimates {i + 1} and {j + 1} coincide")
            total += math.log(factor)
    return total


def laplace_evidence(model: BpcaModel, theta: ThetaQ, variant: str = "literal") -> float:
    """Log Laplace evidence.

    ``variant="literal"`` raises ``sigma2`` to the power ``N(d-q)``;
    ``"corrected"`` uses ``-N(d-q)/2``, the exponent of the usual form.
    """
    N, d, q, k = model.N, model.d, model.q, model.k
    if variant == "literal":
        expo = N * (d - q)
    elif variant == "corrected":
        expo = -0.5 * N * (d - q)
    else:
        raise DomainError(f"unknown Laplace variant {variant!r}")
    return float(
        0.5 * (k - q) * math.log(2.0)
        + expo * math.log(theta.sigma2)
        - 0.5 * q * math.log(N)
        - 0.5 * laplace_log_det(model, theta)
        + sum(math.lgamma((d - i) / 2.0) for i in range(1, q + 1))
    )


# --------------------------------------------------------------------------
# scan over q
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    q: int
    mean_bct: float
    max_bct: int
    max_loglik: float
    bic: float
    laplace: float
    laplace_corrected: float
    theta: ThetaQ

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "mean_bct": self.mean_bct,
            "max_bct": self.max_bct,
            "max_loglik": self.max_loglik,
            "bic": self.bic,
            "laplace": self.laplace,
            "laplace_corrected": self.laplace_corrected,
            "sigma2": self.theta.sigma2,
            "lambda": [float(v) for v in self.theta.lam],
        }


def model_scan(
    eig: EigenData,
    alpha: float = 2.0,
    beta: float = 3.0,
    eps: float = 1e-4,
    draws_per_q: int = 10_000,
    seed: int = 1,
    qs: Optional[Iterable[int]] = None,
    max_n: int = DEFAULT_MAX_N,
    threads: int = 1,
) -> list[ScanRow]:
    """Sample, take the MAP and score every candidate ``q``."""
    rows = []
    for q in qs if qs is not None else range(1, eig.d):
        model = BpcaModel(eig, q, alpha, beta)
        draws = sample_thetas(model, eps, draws_per_q, seed, max_n=max_n, threads=threads)
        theta = map_estimate(draws, model)
        rows.append(
            ScanRow(
                q=q,
                mean_bct=float(draws.bct.mean()),
                max_bct=int(draws.bct.max()),
                max_loglik=float(log_likelihood(model, theta)),
                bic=bic_evidence(model, theta),
                laplace=laplace_evidence(model, theta, "literal"),
                laplace_corrected=laplace_evidence(model, theta, "corrected"),
                theta=theta,
            )
        )
    return rows


def best_q(rows: Sequence[ScanRow], column: str) -> int:
    return max(rows, key=lambda r: getattr(r, column)).q

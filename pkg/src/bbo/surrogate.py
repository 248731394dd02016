"""Gaussian-process regression on the warped cube and expected improvement.

Isotropic Matérn-5/2 kernel, standardized targets, minimization convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist, pdist
from scipy.stats import norm

from .errors import DataError, NumericalError, ShapeError

SQRT5 = math.sqrt(5.0)
MAX_JITTER = 1e-2
LENGTHSCALE_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class GpConfig:
    """Kernel and fitting options.

    ``lengthscale=None`` selects the median pairwise-distance heuristic;
    ``optimize_lengthscale`` then picks the best multiple of it from
    ``LENGTHSCALE_GRID`` by log marginal likelihood.
    """

    lengthscale: float | None = None
    signal_variance: float = 1.0
    noise_jitter: float = 1e-6
    standardize_targets: bool = True
    optimize_lengthscale: bool = False

    def __post_init__(self):
        for name in ("signal_variance", "noise_jitter"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.lengthscale is not None and not self.lengthscale > 0:
            raise ValueError("lengthscale must be strictly positive")


def matern52(r, lengthscale: float, signal_variance: float):
    s = SQRT5 * np.asarray(r) / lengthscale
    return signal_variance * (1.0 + s + s * s / 3.0) * np.exp(-s)


def median_heuristic(X: np.ndarray) -> float:
    """Median pairwise Euclidean distance, with a fallback for degenerate sets.

    The fallback ``sqrt(d / 6)`` is the expected distance scale between
    uniform points in the unit cube.
    """
    if len(X) >= 2:
        d = pdist(X)
        d = d[d > 1e-12]
        if d.size:
            return float(np.median(d))
    return math.sqrt(X.shape[1] / 6.0)


@dataclass(frozen=True)
class GpModel:
    inputs: np.ndarray
    targets: np.ndarray
    factor: np.ndarray
    alpha: np.ndarray
    target_mean: float
    target_std: float
    lengthscale: float
    signal_variance: float
    jitter: float

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def kernel(self, A, B) -> np.ndarray:
        return matern52(cdist(A, B), self.lengthscale, self.signal_variance)

    def predict(self, X):
        """Posterior mean and standard deviation in the original target units.

        Accepts a single point of shape ``(d,)`` (returns floats) or a batch
        ``(n, d)`` (returns arrays).
        """
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ShapeError(f"query dimension {X.shape[-1]} does not match model dimension {self.dim}")
        Ks = self.kernel(X, self.inputs)
        mu = Ks @ self.alpha
        v = solve_triangular(self.factor, Ks.T, lower=True)
        var = self.signal_variance - np.sum(v * v, axis=0)
        sigma = np.sqrt(np.maximum(var, 0.0))
        mu = self.target_mean + self.target_std * mu
        sigma = self.target_std * sigma
        if single:
            return float(mu[0]), float(sigma[0])
        return mu, sigma


def _factorize(K: np.ndarray, jitter: float):
    n = K.shape[0]
    while True:
        try:
            L = cholesky(K + jitter * np.eye(n), lower=True, check_finite=False)
            if np.all(np.isfinite(L)):
                return L, jitter
        except np.linalg.LinAlgError:
            pass
        jitter *= 10.0
        if jitter > MAX_JITTER * (1 + 1e-9):
            raise NumericalError("Cholesky factorization failed after jitter escalation")


def _log_marginal_likelihood(L: np.ndarray, alpha: np.ndarray, y: np.ndarray) -> float:
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * len(y) * math.log(2 * math.pi))


def gp_fit(X, y, cfg: GpConfig | None = None) -> GpModel:
    cfg = cfg or GpConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ShapeError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
    if X.shape[0] < 1:
        raise ShapeError("gp_fit needs at least one observation")
    if not np.all(np.isfinite(y)):
        raise DataError("targets must be finite")
    if not np.all(np.isfinite(X)):
        raise DataError("inputs must be finite")
    if cfg.standardize_targets:
        mean = float(np.mean(y))
        std = max(float(np.std(y)), 1e-12)
    else:
        mean, std = 0.0, 1.0
    z = (y - mean) / std

    base = cfg.lengthscale if cfg.lengthscale is not None else median_heuristic(X)
    if cfg.lengthscale is None and cfg.optimize_lengthscale:
        candidates = [base * m for m in LENGTHSCALE_GRID]
    else:
        candidates = [base]
    D = cdist(X, X)
    best = None
    for ls in candidates:
        K = matern52(D, ls, cfg.signal_variance)
        L, jitter = _factorize(K, cfg.noise_jitter)
        alpha = cho_solve((L, True), z, check_finite=False)
        lml = _log_marginal_likelihood(L, alpha, z) if len(candidates) > 1 else 0.0
        if best is None or lml > best[0]:
            best = (lml, ls, L, alpha, jitter)
    _, ls, L, alpha, jitter = best
    return GpModel(
        inputs=X,
        targets=z,
        factor=L,
        alpha=alpha,
        target_mean=mean,
        target_std=std,
        lengthscale=float(ls),
        signal_variance=cfg.signal_variance,
        jitter=jitter,
    )


def gp_predict(m: GpModel, x):
    return m.predict(x)


def expected_improvement(mu, sigma, f_best):
    """Closed-form EI for minimization; works on scalars or arrays."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma)) and math.isfinite(float(f_best))):
        raise DataError("expected_improvement needs finite inputs")
    if np.any(sigma < 0):
        raise DataError("sigma must be non-negative")
    diff = f_best - mu
    # tiny sigma gives huge |z|; the pdf underflows to 0, which is correct
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = np.where(sigma > 0, diff / np.where(sigma > 0, sigma, 1.0), 0.0)
        ei = np.where(sigma > 0, diff * norm.cdf(z) + sigma * norm.pdf(z), np.maximum(diff, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


__all__ = [
    "GpConfig",
    "GpModel",
    "gp_fit",
    "gp_predict",
    "expected_improvement",
    "matern52",
    "median_heuristic",
]

"""Candidate generation and constant-liar EI batch selection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from ..surrogate import GpConfig, expected_improvement, gp_fit


def sobol_unit(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Scrambled Sobol points in ``[0, 1]^d``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return qmc.Sobol(d, scramble=True, seed=rng).random(n)


def dedupe_rows(A: np.ndarray) -> np.ndarray:
    """Drop repeated rows, keeping the first occurrence order."""
    _, idx = np.unique(A, axis=0, return_index=True)
    return A[np.sort(idx)]


@dataclass
class SelectionLog:
    """What one constant-liar pick saw, kept so the choice can be audited."""

    candidates: np.ndarray
    X: np.ndarray
    y: np.ndarray
    f_best: float
    chosen: int


def select_batch_ei(X, y, candidates, n, cfg: GpConfig, log: list | None = None) -> np.ndarray:
    """Pick ``n`` rows of ``candidates`` by repeated EI maximization.

    After each pick the chosen row is added to the training set with the
    current best score as a fake target, so later picks move elsewhere.
    Each row is used at most once; if candidates run out the remaining
    picks reuse the full set.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    f_best = float(np.min(y))
    chosen_rows = []
    available = np.ones(len(candidates), dtype=bool)
    for _ in range(n):
        if not available.any():
            available[:] = True
        model = gp_fit(X, y, cfg)
        pool = candidates[available]
        mu, sigma = model.predict(pool)
        ei = expected_improvement(mu, sigma, f_best)
        j = int(np.argmax(ei))
        if log is not None:
            log.append(SelectionLog(pool.copy(), X.copy(), y.copy(), f_best, j))
        row = pool[j]
        chosen_rows.append(row)
        available[np.flatnonzero(available)[j]] = False
        X = np.vstack([X, row])
        y = np.append(y, f_best)
    return np.vstack(chosen_rows)

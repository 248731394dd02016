"""Tree-structured Parzen estimator, independent per parameter."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, StateError
from ..seeding import spawn_seed
from ..space import SearchSpace
from .base import ObservationHistory, Optimizer

MIN_BANDWIDTH = 1e-3
MAX_BANDWIDTH = 1.0
BAD_DENSITY_FLOOR = 1e-12
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def tpe_split(history: ObservationHistory, gamma: float = 0.25):
    """Split finite records into the best ``ceil(gamma * n)`` (at least one)
    and the rest, both ordered by score then insertion."""
    if not 0 < gamma < 1:
        raise ConfigError("gamma must lie in (0, 1)")
    recs = history.finite_records()
    if not recs:
        raise StateError("tpe_split needs at least one finite observation")
    recs.sort(key=lambda r: (r[2], r[0]))
    # round() guards against products like 0.1 * 30 = 3.0000000000000004
    n_good = max(1, math.ceil(round(gamma * len(recs), 9)))
    good = [(p, s) for _, p, s in recs[:n_good]]
    bad = [(p, s) for _, p, s in recs[n_good:]]
    return good, bad


def scott_bandwidth(x: np.ndarray) -> float:
    if len(x) < 2:
        return MIN_BANDWIDTH
    h = float(np.std(x)) * len(x) ** (-1.0 / 5.0)
    return min(max(h, MIN_BANDWIDTH), MAX_BANDWIDTH)


def _log_kde(x: np.ndarray, centers: np.ndarray, h: float) -> np.ndarray:
    z = (x[:, None] - centers[None, :]) / h
    log_k = -0.5 * z * z - _LOG_SQRT_2PI - math.log(h)
    m = log_k.max(axis=1, keepdims=True)
    return (m + np.log(np.mean(np.exp(log_k - m), axis=1, keepdims=True)))[:, 0]


def _smoothed_frequencies(idx: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(idx, minlength=k).astype(float)
    return (counts + 1.0) / (counts.sum() + k)


def tpe_propose(space: SearchSpace, good, bad, n_candidates: int = 24, seed=None) -> dict:
    """Sample candidates from the good-set density and return the one with
    the highest good/bad density ratio."""
    if not good:
        raise StateError("tpe_propose needs a non-empty good set")
    rng = np.random.default_rng(seed)
    Xg = space.warp_many([p for p, _ in good])
    Xb = space.warp_many([p for p, _ in bad])
    C = np.zeros((n_candidates, space.warped_dim))
    log_l = np.zeros(n_candidates)
    log_g = np.zeros(n_candidates)
    for s, sl in space.blocks():
        if s.kind == "categorical":
            k = s.width
            pg = _smoothed_frequencies(np.argmax(Xg[:, sl], axis=1), k)
            choice = rng.choice(k, size=n_candidates, p=pg)
            C[np.arange(n_candidates), sl.start + choice] = 1.0
            log_l += np.log(pg[choice])
            if len(Xb):
                pb = _smoothed_frequencies(np.argmax(Xb[:, sl], axis=1), k)
                log_g += np.log(pb[choice])
        else:
            j = sl.start
            hg = scott_bandwidth(Xg[:, j])
            comp = rng.integers(0, len(Xg), size=n_candidates)
            x = np.clip(Xg[comp, j] + hg * rng.standard_normal(n_candidates), 0.0, 1.0)
            C[:, j] = x
            log_l += _log_kde(x, Xg[:, j], hg)
            if len(Xb):
                log_g += _log_kde(x, Xb[:, j], scott_bandwidth(Xb[:, j]))
    if len(Xb):
        log_g = np.maximum(log_g, math.log(BAD_DENSITY_FLOOR))
    else:
        log_g = np.full(n_candidates, math.log(BAD_DENSITY_FLOOR))
    best = int(np.argmax(log_l - log_g))
    return space.unwarp(C[best])


class TPE(Optimizer):
    name = "tpe"
    defaults = {"gamma": 0.25, "n_candidates": 24}

    def _validate_hyperparams(self):
        if not 0 < float(self.hyperparams["gamma"]) < 1:
            raise ConfigError("tpe: gamma must lie in (0, 1)")
        if int(self.hyperparams["n_candidates"]) < 1:
            raise ConfigError("tpe: n_candidates must be >= 1")

    def _suggest(self, n):
        good, bad = tpe_split(self.history, float(self.hyperparams["gamma"]))
        k = int(self.hyperparams["n_candidates"])
        return [tpe_propose(self.space, good, bad, k, spawn_seed(self.rng)) for _ in range(n)]

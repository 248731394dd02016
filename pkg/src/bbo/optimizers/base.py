"""The suggest/observe optimizer contract."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from ..errors import ConfigError, ShapeError
from ..space import SearchSpace, latin_hypercube_unit


class ObservationHistory:
    """Append-only record of ``(params, visible score)`` pairs.

    Non-finite scores are kept but never become the best record and are
    excluded from :meth:`finite_arrays`.
    """

    def __init__(self, space: SearchSpace):
        self.space = space
        self.records: list[tuple[dict, float]] = []
        self.best_score = math.inf
        self.best_params: dict | None = None
        self._warped: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.records)

    def append(self, params: Mapping, score: float) -> None:
        params = dict(params)
        u = self.space.warp(params)
        score = float(score)
        self.records.append((params, score))
        self._warped.append(u)
        # strict < keeps the earliest record on ties
        if math.isfinite(score) and score < self.best_score:
            self.best_score = score
            self.best_params = params

    @property
    def n_finite(self) -> int:
        return sum(1 for _, s in self.records if math.isfinite(s))

    def finite_arrays(self, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Warped inputs and scores of finite records from index ``start`` on."""
        idx = [i for i in range(start, len(self.records)) if math.isfinite(self.records[i][1])]
        if not idx:
            return np.zeros((0, self.space.warped_dim)), np.zeros(0)
        X = np.vstack([self._warped[i] for i in idx])
        y = np.array([self.records[i][1] for i in idx])
        return X, y

    def finite_records(self) -> list[tuple[int, dict, float]]:
        return [(i, p, s) for i, (p, s) in enumerate(self.records) if math.isfinite(s)]


class Optimizer:
    """Base class: batch ``suggest`` then ``observe`` of the scored batch.

    Subclasses implement :meth:`_suggest` returning warped rows or native
    points. Instances are not thread-safe; callers must not overlap
    ``suggest`` and ``observe`` on one instance.
    """

    name = "base"
    defaults: dict = {}
    uses_warmup = True

    def __init__(self, space: SearchSpace, seed: int = 0, **hyperparams):
        unknown = set(hyperparams) - set(self.defaults)
        if unknown:
            raise ConfigError(f"{self.name}: unknown hyperparameters {sorted(unknown)}")
        self.space = space
        self.seed = seed
        self.hyperparams = {**self.defaults, **hyperparams}
        self.rng = np.random.default_rng(seed)
        self.history = ObservationHistory(space)
        self.deadline: float | None = None
        self.init_points = min(2 * space.warped_dim, 8)
        self._validate_hyperparams()

    def _validate_hyperparams(self) -> None:
        pass

    @property
    def in_warmup(self) -> bool:
        return self.uses_warmup and self.history.n_finite < self.init_points

    def suggest(self, n: int) -> list[dict]:
        if n < 0:
            raise ValueError("n must be >= 0")
        if n == 0:
            return []
        if self.in_warmup:
            out = latin_hypercube_unit(self.space, n, self.rng)
        else:
            out = self._suggest(n)
        if isinstance(out, np.ndarray):
            return self.space.unwarp_many(out)
        return [dict(p) for p in out]

    def _suggest(self, n: int):
        raise NotImplementedError

    def observe(self, params: Sequence[Mapping], scores: Sequence[float]) -> None:
        params = list(params)
        scores = [float(s) for s in scores]
        if len(params) != len(scores):
            raise ShapeError(f"observe got {len(params)} params but {len(scores)} scores")
        start = len(self.history)
        for p, s in zip(params, scores):
            self.history.append(p, s)
        if params:
            self._after_observe(start)

    def _after_observe(self, start: int) -> None:
        """Hook run after a non-empty batch lands at ``history[start:]``."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.seed}, n_obs={len(self.history)})"

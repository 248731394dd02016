"""Annealed Gaussian perturbation of the incumbent."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..seeding import spawn_seed
from ..space import SearchSpace
from .base import Optimizer


def schedule(iter_id: int, T0: float = 0.25, alpha: float = 0.85) -> float:
    return T0 * alpha**iter_id


def anneal_propose(space: SearchSpace, incumbent, iter_id: int, T0: float = 0.25, alpha: float = 0.85, seed=None) -> dict:
    """Perturb ``incumbent`` with per-coordinate stddev ``T0 * alpha**iter_id``.

    Categorical parameters are redrawn uniformly with probability equal to
    the same schedule value (capped at 1).
    """
    rng = np.random.default_rng(seed)
    temp = schedule(iter_id, T0, alpha)
    u = space.warp(incumbent)
    for s, sl in space.blocks():
        if s.kind == "categorical":
            if rng.random() < min(temp, 1.0):
                u[sl] = 0.0
                u[sl.start + rng.integers(s.width)] = 1.0
        else:
            u[sl] = np.clip(u[sl] + temp * rng.standard_normal(), 0.0, 1.0)
    return space.unwarp(u)


class Annealing(Optimizer):
    name = "anneal"
    defaults = {"T0": 0.25, "alpha": 0.85}

    def _validate_hyperparams(self):
        if not float(self.hyperparams["T0"]) > 0:
            raise ConfigError("anneal: T0 must be > 0")
        if not 0 < float(self.hyperparams["alpha"]) <= 1:
            raise ConfigError("anneal: alpha must lie in (0, 1]")
        self.iter_id = 0

    def _suggest(self, n):
        T0, alpha = float(self.hyperparams["T0"]), float(self.hyperparams["alpha"])
        inc = self.history.best_params
        out = [anneal_propose(self.space, inc, self.iter_id, T0, alpha, spawn_seed(self.rng)) for _ in range(n)]
        self.iter_id += 1
        return out

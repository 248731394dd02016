"""Differential evolution (rand/1/bin) over the elite of the history."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, StateError
from ..seeding import spawn_seed
from ..space import SearchSpace
from .base import Optimizer


def de_step(space: SearchSpace, population, F: float = 0.8, CR: float = 0.9, n: int = 1, seed=None) -> list[dict]:
    """Generate ``n`` trial points from ``population`` (``(params, score)`` pairs).

    Trial ``t`` crosses a mutant ``a + F (b - c)`` with population member
    ``t mod len(population)``. Crossover acts per parameter, so a one-hot
    block is inherited as a unit; at least one parameter comes from the
    mutant.
    """
    if len(population) < 4:
        raise StateError(f"de_step needs a population of at least 4, got {len(population)}")
    rng = np.random.default_rng(seed)
    P = space.warp_many([p for p, _ in population])
    m = len(P)
    blocks = [sl for _, sl in space.blocks()]
    trials = np.empty((n, space.warped_dim))
    for t in range(n):
        i = t % m
        others = np.delete(np.arange(m), i)
        a, b, c = rng.choice(others, size=3, replace=False)
        mutant = np.clip(P[a] + F * (P[b] - P[c]), 0.0, 1.0)
        take = rng.random(len(blocks)) < CR
        take[rng.integers(len(blocks))] = True
        trial = P[i].copy()
        for use, sl in zip(take, blocks):
            if use:
                trial[sl] = mutant[sl]
        trials[t] = trial
    return space.unwarp_many(trials)


class DifferentialEvolution(Optimizer):
    name = "de"
    defaults = {"F": 0.8, "CR": 0.9, "pop_size": 16}

    def _validate_hyperparams(self):
        hp = self.hyperparams
        if not 0 <= float(hp["F"]) < 2:
            raise ConfigError("de: F must lie in [0, 2)")
        if not 0 <= float(hp["CR"]) <= 1:
            raise ConfigError("de: CR must lie in [0, 1]")
        if int(hp["pop_size"]) < 4:
            raise ConfigError("de: pop_size must be >= 4")
        self.init_points = max(self.init_points, 4)

    def _suggest(self, n):
        recs = self.history.finite_records()
        recs.sort(key=lambda r: (r[2], r[0]))
        pop = [(p, s) for _, p, s in recs[: int(self.hyperparams["pop_size"])]]
        hp = self.hyperparams
        return de_step(self.space, pop, float(hp["F"]), float(hp["CR"]), n, spawn_seed(self.rng))

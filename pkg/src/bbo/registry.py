"""Optimizer construction by name: ``"tpe"``, ``"turbo+gpei"``, or an external adapter."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .ensemble import EnsembleOptimizer
from .errors import ConfigError
from .optimizers import OPTIMIZERS
from .seeding import derive_seed
from .space import SearchSpace


def parse_name(name: str) -> list[str]:
    parts = [p.strip() for p in name.split("+")]
    if not name or any(not p for p in parts):
        raise ConfigError(f"malformed optimizer name {name!r}")
    return parts


def constituent_seed(seed: int, index: int) -> int:
    return derive_seed(seed, "constituent", index)


@dataclass(frozen=True)
class OptimizerSpec:
    """Name, hyperparameter overrides and seed of one optimizer.

    ``hyperparams`` maps base optimizer names to override dicts so that a
    pair like ``"tpe+de"`` picks up both entries. ``external`` maps extra
    names to child-process commands.
    """

    name: str
    hyperparams: Mapping[str, Mapping] = field(default_factory=dict)
    seed: int = 0
    external: Mapping[str, list] = field(default_factory=dict)

    def build(self, space: SearchSpace):
        return make_optimizer(self.name, space, self.seed, self.hyperparams, self.external)


def _make_single(name, space, seed, hyperparams, external):
    overrides = dict(hyperparams.get(name, {}))
    if name in external:
        from .harness.adapter import AdapterOptimizer

        return AdapterOptimizer(space, seed, command=list(external[name]), name=name, **overrides)
    if name not in OPTIMIZERS:
        known = sorted(set(OPTIMIZERS) | set(external))
        raise ConfigError(f"unknown optimizer {name!r}; known: {known}")
    return OPTIMIZERS[name](space, seed, **overrides)


def make_optimizer(name: str, space: SearchSpace, seed: int = 0, hyperparams=None, external=None):
    hyperparams = hyperparams or {}
    external = external or {}
    parts = parse_name(name)
    if len(parts) == 1:
        return _make_single(parts[0], space, seed, hyperparams, external)
    members = [
        _make_single(p, space, constituent_seed(seed, i), hyperparams, external) for i, p in enumerate(parts)
    ]
    return EnsembleOptimizer(members, seed=seed)


def known_names(external=None) -> list[str]:
    return sorted(set(OPTIMIZERS) | set(external or {}))

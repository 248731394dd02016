"""Ensemble combinator: constituents split each batch and share every score."""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import ConfigError, ContractViolation, ShapeError
from .optimizers.base import ObservationHistory, Optimizer


def split_batch(k: int, n_batch: int, iter_id: int) -> list[int]:
    """Equal split of ``n_batch`` over ``k`` constituents.

    The ``n_batch mod k`` leftover slots go to constituents
    ``iter_id, iter_id + 1, ...`` (mod ``k``) so every constituent gets the
    same quota over ``k`` consecutive iterations.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n_batch < 0:
        raise ValueError("n_batch must be >= 0")
    base, r = divmod(n_batch, k)
    sizes = [base] * k
    for j in range(r):
        sizes[(iter_id + j) % k] += 1
    return sizes


class EnsembleOptimizer(Optimizer):
    """Optimizer made of ``k >= 2`` flat constituents sharing one space.

    ``suggest`` concatenates the constituents' shares in constituent order;
    ``observe`` forwards the full batch to every constituent.
    """

    uses_warmup = False

    def __init__(self, constituents: Sequence[Optimizer], seed: int = 0):
        constituents = list(constituents)
        if len(constituents) < 2:
            raise ConfigError("an ensemble needs at least 2 constituents")
        for c in constituents:
            if isinstance(c, EnsembleOptimizer):
                raise ConfigError("nested ensembles are not supported")
        space = constituents[0].space
        if any(c.space != space for c in constituents[1:]):
            raise ConfigError("all constituents must share one search space")
        self.space = space
        self.seed = seed
        self.hyperparams = {}
        self.constituents = constituents
        self.history = ObservationHistory(space)
        self.iter_counter = 0
        self.deadline = None
        self.name = "+".join(c.name for c in constituents)

    def suggest(self, n_batch: int) -> list[dict]:
        if n_batch < 0:
            raise ValueError("n_batch must be >= 0")
        sizes = split_batch(len(self.constituents), n_batch, self.iter_counter)
        out: list[dict] = []
        for i, (c, size) in enumerate(zip(self.constituents, sizes)):
            if size == 0:
                continue
            part = c.suggest(size)
            if len(part) != size:
                raise ContractViolation(
                    f"constituent {i} ({c.name}) returned {len(part)} suggestions, expected {size}"
                )
            out.extend(part)
        self.iter_counter += 1
        return out

    def observe(self, params: Sequence[Mapping], scores: Sequence[float]) -> None:
        params, scores = list(params), list(scores)
        if len(params) != len(scores):
            raise ShapeError(f"observe got {len(params)} params but {len(scores)} scores")
        if not params:
            return
        for p, s in zip(params, scores):
            self.history.append(p, s)
        for c in self.constituents:
            c.observe(params, scores)

    def close(self) -> None:
        for c in self.constituents:
            close = getattr(c, "close", None)
            if callable(close):
                close()

    def __repr__(self) -> str:
        return f"EnsembleOptimizer({self.name!r}, iter={self.iter_counter})"

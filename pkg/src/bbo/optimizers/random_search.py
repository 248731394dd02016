from __future__ import annotations

from .base import Optimizer


class RandomSearch(Optimizer):
    """Uniform sampling in the warped view; ignores observations."""

    name = "random"
    uses_warmup = False

    def _suggest(self, n):
        return self.rng.random((n, self.space.warped_dim))

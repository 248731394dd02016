from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..surrogate import GpConfig
from ._acq import dedupe_rows, select_batch_ei, sobol_unit
from .base import Optimizer


class GPEI(Optimizer):
    """Global GP with expected improvement over a quasi-random candidate set.

    Batches are filled with the constant-liar heuristic. The most recent
    batch's per-pick audit trail is kept in ``selection_log``.
    """

    name = "gpei"
    defaults = {"n_candidates": 512, "optimize_lengthscale": False, "noise_jitter": 1e-6}

    def _validate_hyperparams(self):
        if int(self.hyperparams["n_candidates"]) < 1:
            raise ConfigError("gpei: n_candidates must be >= 1")
        self.gp_config = GpConfig(
            optimize_lengthscale=bool(self.hyperparams["optimize_lengthscale"]),
            noise_jitter=float(self.hyperparams["noise_jitter"]),
        )
        self.selection_log = []

    def _suggest(self, n):
        X, y = self.history.finite_arrays()
        raw = sobol_unit(int(self.hyperparams["n_candidates"]), self.space.warped_dim, self.rng)
        candidates = dedupe_rows(self.space.snap(raw))
        self.selection_log = []
        return select_batch_ei(X, y, candidates, n, self.gp_config, log=self.selection_log)

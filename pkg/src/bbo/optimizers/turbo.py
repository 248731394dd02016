"""Single trust-region GP search ("turbo-lite").

A local GP is fit on the points observed since the last restart and EI is
maximized over quasi-random candidates inside a box of side ``length``
centred on the local incumbent. The box grows after a streak of improving
batches, shrinks after a streak of non-improving ones, and a restart
discards the local data once it gets smaller than ``l_min``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError
from ..surrogate import GpConfig
from ._acq import dedupe_rows, select_batch_ei, sobol_unit
from .base import Optimizer

L_INIT = 0.8
L_MIN = 2.0**-6
L_MAX = 1.6
TAU_SUCC = 3
TAU_FAIL = 3


@dataclass(frozen=True)
class TrustRegionState:
    length: float = L_INIT
    success_streak: int = 0
    failure_streak: int = 0
    center: np.ndarray | None = None
    restart_count: int = 0


def trust_region_update(
    st: TrustRegionState,
    batch_best: float,
    incumbent: float,
    *,
    l_init: float = L_INIT,
    l_min: float = L_MIN,
    l_max: float = L_MAX,
    tau_succ: int = TAU_SUCC,
    tau_fail: int = TAU_FAIL,
) -> TrustRegionState:
    """Return the state after one observed batch.

    On restart the centre is cleared; the optimizer re-seeds it from a
    fresh latin-hypercube design.
    """
    length = st.length
    if batch_best < incumbent:
        succ, fail = st.success_streak + 1, 0
    else:
        succ, fail = 0, st.failure_streak + 1
    if succ >= tau_succ:
        length, succ = min(2.0 * length, l_max), 0
    if fail >= tau_fail:
        length, fail = length / 2.0, 0
    if length < l_min:
        return TrustRegionState(length=l_init, center=None, restart_count=st.restart_count + 1)
    return replace(st, length=length, success_streak=succ, failure_streak=fail)


def _clamp_levels_to_box(space, U, raw, lo, hi):
    """Move rounded integer/boolean coordinates back inside ``[lo, hi]``.

    Rounding can push a level just outside the box; the nearest level that
    lies inside it is used instead (the centre's own level always does).
    """
    for s, sl in space.blocks():
        if s.kind not in ("integer", "boolean"):
            continue
        j = sl.start
        outside = (U[:, j] < lo[j] - 1e-12) | (U[:, j] > hi[j] + 1e-12)
        if not outside.any():
            continue
        levels = np.arange(s.low, s.high + 1)
        w = np.clip(s._to_unit(levels), 0.0, 1.0)
        ok = (w >= lo[j] - 1e-12) & (w <= hi[j] + 1e-12)
        w_ok = w[ok]
        nearest = np.argmin(np.abs(raw[outside, j][:, None] - w_ok[None, :]), axis=1)
        U[outside, j] = w_ok[nearest]
    return U


class TurboLite(Optimizer):
    name = "turbo"
    defaults = {
        "n_candidates": 512,
        "l_init": L_INIT,
        "l_min": L_MIN,
        "l_max": L_MAX,
        "tau_succ": TAU_SUCC,
        "tau_fail": TAU_FAIL,
    }

    def _validate_hyperparams(self):
        hp = self.hyperparams
        if not 0 < hp["l_min"] <= hp["l_init"] <= hp["l_max"]:
            raise ConfigError("turbo: need 0 < l_min <= l_init <= l_max")
        if int(hp["tau_succ"]) < 1 or int(hp["tau_fail"]) < 1:
            raise ConfigError("turbo: streak thresholds must be >= 1")
        if int(hp["n_candidates"]) < 1:
            raise ConfigError("turbo: n_candidates must be >= 1")
        self.state = TrustRegionState(length=float(hp["l_init"]))
        self.local_start = 0
        self.gp_config = GpConfig()
        self.last_box: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def in_warmup(self) -> bool:
        X, _ = self.history.finite_arrays(self.local_start)
        return len(X) < self.init_points

    def _suggest(self, n):
        X, y = self.history.finite_arrays(self.local_start)
        center = X[int(np.argmin(y))]
        self.state = replace(self.state, center=center)
        L = self.state.length
        lo = np.clip(center - L / 2.0, 0.0, 1.0)
        hi = np.clip(center + L / 2.0, 0.0, 1.0)
        # categorical coordinates are handled separately below
        cat = self.space.categorical_mask
        lo[cat], hi[cat] = 0.0, 1.0
        self.last_box = (lo, hi)

        k = int(self.hyperparams["n_candidates"])
        raw = lo + (hi - lo) * sobol_unit(k, self.space.warped_dim, self.rng)
        flip = min(1.0, L / 2.0)
        for s, sl in self.space.blocks():
            if s.kind != "categorical":
                continue
            raw[:, sl] = center[sl]
            redraw = self.rng.random(k) < flip
            choice = self.rng.integers(0, s.width, size=k)
            rows = np.flatnonzero(redraw)
            raw[rows, sl] = 0.0
            raw[rows, sl.start + choice[rows]] = 1.0
        U = _clamp_levels_to_box(self.space, self.space.snap(raw), raw, lo, hi)
        return select_batch_ei(X, y, dedupe_rows(U), n, self.gp_config)

    def _after_observe(self, start):
        prev = [sc for _, sc in self.history.records[self.local_start : start] if np.isfinite(sc)]
        if not prev:
            return
        incumbent = min(prev)
        batch = [sc for _, sc in self.history.records[start:] if np.isfinite(sc)]
        # an all-failed batch counts as a failure
        batch_best = min(batch) if batch else incumbent
        hp = self.hyperparams
        new = trust_region_update(
            self.state,
            batch_best,
            incumbent,
            l_init=hp["l_init"],
            l_min=hp["l_min"],
            l_max=hp["l_max"],
            tau_succ=int(hp["tau_succ"]),
            tau_fail=int(hp["tau_fail"]),
        )
        if new.restart_count > self.state.restart_count:
            self.local_start = len(self.history)
        self.state = new

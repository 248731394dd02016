"""Scores normalized against a budget-matched random-search baseline.

A normalized score of 0 equals the best value random search found over a
large pool and 1 equals the expected final best of a random-search run with
the study's budget. Values are clipped to ``[-1, 1]``; lower is better.

Holdout scores use their own anchors from the same random-search process:
the pool's lowest holdout value and the mean holdout value at each
simulated run's final visible incumbent.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .benchmark import ObjectiveSpec, evaluate
from .errors import DegenerateBaselineError, IncompleteGridError
from .seeding import derive_seed
from .space import sample_uniform

BASELINE_VERSION = 1
METRICS = ("visible", "holdout")


@dataclass(frozen=True)
class Baseline:
    objective_id: str
    n_step: int
    n_batch: int
    rand_opt: float
    rand_mean: float
    holdout_opt: float
    holdout_mean: float
    best_params: dict
    pool_size: int
    n_sim_runs: int
    seed: int
    run_minima: tuple = field(default=(), repr=False)

    def anchors(self, which: str = "visible") -> tuple[float, float]:
        if which == "visible":
            return self.rand_opt, self.rand_mean
        if which == "holdout":
            return self.holdout_opt, self.holdout_mean
        raise ValueError(f"unknown metric {which!r}")

    @property
    def key(self) -> str:
        return baseline_key(self.objective_id, self.n_step, self.n_batch, self.seed)

    def to_json(self) -> str:
        d = asdict(self)
        d["run_minima"] = list(self.run_minima)
        d["version"] = BASELINE_VERSION
        return json.dumps(d, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Baseline":
        d = json.loads(text)
        version = d.pop("version", None)
        if version != BASELINE_VERSION:
            raise ValueError(f"unsupported baseline file version {version!r}")
        d["run_minima"] = tuple(d["run_minima"])
        return cls(**d)

    def save(self, directory) -> Path:
        path = Path(directory) / f"{self.key}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path


def baseline_key(objective_id: str, n_step: int, n_batch: int, seed: int) -> str:
    return f"{objective_id}__s{n_step}_b{n_batch}__seed{seed}"


def load_baseline(directory, objective_id, n_step, n_batch, seed) -> Baseline | None:
    path = Path(directory) / f"{baseline_key(objective_id, n_step, n_batch, seed)}.json"
    if not path.exists():
        return None
    return Baseline.from_json(path.read_text())


def _pick_min(values: np.ndarray, idx: np.ndarray) -> int:
    """Index (into ``idx``) of the earliest minimum over finite entries."""
    v = values[idx]
    v = np.where(np.isfinite(v), v, np.inf)
    return int(np.argmin(v))


def build_baseline(
    obj: ObjectiveSpec,
    n_step: int = 16,
    n_batch: int = 8,
    pool_size: int = 10_000,
    n_sim_runs: int = 100,
    seed: int = 0,
) -> Baseline:
    """Evaluate a uniform pool, then replay ``n_sim_runs`` budget-sized random
    runs drawn without replacement from it."""
    budget = n_step * n_batch
    if pool_size < budget:
        raise ValueError(f"pool_size {pool_size} smaller than the study budget {budget}")
    pool = sample_uniform(obj.space, pool_size, derive_seed(seed, obj.id, "pool"))
    results = [evaluate(obj, p, derive_seed(seed, obj.id, "trial", i)) for i, p in enumerate(pool)]
    vis = np.array([r.visible for r in results])
    hol = np.array([r.holdout for r in results])
    everything = np.arange(pool_size)
    i_best = _pick_min(vis, everything)
    rand_opt = float(vis[i_best])
    holdout_opt = float(np.min(np.where(np.isfinite(hol), hol, np.inf)))

    rng = np.random.default_rng(derive_seed(seed, obj.id, "runs"))
    finals, final_holdouts = [], []
    for _ in range(n_sim_runs):
        idx = rng.choice(pool_size, size=budget, replace=False)
        j = idx[_pick_min(vis, idx)]
        finals.append(float(vis[j]) if math.isfinite(vis[j]) else math.inf)
        final_holdouts.append(float(hol[j]) if math.isfinite(hol[j]) else math.inf)
    rand_mean = float(np.mean(finals))
    holdout_mean = float(np.mean(final_holdouts))
    if not (math.isfinite(rand_opt) and math.isfinite(rand_mean)) or rand_mean <= rand_opt + 1e-12:
        raise DegenerateBaselineError(f"{obj.id}: rand_mean {rand_mean} not above rand_opt {rand_opt}")
    if not (math.isfinite(holdout_opt) and math.isfinite(holdout_mean)) or holdout_mean <= holdout_opt + 1e-12:
        raise DegenerateBaselineError(f"{obj.id}: holdout anchors are degenerate")
    return Baseline(
        objective_id=obj.id,
        n_step=n_step,
        n_batch=n_batch,
        rand_opt=rand_opt,
        rand_mean=rand_mean,
        holdout_opt=holdout_opt,
        holdout_mean=holdout_mean,
        best_params=dict(pool[i_best]),
        pool_size=pool_size,
        n_sim_runs=n_sim_runs,
        seed=seed,
        run_minima=tuple(finals),
    )


def normalize(perf: float, b: Baseline, which: str = "visible") -> float:
    """Affine rescale so the pool optimum maps to 0 and the budget-matched
    random-search mean maps to 1; non-finite ``perf`` scores +1."""
    opt, mean = b.anchors(which)
    if mean <= opt + 1e-12:
        raise DegenerateBaselineError(f"{b.objective_id}: degenerate baseline")
    if not math.isfinite(perf):
        return 1.0
    raw = (perf - opt) / (mean - opt)
    return min(1.0, max(-1.0, raw))


def cumulative_min(series: Sequence[float]) -> list[float]:
    """Running minimum; non-finite entries carry the previous minimum
    (``inf`` before the first finite value)."""
    if len(series) == 0:
        raise ValueError("cumulative_min needs a non-empty series")
    out, cur = [], math.inf
    for v in series:
        v = float(v)
        if math.isfinite(v) and v < cur:
            cur = v
        out.append(cur)
    return out


def incumbent_series(visible: Sequence[float], other: Sequence[float]) -> list[float]:
    """``other`` evaluated at the running visible argmin (earliest on ties)."""
    out, cur, val = [], math.inf, math.inf
    for v, o in zip(visible, other):
        v = float(v)
        if math.isfinite(v) and v < cur:
            cur, val = v, float(o)
        out.append(val)
    return out


def leaderboard_score(mean_norm: float) -> float:
    return min(100.0, max(0.0, 100.0 * (1.0 - mean_norm)))


@dataclass
class StudyReport:
    """Outcome of one (optimizer, objective, repeat) study.

    ``visible_curve`` is the per-iteration cumulative minimum of visible
    scores; ``holdout_curve`` is the holdout score of the visible incumbent
    at the end of each iteration and is not monotone in general.
    """

    optimizer_name: str
    objective_id: str
    repeat_idx: int
    visible_curve: list
    holdout_curve: list
    final_visible: float
    final_holdout: float
    visible_norm_curve: list = field(default_factory=list)
    holdout_norm_curve: list = field(default_factory=list)
    timings: list = field(default_factory=list)
    failed: bool = False
    error: str | None = None

    def final(self, which: str) -> float:
        return self.final_visible if which == "visible" else self.final_holdout


@dataclass
class Aggregate:
    which: str
    optimizers: list
    objectives: list
    means: dict
    matrix: dict
    row_best: dict

    def leaderboard(self) -> list[tuple[str, float]]:
        rows = [(name, leaderboard_score(self.means[name])) for name in self.optimizers]
        return sorted(rows, key=lambda r: (-r[1], r[0]))


def _mean(values: Iterable[float]) -> float:
    values = sorted(values)
    return math.fsum(values) / len(values)


def aggregate(reports: Sequence[StudyReport], which: str = "visible", optimizers=None, objectives=None, repeats=None) -> Aggregate:
    """Mean normalized final score per optimizer, plus the objective x
    optimizer matrix of per-cell means with the best optimizer per row.

    The grid defaults to every optimizer, objective and repeat index seen
    in ``reports``; any missing cell raises :class:`IncompleteGridError`.
    """
    if which not in METRICS:
        raise ValueError(f"unknown metric {which!r}")
    if not reports and not optimizers:
        raise ValueError("aggregate needs at least one report")
    cells = {(r.optimizer_name, r.objective_id, r.repeat_idx): r for r in reports}
    optimizers = list(optimizers) if optimizers is not None else sorted({k[0] for k in cells})
    objectives = list(objectives) if objectives is not None else sorted({k[1] for k in cells})
    repeats = list(repeats) if repeats is not None else sorted({k[2] for k in cells})
    gaps = [
        (o, f, r)
        for o in optimizers
        for f in objectives
        for r in repeats
        if (o, f, r) not in cells or cells[(o, f, r)].failed
    ]
    if gaps:
        raise IncompleteGridError(gaps)
    means = {o: _mean(cells[(o, f, r)].final(which) for f in objectives for r in repeats) for o in optimizers}
    matrix = {f: {o: _mean(cells[(o, f, r)].final(which) for r in repeats) for o in optimizers} for f in objectives}
    row_best = {f: min(optimizers, key=lambda o: (matrix[f][o], optimizers.index(o))) for f in objectives}
    return Aggregate(which, optimizers, objectives, means, matrix, row_best)

"""Study enumeration, job identity and round-robin scheduling."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Sequence

from ..errors import ConfigError
from ..optimizers import RANDOM
from ..seeding import derive_seed


@dataclass(frozen=True)
class StudyConfig:
    n_step: int = 16
    n_batch: int = 8
    n_repeat: int = 3
    budget_seconds: float = 40.0
    run_seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    strict_budget: bool = False
    baseline_pool: int = 10_000
    baseline_runs: int = 100

    def __post_init__(self):
        for name in ("n_step", "n_batch", "n_repeat", "workers", "baseline_pool", "baseline_runs"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.budget_seconds > 0:
            raise ConfigError("budget_seconds must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Job:
    job_id: int
    optimizer_name: str
    objective_id: str
    repeat_idx: int
    derived_seed: int

    @property
    def stem(self) -> str:
        return f"{self.job_id:05d}__{self.optimizer_name}__{self.objective_id}__r{self.repeat_idx}"


def job_seed(run_seed: int, optimizer_name: str, objective_id: str, repeat_idx: int) -> int:
    return derive_seed(run_seed, "job", optimizer_name, objective_id, repeat_idx)


def enumerate_studies(names: Sequence[str], include_singles: bool = True, include_pairs: bool = True) -> list[str]:
    """Singles in the given order, then every unordered pair ``"A+B"``.

    The random baseline may appear as a single but is never paired.
    """
    names = list(names)
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise ConfigError(f"duplicate optimizer names: {dup}")
    if any("+" in n for n in names):
        raise ConfigError("enumerate_studies takes base optimizer names, not ensembles")
    out = list(names) if include_singles else []
    if include_pairs:
        pairable = [n for n in names if n != RANDOM]
        out += [f"{a}+{b}" for a, b in combinations(pairable, 2)]
    return out


def make_jobs(studies: Sequence[str], objective_ids: Sequence[str], n_repeat: int, run_seed: int) -> list[Job]:
    jobs = []
    for opt in studies:
        for obj in objective_ids:
            for r in range(n_repeat):
                jobs.append(Job(len(jobs), opt, obj, r, job_seed(run_seed, opt, obj, r)))
    return jobs


def schedule(jobs: Sequence, workers: int) -> list[int]:
    """Round-robin assignment: job ``i`` goes to worker ``i mod workers``."""
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return [i % workers for i in range(len(jobs))]

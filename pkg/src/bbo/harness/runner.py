"""The suggest -> evaluate -> observe study loop and the exhaustive search.

Each job writes ``trials/<stem>.jsonl``: a ``job`` header line, one
``trial`` line per suggestion (flushed after every iteration) and a final
``complete`` marker. Wall-clock timings go to ``<stem>.timing.jsonl`` so
the trial log itself is reproducible byte for byte.
"""

from __future__ import annotations

import json
import logging
import math
import queue
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from ..benchmark import ObjectiveSpec, evaluate
from ..errors import BudgetViolation, ConfigError, ContractViolation, DomainError, IncompleteGridError
from ..registry import make_optimizer
from ..scoring import (
    Baseline,
    StudyReport,
    aggregate,
    build_baseline,
    cumulative_min,
    incumbent_series,
    load_baseline,
    normalize,
)
from ..seeding import derive_seed
from .jobs import Job, StudyConfig, enumerate_studies, job_seed, make_jobs, schedule

log = logging.getLogger(__name__)

TRIALS_DIR = "trials"
BASELINES_DIR = "baselines"


@dataclass
class TrialRecord:
    job_id: int
    iter_id: int
    batch_index: int
    params: dict
    visible: float
    holdout: float
    noiseless: float
    suggest_ms: float = 0.0
    observe_ms: float = 0.0
    evaluate_ms: float = 0.0

    def log_line(self) -> str:
        d = {
            "type": "trial",
            "job_id": self.job_id,
            "iter_id": self.iter_id,
            "batch_index": self.batch_index,
            "params": self.params,
            "visible": self.visible,
            "holdout": self.holdout,
            "noiseless": self.noiseless,
        }
        return json.dumps(d)


def budget_check(report: StudyReport, budget_seconds: float) -> list[dict]:
    """Iterations whose suggest+observe time exceeded the budget."""
    if math.isinf(budget_seconds):
        return []
    limit = budget_seconds * 1000.0
    out = []
    for t in report.timings:
        total = t["suggest_ms"] + t["observe_ms"]
        if total > limit:
            out.append({"iter_id": t["iter_id"], "total_ms": total, "budget_ms": limit})
    return out


def build_report(
    job: Job, records: Sequence[TrialRecord], timings: Sequence[dict], baseline: Baseline, cfg: StudyConfig
) -> StudyReport:
    """Derive a :class:`StudyReport` from the trial records of one job."""
    vis = [r.visible for r in records]
    hol = [r.holdout for r in records]
    vis_cm = cumulative_min(vis)
    hol_inc = incumbent_series(vis, hol)
    ends = [(i + 1) * cfg.n_batch - 1 for i in range(cfg.n_step)]
    vis_curve = [vis_cm[e] for e in ends]
    hol_curve = [hol_inc[e] for e in ends]
    return StudyReport(
        optimizer_name=job.optimizer_name,
        objective_id=job.objective_id,
        repeat_idx=job.repeat_idx,
        visible_curve=vis_curve,
        holdout_curve=hol_curve,
        final_visible=normalize(vis_curve[-1], baseline, "visible"),
        final_holdout=normalize(hol_curve[-1], baseline, "holdout"),
        visible_norm_curve=[normalize(v, baseline, "visible") for v in vis_curve],
        holdout_norm_curve=[normalize(v, baseline, "holdout") for v in hol_curve],
        timings=list(timings),
    )


def _check_suggestions(opt, params, n, space):
    if len(params) != n:
        raise ContractViolation(f"{opt.name} returned {len(params)} suggestions, expected {n}")
    for p in params:
        try:
            space.validate(p)
        except DomainError as exc:
            raise ContractViolation(f"{opt.name} suggested an invalid point: {exc}") from None


def run_study(
    cfg: StudyConfig,
    optimizer_name: str,
    obj: ObjectiveSpec,
    repeat_idx: int,
    baseline: Baseline,
    *,
    job: Job | None = None,
    out_dir=None,
    optimizer=None,
    hyperparams: Mapping | None = None,
    external: Mapping | None = None,
    records_out: list | None = None,
) -> StudyReport:
    """Run one study and return its report.

    ``optimizer`` overrides construction from ``optimizer_name``. When
    ``out_dir`` is given the trial log and timing sidecar are written under
    ``out_dir/trials``. Contract violations propagate; a budget overrun only
    logs a warning unless ``cfg.strict_budget`` is set.
    """
    if baseline.objective_id != obj.id:
        raise ConfigError(f"baseline is for {baseline.objective_id}, not {obj.id}")
    if job is None:
        job = Job(0, optimizer_name, obj.id, repeat_idx, job_seed(cfg.run_seed, optimizer_name, obj.id, repeat_idx))
    if optimizer is None:
        optimizer = make_optimizer(
            optimizer_name, obj.space, derive_seed(job.derived_seed, "optimizer"), hyperparams, external
        )
    trial_f = timing_f = None
    if out_dir is not None:
        tdir = Path(out_dir) / TRIALS_DIR
        tdir.mkdir(parents=True, exist_ok=True)
        trial_f = open(tdir / f"{job.stem}.jsonl", "w")
        timing_f = open(tdir / f"{job.stem}.timing.jsonl", "w")
        header = {"type": "job", **asdict(job)}
        trial_f.write(json.dumps(header) + "\n")
    records: list[TrialRecord] = [] if records_out is None else records_out
    timings: list[dict] = []
    budget_ms = cfg.budget_seconds * 1000.0
    try:
        for it in range(cfg.n_step):
            optimizer.deadline = time.monotonic() + cfg.budget_seconds
            t0 = time.perf_counter()
            params = optimizer.suggest(cfg.n_batch)
            t1 = time.perf_counter()
            _check_suggestions(optimizer, params, cfg.n_batch, obj.space)
            results = [
                evaluate(obj, p, derive_seed(job.derived_seed, "trial", it, b)) for b, p in enumerate(params)
            ]
            t2 = time.perf_counter()
            optimizer.observe(params, [r.visible for r in results])
            t3 = time.perf_counter()
            timing = {
                "iter_id": it,
                "suggest_ms": 1000 * (t1 - t0),
                "observe_ms": 1000 * (t3 - t2),
                "evaluate_ms": 1000 * (t2 - t1),
            }
            timings.append(timing)
            batch = [
                TrialRecord(
                    job.job_id,
                    it,
                    b,
                    dict(p),
                    r.visible,
                    r.holdout,
                    r.noiseless,
                    timing["suggest_ms"],
                    timing["observe_ms"],
                    timing["evaluate_ms"],
                )
                for b, (p, r) in enumerate(zip(params, results))
            ]
            records.extend(batch)
            if trial_f is not None:
                trial_f.write("".join(rec.log_line() + "\n" for rec in batch))
                trial_f.flush()
                timing_f.write(json.dumps(timing) + "\n")
                timing_f.flush()
            total = timing["suggest_ms"] + timing["observe_ms"]
            if total > budget_ms:
                msg = f"job {job.job_id} ({job.optimizer_name}) iteration {it}: {total:.0f} ms exceeds {budget_ms:.0f} ms budget"
                if cfg.strict_budget:
                    raise BudgetViolation(msg)
                log.warning(msg)
        if trial_f is not None:
            trial_f.write(json.dumps({"type": "complete", "job_id": job.job_id, "n_records": len(records)}) + "\n")
    finally:
        if trial_f is not None:
            trial_f.close()
            timing_f.close()
        close = getattr(optimizer, "close", None)
        if callable(close):
            close()
    return build_report(job, records, timings, baseline, cfg)


# -- trial log reading -------------------------------------------------------


def read_trial_log(path) -> tuple[dict | None, list[TrialRecord], bool]:
    """Parse a trial log; returns (header, records, complete)."""
    header, records, complete = None, [], False
    path = Path(path)
    if not path.exists():
        return None, [], False
    with open(path) as f:
        for line in f:
            if not line.endswith("\n"):
                break  # torn final line from an interrupted write
            try:
                d = json.loads(line)
            except json.JSONDecodeError:
                break
            kind = d.get("type")
            if kind == "job":
                header = d
            elif kind == "trial":
                records.append(
                    TrialRecord(
                        d["job_id"], d["iter_id"], d["batch_index"], d["params"], d["visible"], d["holdout"], d["noiseless"]
                    )
                )
            elif kind == "complete":
                complete = d.get("n_records") == len(records)
    return header, records, complete


def read_timings(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError:
            break
    return out


def load_completed(out_dir, job: Job, baseline: Baseline, cfg: StudyConfig) -> StudyReport | None:
    tdir = Path(out_dir) / TRIALS_DIR
    header, records, complete = read_trial_log(tdir / f"{job.stem}.jsonl")
    if not complete or header is None or header.get("derived_seed") != job.derived_seed:
        return None
    if len(records) != cfg.n_step * cfg.n_batch:
        return None
    timings = read_timings(tdir / f"{job.stem}.timing.jsonl")
    for rec in records:
        t = timings[rec.iter_id] if rec.iter_id < len(timings) else {}
        rec.suggest_ms = t.get("suggest_ms", 0.0)
        rec.observe_ms = t.get("observe_ms", 0.0)
        rec.evaluate_ms = t.get("evaluate_ms", 0.0)
    return build_report(job, records, timings, baseline, cfg)


# -- exhaustive search ---------------------------------------------------------


def ensure_baselines(cfg: StudyConfig, objectives: Sequence[ObjectiveSpec], out_dir=None) -> dict[str, Baseline]:
    """Load frozen baselines from ``out_dir/baselines`` or build and save them."""
    out = {}
    bdir = Path(out_dir) / BASELINES_DIR if out_dir is not None else None
    for obj in objectives:
        b = load_baseline(bdir, obj.id, cfg.n_step, cfg.n_batch, cfg.run_seed) if bdir else None
        if b is None or b.pool_size != cfg.baseline_pool or b.n_sim_runs != cfg.baseline_runs:
            b = build_baseline(obj, cfg.n_step, cfg.n_batch, cfg.baseline_pool, cfg.baseline_runs, cfg.run_seed)
            if bdir is not None:
                b.save(bdir)
        out[obj.id] = b
    return out


@dataclass
class SearchResult:
    studies: list
    objectives: list
    jobs: list
    reports: dict
    failures: dict
    executed: list
    baselines: dict
    aggregates: dict = field(default_factory=dict)
    gaps: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.gaps


def _worker_loop(assigned, run_one, results: queue.Queue):
    for job in assigned:
        try:
            results.put((job.job_id, run_one(job), None))
        except Exception as exc:  # a failed job must not take the pool down
            log.error("job %d (%s on %s, repeat %d) failed: %s", job.job_id, job.optimizer_name, job.objective_id, job.repeat_idx, exc)
            results.put((job.job_id, None, f"{type(exc).__name__}: {exc}"))


def run_search(
    cfg: StudyConfig,
    names: Sequence[str],
    objectives: Sequence[ObjectiveSpec],
    out_dir=None,
    *,
    include_singles: bool = True,
    include_pairs: bool = True,
    hyperparams: Mapping | None = None,
    external: Mapping | None = None,
    max_jobs: int | None = None,
    on_job_done: Callable[[Job], None] | None = None,
) -> SearchResult:
    """Run every study x objective x repeat job on a round-robin thread pool.

    Jobs with a completion marker in ``out_dir`` are loaded instead of rerun.
    ``max_jobs`` caps how many pending jobs execute in this call, which
    leaves the rest for a later resume.
    """
    studies = enumerate_studies(names, include_singles, include_pairs)
    objectives = list(objectives)
    obj_by_id = {o.id: o for o in objectives}
    baselines = ensure_baselines(cfg, objectives, out_dir)
    jobs = make_jobs(studies, [o.id for o in objectives], cfg.n_repeat, cfg.run_seed)

    reports: dict[int, StudyReport] = {}
    pending = []
    for job in jobs:
        rep = load_completed(out_dir, job, baselines[job.objective_id], cfg) if out_dir is not None else None
        if rep is not None:
            reports[job.job_id] = rep
        else:
            pending.append(job)
    if max_jobs is not None:
        pending = pending[:max_jobs]

    def run_one(job: Job) -> StudyReport:
        rep = run_study(
            cfg,
            job.optimizer_name,
            obj_by_id[job.objective_id],
            job.repeat_idx,
            baselines[job.objective_id],
            job=job,
            out_dir=out_dir,
            hyperparams=hyperparams,
            external=external,
        )
        if on_job_done is not None:
            on_job_done(job)
        return rep

    workers = max(1, min(cfg.workers, len(pending))) if pending else 1
    assignment = schedule(pending, workers)
    per_worker = [[j for j, w in zip(pending, assignment) if w == k] for k in range(workers)]
    results: queue.Queue = queue.Queue()
    failures: dict[int, str] = {}
    if workers == 1:
        _worker_loop(per_worker[0], run_one, results)
    else:
        threads = [
            threading.Thread(target=_worker_loop, args=(per_worker[k], run_one, results), daemon=True)
            for k in range(workers)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    while not results.empty():
        job_id, rep, err = results.get()
        if rep is not None:
            reports[job_id] = rep
        else:
            failures[job_id] = err

    result = SearchResult(
        studies=studies,
        objectives=[o.id for o in objectives],
        jobs=jobs,
        reports=dict(sorted(reports.items())),
        failures=dict(sorted(failures.items())),
        executed=[j.job_id for j in pending],
        baselines=baselines,
    )
    ordered = [result.reports[k] for k in sorted(result.reports)]
    repeats = list(range(cfg.n_repeat))
    try:
        for which in ("visible", "holdout"):
            result.aggregates[which] = aggregate(ordered, which, studies, result.objectives, repeats)
    except IncompleteGridError as exc:
        result.gaps = exc.gaps
    return result

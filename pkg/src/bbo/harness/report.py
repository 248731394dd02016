"""Output bundle: manifest, aggregate tables, curves, timing and summary."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .. import __version__
from ..benchmark import SUITE_VERSION, get_objective
from ..errors import IncompleteGridError
from ..scoring import Aggregate, aggregate, leaderboard_score, load_baseline
from .jobs import StudyConfig, make_jobs
from .runner import BASELINES_DIR, SearchResult, budget_check, load_completed

MANIFEST = "manifest.json"


def _fmt(v: float) -> str:
    return f"{v:.6f}" if math.isfinite(v) else str(v)


def _fmean(values) -> float:
    values = sorted(values)
    return math.fsum(values) / len(values) if values else math.nan


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def aggregate_rows(result: SearchResult):
    vis, hol = result.aggregates["visible"], result.aggregates["holdout"]
    rows = [["optimizer", "kind", "visible_mean", "holdout_mean", "visible_leaderboard", "holdout_leaderboard"]]
    for name in result.studies:
        rows.append(
            [
                name,
                "pair" if "+" in name else "single",
                _fmt(vis.means[name]),
                _fmt(hol.means[name]),
                _fmt(leaderboard_score(vis.means[name])),
                _fmt(leaderboard_score(hol.means[name])),
            ]
        )
    return rows


def matrix_rows(agg: Aggregate):
    rows = [["objective", *agg.optimizers, "best"]]
    for f in agg.objectives:
        rows.append([f, *(_fmt(agg.matrix[f][o]) for o in agg.optimizers), agg.row_best[f]])
    return rows


def leaderboard_rows(result: SearchResult):
    vis, hol = result.aggregates["visible"], result.aggregates["holdout"]
    rows = [["rank", "optimizer", "leaderboard", "generalization"]]
    for rank, (name, score) in enumerate(vis.leaderboard(), start=1):
        rows.append([rank, name, _fmt(score), _fmt(leaderboard_score(hol.means[name]))])
    return rows


def curve_rows(result: SearchResult):
    """Mean normalized cumulative-min (visible) and incumbent holdout per iteration."""
    rows = [["optimizer", "iter_id", "visible_norm_mean", "holdout_norm_mean"]]
    by_opt: dict[str, list] = {}
    for rep in result.reports.values():
        by_opt.setdefault(rep.optimizer_name, []).append(rep)
    for name in result.studies:
        reps = by_opt.get(name, [])
        if not reps:
            continue
        n_iter = len(reps[0].visible_norm_curve)
        for i in range(n_iter):
            rows.append(
                [
                    name,
                    i,
                    _fmt(_fmean(r.visible_norm_curve[i] for r in reps)),
                    _fmt(_fmean(r.holdout_norm_curve[i] for r in reps)),
                ]
            )
    return rows


def timing_rows(result: SearchResult, budget_seconds: float):
    rows = [["optimizer", "suggest_s", "observe_s", "evaluate_s", "max_iter_s", "violations"]]
    by_opt: dict[str, list] = {}
    for rep in result.reports.values():
        by_opt.setdefault(rep.optimizer_name, []).append(rep)
    for name in result.studies:
        reps = by_opt.get(name, [])
        ts = [t for r in reps for t in r.timings]
        if not ts:
            continue
        rows.append(
            [
                name,
                f"{_fmean(t['suggest_ms'] for t in ts) / 1000:.4f}",
                f"{_fmean(t['observe_ms'] for t in ts) / 1000:.4f}",
                f"{_fmean(t['evaluate_ms'] for t in ts) / 1000:.4f}",
                f"{max(t['suggest_ms'] + t['observe_ms'] for t in ts) / 1000:.4f}",
                sum(len(budget_check(r, budget_seconds)) for r in reps),
            ]
        )
    return rows


def pair_vs_singles(result: SearchResult, which: str = "holdout"):
    """Best pair and best single by mean normalized score (lower is better)."""
    agg = result.aggregates[which]
    singles = [s for s in result.studies if "+" not in s]
    pairs = [s for s in result.studies if "+" in s]
    if not singles or not pairs:
        return None
    best_single = min(singles, key=lambda s: (agg.means[s], s))
    best_pair = min(pairs, key=lambda s: (agg.means[s], s))
    beats = agg.means[best_pair] < agg.means[best_single]
    return beats, best_pair, agg.means[best_pair], best_single, agg.means[best_single]


def _text_table(rows, mark=None) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for k, r in enumerate(rows):
        cells = []
        for i, c in enumerate(r):
            if mark and k > 0 and mark(k, i):
                c = c + "*"
            cells.append(c.ljust(widths[i] + 1))
        lines.append("  ".join(cells).rstrip())
        if k == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines)


def _matrix_text(agg: Aggregate) -> str:
    rows = matrix_rows(agg)
    header = rows[0]

    def mark(k, i):
        return header[i] == rows[k][-1] and i < len(header) - 1

    return _text_table(rows, mark)


def summary_text(result: SearchResult) -> str:
    parts = []
    n_jobs = len(result.jobs)
    parts.append(f"studies: {len(result.studies)}  objectives: {len(result.objectives)}  jobs: {n_jobs}")
    if result.gaps:
        parts.append(f"INCOMPLETE: {len(result.gaps)} missing cells")
        for g in result.gaps:
            parts.append("  missing " + " / ".join(map(str, g)))
        return "\n".join(parts) + "\n"
    parts.append("\nMean normalized score (lower is better; 1 = random search, 0 = random-search pool optimum)")
    parts.append(_text_table(aggregate_rows(result)))
    for which in ("visible", "holdout"):
        parts.append(f"\nPer-objective mean normalized {which} score (* = best in row)")
        parts.append(_matrix_text(result.aggregates[which]))
    parts.append("\nLeaderboard (0-100, higher is better)")
    parts.append(_text_table(leaderboard_rows(result)))
    verdict = pair_vs_singles(result, "holdout")
    if verdict is not None:
        beats, bp, bpv, bs, bsv = verdict
        word = "YES" if beats else "NO"
        parts.append(
            f"\nPair beats every single on holdout: {word} "
            f"(best pair {bp} = {_fmt(bpv)}, best single {bs} = {_fmt(bsv)})"
        )
    return "\n".join(parts) + "\n"


def manifest(result: SearchResult, cfg: StudyConfig, extra: dict | None = None) -> dict:
    return {
        "package_version": __version__,
        "suite_version": SUITE_VERSION,
        "config": cfg.to_dict(),
        "run_seed": cfg.run_seed,
        "studies": result.studies,
        "objectives": {oid: get_objective(oid).space.to_dicts() for oid in result.objectives},
        "n_jobs": len(result.jobs),
        "n_records_expected": len(result.jobs) * cfg.n_step * cfg.n_batch,
        **(extra or {}),
    }


def write_bundle(result: SearchResult, cfg: StudyConfig, out_dir, extra: dict | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, text):
        path = out / name
        path.write_text(text)
        written.append(path)

    put(MANIFEST, json.dumps(manifest(result, cfg, extra), indent=1) + "\n")
    gaps_path = out / "gaps.json"
    if result.gaps:
        put("gaps.json", json.dumps({"gaps": result.gaps, "failures": result.failures}, indent=1) + "\n")
    elif gaps_path.exists():
        gaps_path.unlink()
    put("curves.csv", csv_text(curve_rows(result)))
    put("timing.csv", csv_text(timing_rows(result, cfg.budget_seconds)))
    if not result.gaps:
        put("aggregate.csv", csv_text(aggregate_rows(result)))
        put("matrix_visible.csv", csv_text(matrix_rows(result.aggregates["visible"])))
        put("matrix_holdout.csv", csv_text(matrix_rows(result.aggregates["holdout"])))
        put("leaderboard.csv", csv_text(leaderboard_rows(result)))
    put("summary.txt", summary_text(result))
    return written


def load_result(in_dir) -> tuple[SearchResult, StudyConfig]:
    """Rebuild a :class:`SearchResult` from a bundle directory's logs."""
    in_dir = Path(in_dir)
    man = json.loads((in_dir / MANIFEST).read_text())
    cfg = StudyConfig(**man["config"])
    studies = man["studies"]
    objectives = list(man["objectives"])
    jobs = make_jobs(studies, objectives, cfg.n_repeat, cfg.run_seed)
    baselines = {
        oid: load_baseline(in_dir / BASELINES_DIR, oid, cfg.n_step, cfg.n_batch, cfg.run_seed) for oid in objectives
    }
    reports = {}
    for job in jobs:
        b = baselines.get(job.objective_id)
        rep = load_completed(in_dir, job, b, cfg) if b is not None else None
        if rep is not None:
            reports[job.job_id] = rep
    result = SearchResult(studies, objectives, jobs, reports, {}, [], baselines)
    ordered = [reports[k] for k in sorted(reports)]
    try:
        for which in ("visible", "holdout"):
            result.aggregates[which] = aggregate(ordered, which, studies, objectives, list(range(cfg.n_repeat)))
    except IncompleteGridError as exc:
        result.gaps = exc.gaps
    return result, cfg

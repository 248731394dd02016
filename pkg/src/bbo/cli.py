"""Command-line entry point ``bbo``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .benchmark import get_objective, resolve_objectives, suite
from .errors import BBOError, ConfigError
from .harness.jobs import Job, StudyConfig, job_seed
from .harness.report import (
    aggregate_rows,
    csv_text,
    curve_rows,
    leaderboard_rows,
    load_result,
    matrix_rows,
    summary_text,
    timing_rows,
    write_bundle,
)
from .harness.runner import budget_check, ensure_baselines, run_search, run_study
from .optimizers import SEARCHABLE
from .space import SearchSpace, sample_uniform

DEFAULT_OUT = "bbo_out"


def _out_dir(arg) -> Path:
    return Path(arg or os.environ.get("BBO_OUT") or DEFAULT_OUT)


def _load_config(path):
    if not path:
        return {}, {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    unknown = set(data) - {"hyperparams", "external"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    return data.get("hyperparams", {}), data.get("external", {})


def _study_config(args, **overrides) -> StudyConfig:
    kw = dict(
        n_step=args.steps,
        n_batch=args.batch,
        run_seed=args.seed,
        budget_seconds=args.budget,
        strict_budget=args.strict_budget,
        baseline_pool=args.pool,
        baseline_runs=args.runs,
    )
    kw.update(overrides)
    return StudyConfig(**kw)


def _print_objectives():
    print(f"{'id':<15} {'dim':>3} {'warped':>6} {'f_star':>12} {'sigma_cv':>12}")
    for obj in suite():
        print(f"{obj.id:<15} {obj.dim:>3} {obj.space.warped_dim:>6} {obj.f_star:>12.6f} {obj.sigma_cv:>12.6f}")


def cmd_baseline(args) -> int:
    out = _out_dir(args.out)
    cfg = _study_config(args, n_repeat=1, workers=1)
    bases = ensure_baselines(cfg, resolve_objectives(args.objectives), out)
    for oid, b in bases.items():
        print(f"{oid:<15} rand_opt={b.rand_opt:.6g} rand_mean={b.rand_mean:.6g} -> {out / 'baselines' / (b.key + '.json')}")
    return 0


def cmd_run(args) -> int:
    out = _out_dir(args.out)
    hyper, external = _load_config(args.config)
    obj = get_objective(args.objective)
    cfg = _study_config(args, n_repeat=args.repeat + 1, workers=1)
    baseline = ensure_baselines(cfg, [obj], out)[obj.id]
    job = Job(0, args.optimizer, obj.id, args.repeat, job_seed(cfg.run_seed, args.optimizer, obj.id, args.repeat))
    rep = run_study(
        cfg, args.optimizer, obj, args.repeat, baseline, job=job, out_dir=out, hyperparams=hyper, external=external
    )
    violations = budget_check(rep, cfg.budget_seconds)
    print(
        json.dumps(
            {
                "optimizer": rep.optimizer_name,
                "objective": rep.objective_id,
                "repeat": rep.repeat_idx,
                "final_visible_raw": rep.visible_curve[-1],
                "final_visible_norm": rep.final_visible,
                "final_holdout_norm": rep.final_holdout,
                "budget_violations": violations,
                "trial_log": str(out / "trials" / f"{job.stem}.jsonl"),
            }
        )
    )
    return 0


def cmd_search(args) -> int:
    out = _out_dir(args.out)
    hyper, external = _load_config(args.config)
    names = [n.strip() for n in args.optimizers.split(",") if n.strip()]
    cfg = _study_config(args, n_repeat=args.repeats, workers=args.workers or (os.cpu_count() or 1))
    objectives = resolve_objectives(args.objectives)
    result = run_search(
        cfg,
        names,
        objectives,
        out,
        include_singles=args.singles,
        include_pairs=args.pairs,
        hyperparams=hyper,
        external=external,
    )
    extra = {"optimizer_names": names, "hyperparams": hyper, "external": external}
    write_bundle(result, cfg, out, extra)
    sys.stdout.write(summary_text(result))
    loaded = len(result.reports) - (len(result.executed) - len(result.failures))
    print(f"executed {len(result.executed)} jobs ({len(result.failures)} failed), reused {loaded} completed jobs in {out}")
    return 1 if result.gaps else 0


def cmd_report(args) -> int:
    result, cfg = load_result(args.input)
    if args.format == "table" or result.gaps:
        sys.stdout.write(summary_text(result))
        return 1 if result.gaps else 0
    sections = [
        ("aggregate", aggregate_rows(result)),
        ("matrix_visible", matrix_rows(result.aggregates["visible"])),
        ("matrix_holdout", matrix_rows(result.aggregates["holdout"])),
        ("leaderboard", leaderboard_rows(result)),
        ("curves", curve_rows(result)),
        ("timing", timing_rows(result, cfg.budget_seconds)),
    ]
    for name, rows in sections:
        sys.stdout.write(f"# {name}\n{csv_text(rows)}\n")
    return 0


def cmd_sample(args) -> int:
    space = SearchSpace.load(args.space)
    for p in sample_uniform(space, args.n, args.seed):
        print(json.dumps(p))
    return 0


def _add_budget_args(p):
    p.add_argument("--steps", type=int, default=16, help="iterations per study (N_STEP)")
    p.add_argument("--batch", type=int, default=8, help="suggestions per iteration (N_BATCH)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (default: $BBO_OUT or ./bbo_out)")
    p.add_argument("--budget", type=float, default=40.0, help="suggest+observe seconds per iteration")
    p.add_argument("--strict-budget", action="store_true", help="fail a job on a budget overrun")
    p.add_argument("--pool", type=int, default=10_000, help="random-search baseline pool size")
    p.add_argument("--runs", type=int, default=100, help="simulated random-search runs per baseline")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbo", description=__doc__)
    parser.add_argument("--list-objectives", action="store_true", help="print objective ids and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("baseline", help="build and freeze random-search baselines")
    p.add_argument("--objectives", default="all")
    _add_budget_args(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("run", help="run a single study")
    p.add_argument("--optimizer", required=True, help='base name or pair, e.g. "turbo+gpei"')
    p.add_argument("--objective", required=True)
    p.add_argument("--repeat", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON file with hyperparams/external sections")
    _add_budget_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("search", help="exhaustive search over singles and pairs")
    p.add_argument("--optimizers", default=",".join(SEARCHABLE))
    p.add_argument("--objectives", default="all")
    p.add_argument("--pairs", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--singles", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=None, help="default: number of CPUs")
    p.add_argument("--config", default=None)
    _add_budget_args(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("report", help="rebuild reports from an output directory")
    p.add_argument("--in", dest="input", default=None)
    p.add_argument("--format", choices=("csv", "table"), default="table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sample", help="draw uniform points from a space definition file")
    p.add_argument("--space", required=True)
    p.add_argument("-n", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.list_objectives:
        _print_objectives()
        return 0
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    if args.command == "report" and args.input is None:
        args.input = str(_out_dir(None))
    try:
        return args.func(args)
    except BBOError as exc:
        print(f"bbo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

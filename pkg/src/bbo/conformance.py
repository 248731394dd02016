"""Reusable suggest/observe contract checks.

``check_optimizer(factory, space)`` drives fresh optimizer instances built by
``factory(seed)`` through a short scripted session and reports which
contract clauses hold:

* ``exact_n`` -- ``suggest(n)`` returns exactly ``n`` points, ``n`` in
  ``{0, 1, 3, 8}``;
* ``domain`` -- every suggestion is a valid point of ``space``;
* ``foreign`` -- observing points the optimizer never suggested (including a
  non-finite score) is accepted, and suggesting afterwards still works;
* ``determinism`` -- two instances with the same seed and the same observe
  sequence suggest identical points;
* ``best_monotone`` -- ``history.best_score`` never increases;
* ``timing`` -- ``suggest`` on a 128-record history takes under
  ``time_limit`` seconds (after one untimed call, so process start-up of
  external optimizers is excluded).

The scripted session scores points with a fixed smooth function of their
warped coordinates, so model-based optimizers leave warm-up.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .space import SearchSpace, sample_uniform

SIZES = (0, 1, 3, 8)
CHECKS = ("exact_n", "domain", "foreign", "determinism", "best_monotone", "timing")


@dataclass
class ConformanceResult:
    name: str
    failures: dict = field(default_factory=dict)
    suggest_seconds: float = math.nan

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, check: str, why: str) -> None:
        self.failures.setdefault(check, why)

    def __str__(self) -> str:
        if self.passed:
            return f"{self.name}: ok (suggest on 128 records {self.suggest_seconds:.3f}s)"
        return f"{self.name}: " + "; ".join(f"{k}: {v}" for k, v in self.failures.items())


def score_fn(space: SearchSpace) -> Callable[[dict], float]:
    """Deterministic bowl over the warped cube with its minimum off-centre."""
    target = np.linspace(0.2, 0.7, space.warped_dim)

    def f(p):
        u = space.warp(p)
        return float(np.sum((u - target) ** 2))

    return f


def _close(opt) -> None:
    close = getattr(opt, "close", None)
    if callable(close):
        close()


def _check_points(res, space, points, n, where):
    if len(points) != n:
        res.fail("exact_n", f"{where}: suggest({n}) returned {len(points)} points")
    for p in points:
        try:
            space.validate(p)
        except DomainError as exc:
            res.fail("domain", f"{where}: {exc}")
            return


def _session(res, opt, space, f, foreign, n_rounds=3):
    """Scripted session; returns the suggestions made, in order."""
    trace = []
    best = opt.history.best_score
    for r in range(n_rounds):
        for n in SIZES:
            pts = opt.suggest(n)
            _check_points(res, space, pts, n, f"round {r}")
            trace.append(pts)
            scores = [f(p) for p in pts]
            if n == 3:
                scores[1] = math.nan
            opt.observe(pts, scores)
            if opt.history.best_score > best:
                res.fail("best_monotone", f"best_score rose from {best} to {opt.history.best_score}")
            best = opt.history.best_score
        if r == 0:
            try:
                opt.observe(foreign, [f(p) for p in foreign[:-1]] + [math.inf])
                pts = opt.suggest(8)
            except Exception as exc:  # noqa: BLE001 - any error here is the finding
                res.fail("foreign", f"{type(exc).__name__}: {exc}")
                return trace
            _check_points(res, space, pts, 8, "after foreign observe")
            trace.append(pts)
            if opt.history.best_score > best:
                res.fail("best_monotone", "best_score rose after a foreign observe")
            best = opt.history.best_score
    return trace


def check_optimizer(
    factory: Callable[[int], object],
    space: SearchSpace,
    *,
    name: str | None = None,
    seed: int = 0,
    time_limit: float = 1.0,
    history_size: int = 128,
) -> ConformanceResult:
    f = score_fn(space)
    foreign = sample_uniform(space, 6, seed + 7919)
    a, b = factory(seed), factory(seed)
    res = ConformanceResult(name or getattr(a, "name", type(a).__name__))
    try:
        trace_a = _session(res, a, space, f, foreign)
        trace_b = _session(ConformanceResult(res.name), b, space, f, foreign)
        if trace_a != trace_b:
            res.fail("determinism", "same seed and observe sequence gave different suggestions")
    except Exception as exc:  # noqa: BLE001
        res.fail("exact_n", f"session raised {type(exc).__name__}: {exc}")
    finally:
        _close(a)
        _close(b)

    c = factory(seed + 1)
    try:
        # one untimed call first so child-process start-up is not billed
        pts = c.suggest(1) + sample_uniform(space, history_size - 1, seed + 104729)
        c.observe(pts, [f(p) for p in pts])
        t0 = time.perf_counter()
        out = c.suggest(8)
        res.suggest_seconds = time.perf_counter() - t0
        _check_points(res, space, out, 8, f"{history_size}-record history")
        if res.suggest_seconds >= time_limit:
            res.fail("timing", f"suggest took {res.suggest_seconds:.3f}s on {history_size} records")
    except Exception as exc:  # noqa: BLE001
        res.fail("timing", f"{type(exc).__name__}: {exc}")
    finally:
        _close(c)
    return res

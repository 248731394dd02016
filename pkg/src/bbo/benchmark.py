"""Synthetic objective suite with paired visible/holdout noisy scores.

Five classic test functions plus four mixed-type quadratics shaped like
model hyperparameter surfaces. Each noisy evaluation returns a *visible*
score (the noiseless value plus the mean of ``n_folds`` Gaussian draws,
like a k-fold cross-validation average) and an independently seeded
*holdout* score (one draw), and only the visible score is ever passed to
optimizers.

The noise scales are frozen at half the interquartile range of each
objective's noiseless values under uniform sampling of the warped space;
``tests/test_benchmark.py`` recomputes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError
from .seeding import derive_seed
from .space import ParamSpec, SearchSpace

SUITE_VERSION = "1"
BRANIN_MIN = 0.39788735772973816


@dataclass(frozen=True)
class ObjectiveSpec:
    id: str
    space: SearchSpace
    noiseless_fn: Callable[[Mapping], float]
    f_star: float
    sigma_cv: float = 0.0
    sigma_holdout: float = 0.0
    n_folds: int = 5

    def __post_init__(self):
        if self.sigma_cv < 0 or self.sigma_holdout < 0:
            raise ValueError("noise scales must be non-negative")
        if self.n_folds < 1:
            raise ValueError("n_folds must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.space)

    def noiseless(self) -> "ObjectiveSpec":
        return replace(self, sigma_cv=0.0, sigma_holdout=0.0)


@dataclass(frozen=True)
class EvalResult:
    visible: float
    holdout: float
    noiseless: float


def evaluate(obj: ObjectiveSpec, p: Mapping, trial_seed: int) -> EvalResult:
    obj.space.validate(p)
    try:
        f = float(obj.noiseless_fn(p))
    except (ArithmeticError, ValueError):
        f = math.nan
    if not math.isfinite(f):
        return EvalResult(math.nan, math.nan, f)
    cv = np.random.default_rng(derive_seed(trial_seed, "cv")).normal(0.0, 1.0, obj.n_folds)
    ho = np.random.default_rng(derive_seed(trial_seed, "holdout")).normal(0.0, 1.0)
    visible = f + obj.sigma_cv * float(np.mean(cv))
    holdout = f + obj.sigma_holdout * float(ho)
    return EvalResult(visible, holdout, f)


def true_optimum(obj: ObjectiveSpec) -> float:
    return obj.f_star


# -- classic functions -------------------------------------------------------


def _xs(p, names):
    return np.array([float(p[n]) for n in names])


def _box(prefix, dim, low, high):
    return SearchSpace([ParamSpec.real(f"{prefix}{i}", low, high) for i in range(dim)])


def sphere(x):
    return float(np.sum(x * x))


def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def branin(x):
    x1, x2 = x
    b = 5.1 / (4 * math.pi**2)
    c = 5 / math.pi
    t = 1 / (8 * math.pi)
    return (x2 - b * x1**2 + c * x1 - 6) ** 2 + 10 * (1 - t) * math.cos(x1) + 10


def ackley(x):
    # written as two non-negative terms so the value at the origin is exactly 0
    d = len(x)
    r = math.sqrt(float(np.sum(x * x)) / d)
    return 20.0 * (1.0 - math.exp(-0.2 * r)) + (math.e - math.exp(float(np.sum(np.cos(2 * math.pi * x))) / d))


def rastrigin(x):
    return float(np.sum(x * x + 10.0 * (1.0 - np.cos(2 * math.pi * x))))


def _classic(obj_id, space, fn, f_star):
    names = space.names
    return obj_id, space, (lambda p: fn(_xs(p, names))), f_star


# -- mixed-type quadratics ---------------------------------------------------


@dataclass(frozen=True)
class MixedQuadratic:
    """``sum w_i (u_i - u_i*)^2`` over warped numeric coordinates plus a fixed
    penalty for every categorical choice other than the designated one.

    Integer optima are given as native levels so the minimum 0 is reachable.
    """

    space: SearchSpace
    optimum: Mapping
    weights: Mapping
    penalties: Mapping

    def __call__(self, p) -> float:
        total = 0.0
        for s in self.space.specs:
            v = p[s.name]
            if s.kind == "categorical":
                total += self.penalties[s.name].get(v, 0.0)
                continue
            if s.kind == "boolean":
                u, ustar = float(bool(v)), float(bool(self.optimum[s.name]))
            elif s.kind == "integer":
                u, ustar = float(s._to_unit(v)), float(s._to_unit(self.optimum[s.name]))
            else:
                u, ustar = float(s._to_unit(v)), float(self.optimum[s.name])
            total += self.weights[s.name] * (u - ustar) ** 2
        return total


def _mixed_dt():
    space = SearchSpace(
        [
            ParamSpec.integer("max_depth", 1, 32),
            ParamSpec.integer("min_samples_leaf", 1, 64, "log"),
            ParamSpec.real("min_impurity_decrease", 1e-6, 1e-1, "log"),
            ParamSpec.categorical("criterion", ["gini", "entropy", "log_loss"]),
        ]
    )
    return MixedQuadratic(
        space,
        optimum={"max_depth": 9, "min_samples_leaf": 4, "min_impurity_decrease": 0.3},
        weights={"max_depth": 2.0, "min_samples_leaf": 1.0, "min_impurity_decrease": 3.0},
        penalties={"criterion": {"gini": 0.15, "log_loss": 0.3}},
    )


def _mixed_mlp():
    space = SearchSpace(
        [
            ParamSpec.real("learning_rate", 1e-5, 1e-1, "log"),
            ParamSpec.real("alpha", 1e-6, 1e-1, "log"),
            ParamSpec.integer("hidden_units", 16, 512, "log"),
            ParamSpec.integer("batch_size", 16, 256),
            ParamSpec.categorical("activation", ["relu", "tanh", "logistic"]),
        ]
    )
    return MixedQuadratic(
        space,
        optimum={"learning_rate": 0.65, "alpha": 0.25, "hidden_units": 128, "batch_size": 64},
        weights={"learning_rate": 4.0, "alpha": 0.5, "hidden_units": 1.5, "batch_size": 1.0},
        penalties={"activation": {"tanh": 0.2, "logistic": 0.5}},
    )


def _mixed_svm():
    space = SearchSpace(
        [
            ParamSpec.real("C", 1e-3, 1e3, "log"),
            ParamSpec.real("gamma", 1e-4, 1e1, "log"),
            ParamSpec.integer("degree", 1, 5),
            ParamSpec.categorical("kernel", ["rbf", "poly", "sigmoid", "linear"]),
            ParamSpec.boolean("shrinking"),
        ]
    )
    return MixedQuadratic(
        space,
        optimum={"C": 0.7, "gamma": 0.35, "degree": 3, "shrinking": True},
        weights={"C": 3.0, "gamma": 3.0, "degree": 0.5, "shrinking": 0.1},
        penalties={"kernel": {"poly": 0.3, "sigmoid": 0.6, "linear": 0.4}},
    )


def _mixed_gbm():
    space = SearchSpace(
        [
            ParamSpec.real("learning_rate", 1e-3, 1.0, "log"),
            ParamSpec.integer("n_estimators", 10, 1000, "log"),
            ParamSpec.integer("max_depth", 2, 12),
            ParamSpec.real("subsample", 0.5, 1.0),
            ParamSpec.categorical("loss", ["squared", "absolute", "huber"]),
        ]
    )
    return MixedQuadratic(
        space,
        optimum={"learning_rate": 0.55, "n_estimators": 200, "max_depth": 6, "subsample": 0.85},
        weights={"learning_rate": 3.0, "n_estimators": 2.0, "max_depth": 1.0, "subsample": 0.5},
        penalties={"loss": {"squared": 0.1, "absolute": 0.25}},
    )


# 0.5 * IQR of the noiseless value under uniform warped sampling (10**6 draws, seed 12345)
SIGMA_CV = {
    "sphere-3d": 9.194335,
    "rosenbrock-2d": 183.738258,
    "branin-2d": 32.345495,
    "ackley-4d": 1.076884,
    "rastrigin-3d": 12.232336,
    "mixed-dt": 0.401718,
    "mixed-mlp": 0.371247,
    "mixed-svm": 0.411871,
    "mixed-gbm": 0.264939,
}


def _definitions():
    defs = [
        _classic("sphere-3d", _box("x", 3, -5.0, 5.0), sphere, 0.0),
        _classic(
            "rosenbrock-2d",
            SearchSpace([ParamSpec.real("x0", -2.0, 2.0), ParamSpec.real("x1", -1.0, 3.0)]),
            rosenbrock,
            0.0,
        ),
        _classic(
            "branin-2d",
            SearchSpace([ParamSpec.real("x0", -5.0, 10.0), ParamSpec.real("x1", 0.0, 15.0)]),
            branin,
            BRANIN_MIN,
        ),
        _classic("ackley-4d", _box("x", 4, -5.0, 5.0), ackley, 0.0),
        _classic("rastrigin-3d", _box("x", 3, -5.12, 5.12), rastrigin, 0.0),
    ]
    for obj_id, make in (
        ("mixed-dt", _mixed_dt),
        ("mixed-mlp", _mixed_mlp),
        ("mixed-svm", _mixed_svm),
        ("mixed-gbm", _mixed_gbm),
    ):
        fn = make()
        defs.append((obj_id, fn.space, fn, 0.0))
    return defs


def suite() -> list[ObjectiveSpec]:
    out = []
    for obj_id, space, fn, f_star in _definitions():
        sigma = SIGMA_CV[obj_id]
        out.append(ObjectiveSpec(obj_id, space, fn, f_star, sigma_cv=sigma, sigma_holdout=sigma))
    return out


def get_objective(obj_id: str) -> ObjectiveSpec:
    for obj in suite():
        if obj.id == obj_id:
            return obj
    aliases = {o.id.split("-")[0]: o for o in suite() if not o.id.startswith("mixed")}
    if obj_id in aliases:
        return aliases[obj_id]
    raise DomainError(f"unknown objective {obj_id!r}; known: {[o.id for o in suite()]}")


def resolve_objectives(spec: str) -> list[ObjectiveSpec]:
    """``"all"`` or a comma-separated list of ids (or short aliases like ``branin``)."""
    if spec.strip() == "all":
        return suite()
    return [get_objective(s.strip()) for s in spec.split(",") if s.strip()]


def iqr_noise_scale(obj_id: str, n: int = 10**5, seed: int = 0) -> float:
    """Half the interquartile range of noiseless values under uniform sampling."""
    from .space import sample_uniform

    for oid, space, fn, _ in _definitions():
        if oid == obj_id:
            vals = np.array([fn(p) for p in sample_uniform(space, n, seed)])
            q1, q3 = np.percentile(vals, [25, 75])
            return 0.5 * float(q3 - q1)
    raise DomainError(f"unknown objective {obj_id!r}")

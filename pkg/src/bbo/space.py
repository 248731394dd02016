"""Typed parameter spaces and their unit-hypercube ("warped") view.

Every optimizer reasons in the warped view: one coordinate per real,
integer or boolean parameter and a one-hot block per categorical. Native
points are plain ``dict`` objects mapping parameter names to values.

The on-disk space definition is a JSON list of objects, one per parameter::

    [
      {"name": "lr", "kind": "real", "low": 1e-5, "high": 0.1, "scale": "log"},
      {"name": "depth", "kind": "integer", "low": 1, "high": 12},
      {"name": "act", "kind": "categorical", "choices": ["relu", "tanh"]},
      {"name": "bias", "kind": "boolean"}
    ]

``scale`` defaults to ``"linear"``. A top-level object with a ``"params"``
key holding that list is accepted as well.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from numbers import Integral, Real
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DomainError, ShapeError

KINDS = ("real", "integer", "categorical", "boolean")
SCALES = ("linear", "log")

ParamVector = dict


@dataclass(frozen=True)
class ParamSpec:
    """Domain of a single hyperparameter."""

    name: str
    kind: str
    low: float | int | None = None
    high: float | int | None = None
    choices: tuple = ()
    scale: str = "linear"

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError(f"parameter name must be a non-empty string, got {self.name!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"{self.name}: unknown kind {self.kind!r}")
        if self.scale not in SCALES:
            raise ConfigError(f"{self.name}: unknown scale {self.scale!r}")
        object.__setattr__(self, "choices", tuple(self.choices))
        if self.kind == "boolean":
            object.__setattr__(self, "low", 0)
            object.__setattr__(self, "high", 1)
            if self.scale != "linear":
                raise ConfigError(f"{self.name}: boolean parameters cannot be log-scaled")
        elif self.kind == "categorical":
            if len(self.choices) < 2:
                raise ConfigError(f"{self.name}: categorical needs at least 2 choices")
            if len(set(self.choices)) != len(self.choices):
                raise ConfigError(f"{self.name}: duplicate categorical choices")
            if self.scale != "linear":
                raise ConfigError(f"{self.name}: categorical parameters cannot be log-scaled")
        else:
            if self.low is None or self.high is None:
                raise ConfigError(f"{self.name}: {self.kind} parameter needs low and high")
            if self.kind == "integer":
                if int(self.low) != self.low or int(self.high) != self.high:
                    raise ConfigError(f"{self.name}: integer bounds must be integral")
                object.__setattr__(self, "low", int(self.low))
                object.__setattr__(self, "high", int(self.high))
                if self.low > self.high:
                    raise ConfigError(f"{self.name}: need low <= high")
            else:
                object.__setattr__(self, "low", float(self.low))
                object.__setattr__(self, "high", float(self.high))
                if not (math.isfinite(self.low) and math.isfinite(self.high)):
                    raise ConfigError(f"{self.name}: bounds must be finite")
                if not self.low < self.high:
                    raise ConfigError(f"{self.name}: need low < high")
            if self.scale == "log" and self.low <= 0:
                raise ConfigError(f"{self.name}: log scale requires low > 0")

    @classmethod
    def real(cls, name, low, high, scale="linear") -> "ParamSpec":
        return cls(name, "real", low, high, scale=scale)

    @classmethod
    def integer(cls, name, low, high, scale="linear") -> "ParamSpec":
        return cls(name, "integer", low, high, scale=scale)

    @classmethod
    def categorical(cls, name, choices) -> "ParamSpec":
        return cls(name, "categorical", choices=tuple(choices))

    @classmethod
    def boolean(cls, name) -> "ParamSpec":
        return cls(name, "boolean")

    @property
    def width(self) -> int:
        return len(self.choices) if self.kind == "categorical" else 1

    @property
    def is_log(self) -> bool:
        return self.scale == "log"

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind in ("real", "integer"):
            d["low"] = self.low
            d["high"] = self.high
            d["scale"] = self.scale
        elif self.kind == "categorical":
            d["choices"] = list(self.choices)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParamSpec":
        unknown = set(d) - {"name", "kind", "low", "high", "choices", "scale"}
        if unknown:
            raise ConfigError(f"unknown parameter fields {sorted(unknown)} in {dict(d)!r}")
        try:
            return cls(
                name=d["name"],
                kind=d["kind"],
                low=d.get("low"),
                high=d.get("high"),
                choices=tuple(d.get("choices", ())),
                scale=d.get("scale", "linear"),
            )
        except KeyError as exc:
            raise ConfigError(f"parameter entry missing {exc.args[0]!r}: {dict(d)!r}") from None

    # -- scalar conversions -------------------------------------------------

    def check(self, v) -> None:
        """Raise :class:`DomainError` unless ``v`` is a valid native value."""
        ok = True
        if self.kind == "categorical":
            ok = v in self.choices
        elif self.kind == "boolean":
            ok = isinstance(v, (bool, np.bool_))
        elif self.kind == "integer":
            ok = (
                isinstance(v, (Integral, Real))
                and not isinstance(v, (bool, np.bool_))
                and math.isfinite(v)
                and int(v) == v
                and self.low <= v <= self.high
            )
        else:
            ok = (
                isinstance(v, Real)
                and not isinstance(v, (bool, np.bool_))
                and math.isfinite(v)
                and self.low <= v <= self.high
            )
        if not ok:
            raise DomainError(f"value {v!r} outside the domain of parameter {self.name!r}")

    def _to_unit(self, v):
        """Continuous forward map for real/integer/boolean (vectorized)."""
        if self.kind == "boolean":
            return np.asarray(v, dtype=float)
        if self.low == self.high:
            return np.zeros_like(np.asarray(v, dtype=float))
        if self.is_log:
            lo, hi = math.log(self.low), math.log(self.high)
            return (np.log(np.asarray(v, dtype=float)) - lo) / (hi - lo)
        return (np.asarray(v, dtype=float) - self.low) / (self.high - self.low)

    def _from_unit(self, u):
        """Continuous inverse map, before any rounding (vectorized)."""
        u = np.asarray(u, dtype=float)
        if self.is_log:
            lo, hi = math.log(self.low), math.log(self.high)
            return np.exp(lo + u * (hi - lo))
        return self.low + u * (self.high - self.low)


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5)


@dataclass(frozen=True)
class SearchSpace:
    """Ordered collection of :class:`ParamSpec` with a warped view."""

    specs: tuple
    offsets: tuple = field(init=False, repr=False)
    warped_dim: int = field(init=False)

    def __init__(self, specs: Sequence[ParamSpec]):
        specs = tuple(specs)
        if not specs:
            raise ConfigError("search space needs at least one parameter")
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ConfigError(f"duplicate parameter names: {dup}")
        offsets, pos = [], 0
        for s in specs:
            offsets.append(pos)
            pos += s.width
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "warped_dim", pos)

    def __len__(self) -> int:
        return len(self.specs)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.specs]

    @property
    def categorical_mask(self) -> np.ndarray:
        """Boolean mask over warped coordinates that belong to one-hot blocks."""
        mask = np.zeros(self.warped_dim, dtype=bool)
        for s, off in zip(self.specs, self.offsets):
            if s.kind == "categorical":
                mask[off : off + s.width] = True
        return mask

    def blocks(self):
        """Yield ``(spec, slice)`` pairs over the warped coordinates."""
        for s, off in zip(self.specs, self.offsets):
            yield s, slice(off, off + s.width)

    # -- validation ---------------------------------------------------------

    def validate(self, p: Mapping) -> None:
        missing = [n for n in self.names if n not in p]
        extra = [k for k in p if k not in set(self.names)]
        if missing or extra:
            raise DomainError(f"parameter vector mismatch: missing={missing} unexpected={extra}")
        for s in self.specs:
            s.check(p[s.name])

    def contains(self, p: Mapping) -> bool:
        try:
            self.validate(p)
        except DomainError:
            return False
        return True

    # -- warping -----------------------------------------------------------

    def warp(self, p: Mapping) -> np.ndarray:
        """Map a native point into ``[0, 1]^warped_dim``."""
        self.validate(p)
        u = np.zeros(self.warped_dim)
        for s, sl in self.blocks():
            v = p[s.name]
            if s.kind == "categorical":
                u[sl.start + s.choices.index(v)] = 1.0
            elif s.kind == "boolean":
                u[sl.start] = 1.0 if v else 0.0
            else:
                u[sl.start] = float(np.clip(s._to_unit(v), 0.0, 1.0))
        return u

    def warp_many(self, points: Sequence[Mapping]) -> np.ndarray:
        if len(points) == 0:
            return np.zeros((0, self.warped_dim))
        return np.vstack([self.warp(p) for p in points])

    def decode(self, U) -> list[np.ndarray]:
        """Vectorized unwarp: one array of native values per spec."""
        U = np.asarray(U, dtype=float)
        if U.ndim != 2 or U.shape[1] != self.warped_dim:
            raise ShapeError(f"expected (n, {self.warped_dim}) warped array, got {U.shape}")
        if not np.all(np.isfinite(U)):
            raise ShapeError("warped coordinates must be finite")
        U = np.clip(U, 0.0, 1.0)
        cols = []
        for s, sl in self.blocks():
            block = U[:, sl]
            if s.kind == "categorical":
                cols.append(np.argmax(block, axis=1))
            elif s.kind == "boolean":
                cols.append(block[:, 0] >= 0.5)
            elif s.kind == "integer":
                v = _round_half_up(s._from_unit(block[:, 0]))
                cols.append(np.clip(v, s.low, s.high).astype(np.int64))
            else:
                cols.append(np.clip(s._from_unit(block[:, 0]), s.low, s.high))
        return cols

    def encode(self, cols: Sequence[np.ndarray]) -> np.ndarray:
        """Inverse of :meth:`decode` (categoricals given as choice indices)."""
        n = len(cols[0]) if cols else 0
        U = np.zeros((n, self.warped_dim))
        for (s, sl), c in zip(self.blocks(), cols):
            if s.kind == "categorical":
                U[np.arange(n), sl.start + np.asarray(c, dtype=int)] = 1.0
            elif s.kind == "boolean":
                U[:, sl.start] = np.asarray(c, dtype=float)
            else:
                U[:, sl.start] = np.clip(s._to_unit(c), 0.0, 1.0)
        return U

    def snap(self, U) -> np.ndarray:
        """Project arbitrary warped rows onto the images of valid points."""
        return self.encode(self.decode(U))

    def _row_to_point(self, cols, i) -> dict:
        p = {}
        for s, c in zip(self.specs, cols):
            if s.kind == "categorical":
                p[s.name] = s.choices[int(c[i])]
            elif s.kind == "boolean":
                p[s.name] = bool(c[i])
            elif s.kind == "integer":
                p[s.name] = int(c[i])
            else:
                p[s.name] = float(c[i])
        return p

    def unwarp(self, u) -> dict:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.warped_dim,):
            raise ShapeError(f"expected {self.warped_dim} warped coordinates, got shape {u.shape}")
        return self._row_to_point(self.decode(u[None, :]), 0)

    def unwarp_many(self, U) -> list[dict]:
        U = np.asarray(U, dtype=float)
        if U.ndim == 2 and U.shape[0] == 0:
            return []
        cols = self.decode(U)
        return [self._row_to_point(cols, i) for i in range(U.shape[0])]

    # -- serialization ------------------------------------------------------

    def to_dicts(self) -> list[dict]:
        return [s.to_dict() for s in self.specs]

    @classmethod
    def from_dicts(cls, entries) -> "SearchSpace":
        if isinstance(entries, Mapping):
            if "params" not in entries:
                raise ConfigError("space definition object must have a 'params' list")
            entries = entries["params"]
        if not isinstance(entries, list):
            raise ConfigError("space definition must be a list of parameter objects")
        return cls([ParamSpec.from_dict(e) for e in entries])

    @classmethod
    def load(cls, path) -> "SearchSpace":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dicts(data)


def sample_uniform(space: SearchSpace, n: int, seed=None) -> list[dict]:
    """``n`` i.i.d. uniform draws in the warped view, unwarped."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(seed)
    if n == 0:
        return []
    return space.unwarp_many(rng.random((n, space.warped_dim)))


def latin_hypercube_unit(space: SearchSpace, n: int, rng: np.random.Generator) -> np.ndarray:
    """Warped LHS design; categorical blocks get a uniformly drawn one-hot."""
    if n < 1:
        raise ValueError("latin hypercube needs n >= 1")
    U = np.zeros((n, space.warped_dim))
    for s, sl in space.blocks():
        if s.kind == "categorical":
            idx = rng.integers(0, s.width, size=n)
            U[np.arange(n), sl.start + idx] = 1.0
        else:
            strata = rng.permutation(n)
            U[:, sl.start] = (strata + rng.random(n)) / n
    return U


def latin_hypercube(space: SearchSpace, n: int, seed=None) -> list[dict]:
    """Stratified design: each non-categorical coordinate hits every one of
    ``n`` equal-width strata exactly once."""
    rng = np.random.default_rng(seed)
    return space.unwarp_many(latin_hypercube_unit(space, n, rng))

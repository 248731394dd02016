"""Search-space domains, warping and samplers."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbo.errors import ConfigError, DomainError, ShapeError
from bbo.space import ParamSpec, SearchSpace, latin_hypercube, latin_hypercube_unit, sample_uniform

from conftest import spaces


class TestParamSpec:
    def test_real_needs_low_below_high(self):
        with pytest.raises(ConfigError):
            ParamSpec.real("x", 1.0, 1.0)

    def test_integer_allows_single_level(self):
        s = ParamSpec.integer("n", 3, 3)
        s.check(3)
        with pytest.raises(DomainError):
            s.check(4)

    def test_categorical_needs_two_choices(self):
        with pytest.raises(ConfigError):
            ParamSpec.categorical("c", ["only"])

    def test_log_requires_positive_low(self):
        with pytest.raises(ConfigError):
            ParamSpec.real("x", 0.0, 1.0, "log")
        with pytest.raises(ConfigError):
            ParamSpec.integer("n", 0, 10, "log")

    @pytest.mark.parametrize("v", [True, 2.5, float("nan"), 11, -1])
    def test_integer_rejects(self, v):
        with pytest.raises(DomainError):
            ParamSpec.integer("n", 0, 10).check(v)

    def test_boolean_rejects_ints(self):
        with pytest.raises(DomainError):
            ParamSpec.boolean("b").check(1)

    def test_dict_round_trip(self):
        for s in (
            ParamSpec.real("lr", 1e-5, 1.0, "log"),
            ParamSpec.integer("n", 1, 9),
            ParamSpec.categorical("k", ["x", "y"]),
            ParamSpec.boolean("b"),
        ):
            assert ParamSpec.from_dict(s.to_dict()) == s

    def test_from_dict_rejects_unknown_fields(self):
        with pytest.raises(ConfigError):
            ParamSpec.from_dict({"name": "x", "kind": "real", "low": 0, "high": 1, "step": 2})


class TestWarp:
    def test_log_midpoint(self):
        sp = SearchSpace([ParamSpec.real("x", 1.0, 100.0, "log")])
        assert sp.warp({"x": 10.0})[0] == pytest.approx(0.5, abs=1e-15)

    def test_integer_lower_bound(self):
        sp = SearchSpace([ParamSpec.integer("n", 0, 10)])
        assert sp.warp({"n": 0})[0] == 0.0

    def test_categorical_one_hot(self):
        sp = SearchSpace([ParamSpec.categorical("c", ["a", "b", "c", "d"])])
        np.testing.assert_array_equal(sp.warp({"c": "c"}), [0, 0, 1, 0])

    def test_layout_and_dim(self, mixed_space):
        assert mixed_space.warped_dim == 1 + 1 + 3 + 1
        np.testing.assert_array_equal(mixed_space.categorical_mask, [0, 0, 1, 1, 1, 0])

    def test_missing_or_extra_keys(self, mixed_space):
        p = sample_uniform(mixed_space, 1, 0)[0]
        with pytest.raises(DomainError):
            mixed_space.warp({k: v for k, v in p.items() if k != "lr"})
        with pytest.raises(DomainError):
            mixed_space.warp({**p, "extra": 1})


class TestUnwarp:
    def test_log_midpoint(self):
        sp = SearchSpace([ParamSpec.real("x", 1.0, 100.0, "log")])
        assert sp.unwarp([0.5])["x"] == pytest.approx(10.0, rel=1e-12)

    def test_categorical_tie_lowest_index(self):
        sp = SearchSpace([ParamSpec.categorical("c", ["a", "b", "c", "d"])])
        assert sp.unwarp([0.3, 0.3, 0.2, 0.2])["c"] == "a"

    def test_integer_rounding(self):
        # 0.649 * 10 = 6.49 -> 6 and 0.651 * 10 = 6.51 -> 7
        sp = SearchSpace([ParamSpec.integer("n", 0, 10)])
        assert sp.unwarp([0.649])["n"] == 6
        assert sp.unwarp([0.651])["n"] == 7
        assert sp.unwarp([0.65])["n"] == 7  # exact half rounds up

    def test_native_types(self, mixed_space):
        p = mixed_space.unwarp(np.full(mixed_space.warped_dim, 0.7))
        assert type(p["lr"]) is float
        assert type(p["depth"]) is int
        assert type(p["flag"]) is bool
        assert p["kind"] in ("a", "b", "c")

    def test_boolean_threshold(self):
        sp = SearchSpace([ParamSpec.boolean("b")])
        assert sp.unwarp([0.49])["b"] is False
        assert sp.unwarp([0.5])["b"] is True

    def test_out_of_cube_coords_clip(self, mixed_space):
        p = mixed_space.unwarp(np.array([-3.0, 9.0, 0.0, 0.0, 0.0, 2.0]))
        mixed_space.validate(p)
        assert p["lr"] == pytest.approx(1e-4)
        assert p["depth"] == 12

    def test_shape_checked(self, mixed_space):
        with pytest.raises(ShapeError):
            mixed_space.unwarp(np.zeros(3))
        with pytest.raises(ShapeError):
            mixed_space.unwarp_many(np.full((2, 6), np.nan))


class TestRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(space=spaces(), seed=st.integers(0, 2**32 - 1))
    def test_unwarp_warp_is_identity(self, space, seed):
        for p in sample_uniform(space, 5, seed):
            q = space.unwarp(space.warp(p))
            for s in space.specs:
                if s.kind == "real":
                    assert q[s.name] == pytest.approx(p[s.name], rel=1e-12, abs=0)
                else:
                    assert q[s.name] == p[s.name]

    @settings(max_examples=100, deadline=None)
    @given(space=spaces(), seed=st.integers(0, 2**32 - 1))
    def test_warp_image_in_unit_cube(self, space, seed):
        U = space.warp_many(sample_uniform(space, 8, seed))
        assert U.shape == (8, space.warped_dim)
        assert np.all((U >= 0) & (U <= 1))

    @settings(max_examples=100, deadline=None)
    @given(space=spaces(), seed=st.integers(0, 2**32 - 1), n=st.integers(1, 20))
    def test_samplers_stay_in_domain(self, space, seed, n):
        for p in sample_uniform(space, n, seed) + latin_hypercube(space, n, seed):
            space.validate(p)

    @settings(max_examples=50, deadline=None)
    @given(space=spaces(), seed=st.integers(0, 2**32 - 1))
    def test_arbitrary_unit_rows_decode_to_valid_points(self, space, seed):
        U = np.random.default_rng(seed).random((10, space.warped_dim))
        for p in space.unwarp_many(U):
            space.validate(p)

    def test_snap_is_idempotent(self, mixed_space):
        U = np.random.default_rng(3).random((50, mixed_space.warped_dim))
        S = mixed_space.snap(U)
        np.testing.assert_array_equal(mixed_space.snap(S), S)


class TestSampleUniform:
    def test_zero(self, mixed_space):
        assert sample_uniform(mixed_space, 0, 1) == []

    def test_three_valid(self, mixed_space):
        pts = sample_uniform(mixed_space, 3, 1)
        assert len(pts) == 3
        assert all(mixed_space.contains(p) for p in pts)

    def test_deterministic(self, mixed_space):
        assert sample_uniform(mixed_space, 10, 5) == sample_uniform(mixed_space, 10, 5)
        assert sample_uniform(mixed_space, 10, 5) != sample_uniform(mixed_space, 10, 6)


class TestLatinHypercube:
    def test_four_strata(self):
        sp = SearchSpace([ParamSpec.real("x", 0.0, 1.0)])
        for seed in range(20):
            U = latin_hypercube_unit(sp, 4, np.random.default_rng(seed))
            strata = np.sort(np.minimum(np.floor(U[:, 0] * 4), 3))
            np.testing.assert_array_equal(strata, [0, 1, 2, 3])

    def test_every_dimension_stratified(self):
        sp = SearchSpace([ParamSpec.real(f"x{i}", 0.0, 1.0) for i in range(5)])
        U = latin_hypercube_unit(sp, 16, np.random.default_rng(0))
        for j in range(5):
            np.testing.assert_array_equal(np.sort(np.floor(U[:, j] * 16)), np.arange(16))

    def test_single_point(self):
        sp = SearchSpace([ParamSpec.real("x", 0.0, 1.0)])
        U = latin_hypercube_unit(sp, 1, np.random.default_rng(0))
        assert U.shape == (1, 1) and 0.0 <= U[0, 0] <= 1.0

    def test_deterministic(self, mixed_space):
        assert latin_hypercube(mixed_space, 8, 11) == latin_hypercube(mixed_space, 8, 11)


class TestSpaceFile:
    def test_load_list_and_object(self, tmp_path, mixed_space):
        a = tmp_path / "a.json"
        a.write_text(json.dumps(mixed_space.to_dicts()))
        b = tmp_path / "b.json"
        b.write_text(json.dumps({"params": mixed_space.to_dicts()}))
        assert SearchSpace.load(a) == mixed_space
        assert SearchSpace.load(b) == mixed_space

    def test_bad_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            SearchSpace.load(p)

    def test_duplicate_names(self):
        with pytest.raises(ConfigError):
            SearchSpace([ParamSpec.boolean("a"), ParamSpec.boolean("a")])

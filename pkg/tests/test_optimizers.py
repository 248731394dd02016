"""Base contract, the five searchable optimizers and random search."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbo.conformance import check_optimizer, score_fn
from bbo.errors import ConfigError, ShapeError, StateError
from bbo.optimizers import OPTIMIZERS, RANDOM, SEARCHABLE
from bbo.optimizers.anneal import anneal_propose, schedule
from bbo.optimizers.base import ObservationHistory
from bbo.optimizers.de import de_step
from bbo.optimizers.tpe import MIN_BANDWIDTH, tpe_propose, tpe_split
from bbo.optimizers.turbo import L_INIT, L_MIN, TrustRegionState, trust_region_update
from bbo.space import ParamSpec, SearchSpace, sample_uniform
from bbo.surrogate import expected_improvement, gp_fit

ALL = list(SEARCHABLE) + [RANDOM]


def history_of(space, scores, seed=0):
    h = ObservationHistory(space)
    for p, s in zip(sample_uniform(space, len(scores), seed), scores):
        h.append(p, s)
    return h


def drive(opt, f, n_iter, n_batch=8):
    for _ in range(n_iter):
        pts = opt.suggest(n_batch)
        opt.observe(pts, [f(p) for p in pts])
    return opt


@pytest.fixture
def box2():
    return SearchSpace([ParamSpec.real("x0", 0.0, 1.0), ParamSpec.real("x1", -5.0, 5.0)])


class TestObservationHistory:
    def test_grows_by_batch(self, mixed_space):
        h = history_of(mixed_space, list(range(8)))
        assert len(h) == 8 and h.n_finite == 8

    def test_nan_stored_not_best(self, mixed_space):
        h = history_of(mixed_space, [3.0, math.nan, 1.0])
        best = h.best_score
        h.append(sample_uniform(mixed_space, 1, 9)[0], math.nan)
        assert len(h) == 4 and h.n_finite == 2
        assert h.best_score == best == 1.0

    def test_earliest_tie_wins(self, mixed_space):
        pts = sample_uniform(mixed_space, 2, 3)
        h = ObservationHistory(mixed_space)
        h.append(pts[0], 1.0)
        h.append(pts[1], 1.0)
        assert h.best_params == pts[0]

    def test_finite_arrays_skip_failures(self, mixed_space):
        h = history_of(mixed_space, [1.0, math.inf, 2.0])
        X, y = h.finite_arrays()
        assert X.shape == (2, mixed_space.warped_dim)
        np.testing.assert_array_equal(y, [1.0, 2.0])


class TestContract:
    @pytest.mark.parametrize("name", ALL)
    def test_n_zero_is_empty(self, name, mixed_space):
        opt = OPTIMIZERS[name](mixed_space, 0)
        assert opt.suggest(0) == []

    @pytest.mark.parametrize("name", ALL)
    def test_batch_of_eight_valid(self, name, mixed_space):
        f = score_fn(mixed_space)
        opt = drive(OPTIMIZERS[name](mixed_space, 1), f, 3)
        pts = opt.suggest(8)
        assert len(pts) == 8
        for p in pts:
            mixed_space.validate(p)

    @pytest.mark.parametrize("name", ALL)
    def test_deterministic(self, name, mixed_space):
        f = score_fn(mixed_space)
        a = drive(OPTIMIZERS[name](mixed_space, 5), f, 3)
        b = drive(OPTIMIZERS[name](mixed_space, 5), f, 3)
        assert a.suggest(8) == b.suggest(8)
        assert a.history.records == b.history.records

    @pytest.mark.parametrize("name", ALL)
    def test_conformance_suite(self, name, mixed_space):
        res = check_optimizer(lambda s: OPTIMIZERS[name](mixed_space, s), mixed_space)
        assert res.passed, str(res)

    @pytest.mark.parametrize("name", ALL)
    def test_unknown_hyperparameter(self, name, mixed_space):
        with pytest.raises(ConfigError):
            OPTIMIZERS[name](mixed_space, 0, bogus=1)

    def test_observe_length_mismatch(self, mixed_space):
        opt = OPTIMIZERS["tpe"](mixed_space, 0)
        with pytest.raises(ShapeError):
            opt.observe(sample_uniform(mixed_space, 2, 0), [1.0])

    def test_warmup_length(self, mixed_space):
        assert OPTIMIZERS["gpei"](mixed_space, 0).init_points == 8
        one = SearchSpace([ParamSpec.real("x", 0, 1)])
        assert OPTIMIZERS["gpei"](one, 0).init_points == 2
        assert OPTIMIZERS["de"](one, 0).init_points == 4

    def test_foreign_observations_used_in_fit(self, box2):
        opt = OPTIMIZERS["gpei"](box2, 0)
        foreign = sample_uniform(box2, 10, 42)
        opt.observe(foreign, [p["x0"] for p in foreign])
        assert not opt.in_warmup
        opt.suggest(2)
        assert opt.selection_log[0].X.shape == (10, 2)

    @settings(max_examples=15, deadline=None)
    @given(name=st.sampled_from(ALL), seed=st.integers(0, 2**31), fail_rate=st.floats(0, 0.5))
    def test_best_score_monotone(self, name, seed, fail_rate):
        sp = SearchSpace([ParamSpec.real("x", -1, 1), ParamSpec.categorical("c", ["a", "b"])])
        rng = np.random.default_rng(seed)
        opt = OPTIMIZERS[name](sp, seed)
        best = math.inf
        for _ in range(4):
            pts = opt.suggest(8)
            scores = [math.nan if rng.random() < fail_rate else p["x"] ** 2 for p in pts]
            opt.observe(pts, scores)
            assert opt.history.best_score <= best
            best = opt.history.best_score


class TestTpe:
    def test_split_eight_quarter(self, box2):
        good, bad = tpe_split(history_of(box2, list(range(8))), 0.25)
        assert len(good) == 2 and len(bad) == 6
        assert [s for _, s in good] == [0, 1]

    def test_split_one_record(self, box2):
        good, bad = tpe_split(history_of(box2, [3.0]), 0.25)
        assert len(good) == 1 and bad == []

    def test_split_ten_half(self, box2):
        good, bad = tpe_split(history_of(box2, list(range(10))[::-1]), 0.5)
        assert len(good) == 5 and len(bad) == 5
        assert max(s for _, s in good) < min(s for _, s in bad)

    def test_split_ignores_non_finite(self, box2):
        good, bad = tpe_split(history_of(box2, [math.nan] * 3 + [1.0, 2.0, 3.0, 4.0]), 0.25)
        assert len(good) + len(bad) == 4 and len(good) == 1

    def test_split_float_product(self, box2):
        # 0.1 * 30 is 3.0000000000000004 in floating point; the good set is still 3
        good, _ = tpe_split(history_of(box2, list(range(30))), 0.1)
        assert len(good) == 3

    def test_split_needs_finite(self, box2):
        with pytest.raises(StateError):
            tpe_split(history_of(box2, [math.nan]), 0.25)

    def test_concentrates_at_identical_good_points(self, box2):
        p = {"x0": 0.3, "x1": 1.0}
        u = box2.warp(p)
        good = [(p, 0.0)] * 5
        hits = 0
        for seed in range(500):
            q = tpe_propose(box2, good, [], seed=seed)
            hits += bool(np.all(np.abs(box2.warp(q) - u) <= 3 * MIN_BANDWIDTH))
        assert hits / 500 > 0.99

    def test_empty_bad_is_good_density_argmax(self, box2):
        # a single far-away bad point has density below the floor at every
        # candidate, so the ratio ordering reduces to the good density alone
        good = [({"x0": 0.1, "x1": -4.0}, 0.0), ({"x0": 0.12, "x1": -4.1}, 0.1)]
        far = [({"x0": 1.0, "x1": 5.0}, 9.0)]
        for seed in range(20):
            assert tpe_propose(box2, good, [], seed=seed) == tpe_propose(box2, good, far, seed=seed)

    def test_deterministic(self, mixed_space):
        h = history_of(mixed_space, list(np.random.default_rng(0).normal(size=12)))
        good, bad = tpe_split(h)
        assert tpe_propose(mixed_space, good, bad, seed=7) == tpe_propose(mixed_space, good, bad, seed=7)


class TestGpei:
    def test_choice_maximizes_logged_ei(self, mixed_space):
        f = score_fn(mixed_space)
        opt = drive(OPTIMIZERS["gpei"](mixed_space, 3), f, 2)
        opt.suggest(8)
        assert len(opt.selection_log) == 8
        for entry in opt.selection_log:
            m = gp_fit(entry.X, entry.y, opt.gp_config)
            mu, sigma = m.predict(entry.candidates)
            ei = expected_improvement(mu, sigma, entry.f_best)
            assert ei[entry.chosen] == pytest.approx(ei.max(), rel=1e-12)

    def test_constant_liar_gives_distinct_points(self, box2):
        f = score_fn(box2)
        opt = drive(OPTIMIZERS["gpei"](box2, 0), f, 2)
        pts = opt.suggest(8)
        assert len({tuple(sorted(p.items())) for p in pts}) == 8


class TestTrustRegion:
    def test_third_success_doubles(self):
        st_ = TrustRegionState(length=0.4, success_streak=2)
        new = trust_region_update(st_, batch_best=0.0, incumbent=1.0)
        assert new.length == 0.8 and new.success_streak == 0

    def test_third_failure_below_min_restarts(self):
        st_ = TrustRegionState(length=L_MIN * 1.5, failure_streak=2, center=np.zeros(2))
        new = trust_region_update(st_, batch_best=2.0, incumbent=1.0)
        assert new.length == L_INIT
        assert new.restart_count == 1 and new.center is None

    def test_alternating_keeps_length(self):
        st_ = TrustRegionState(length=0.3)
        for i in range(100):
            st_ = trust_region_update(st_, batch_best=0.0 if i % 2 else 2.0, incumbent=1.0)
        assert st_.length == 0.3

    def test_length_capped(self):
        st_ = TrustRegionState(length=1.6, success_streak=2)
        assert trust_region_update(st_, 0.0, 1.0).length == 1.6

    def test_tie_is_failure(self):
        new = trust_region_update(TrustRegionState(), 1.0, 1.0)
        assert new.failure_streak == 1

    def test_suggestions_inside_box(self, mixed_space):
        f = score_fn(mixed_space)
        opt = OPTIMIZERS["turbo"](mixed_space, 11)
        cat = mixed_space.categorical_mask
        checked = 0
        for _ in range(16):
            warm = opt.in_warmup
            pts = opt.suggest(8)
            if not warm:
                lo, hi = opt.last_box
                L = opt.state.length
                c = opt.state.center
                np.testing.assert_allclose(lo[~cat], np.clip(c - L / 2, 0, 1)[~cat])
                np.testing.assert_allclose(hi[~cat], np.clip(c + L / 2, 0, 1)[~cat])
                U = mixed_space.warp_many(pts)[:, ~cat]
                assert np.all(U >= lo[~cat] - 1e-9) and np.all(U <= hi[~cat] + 1e-9)
                checked += 1
            opt.observe(pts, [f(p) for p in pts])
        assert checked >= 10

    def test_restart_discards_local_data(self, box2):
        opt = OPTIMIZERS["turbo"](box2, 0, l_init=0.05, l_min=0.04, tau_fail=1)
        pts = opt.suggest(8)
        opt.observe(pts, [1.0] * 8)
        pts = opt.suggest(8)
        opt.observe(pts, [5.0] * 8)
        assert opt.state.restart_count == 1
        assert opt.local_start == 16 and opt.in_warmup


class TestDifferentialEvolution:
    def _population(self, space, m=6, seed=0):
        return [(p, float(i)) for i, p in enumerate(sample_uniform(space, m, seed))]

    def test_zero_scale_copies_base_vector(self, box2):
        pop = self._population(box2)
        P = [tuple(box2.warp(p)) for p, _ in pop]
        trials = de_step(box2, pop, F=0.0, CR=1.0, n=12, seed=3)
        for t, q in enumerate(trials):
            u = tuple(box2.warp(q))
            j = int(np.argmin([np.abs(np.subtract(u, v)).max() for v in P]))
            assert np.allclose(u, P[j], atol=1e-12)
            assert j != t % len(pop)

    def test_outputs_in_bounds(self, mixed_space):
        pop = self._population(mixed_space, 8)
        for q in de_step(mixed_space, pop, F=1.9, CR=0.5, n=50, seed=1):
            mixed_space.validate(q)

    def test_deterministic(self, mixed_space):
        pop = self._population(mixed_space)
        assert de_step(mixed_space, pop, n=5, seed=2) == de_step(mixed_space, pop, n=5, seed=2)

    def test_small_population(self, box2):
        with pytest.raises(StateError):
            de_step(box2, self._population(box2, 3))

    def test_rejects_bad_scale(self, box2):
        with pytest.raises(ConfigError):
            OPTIMIZERS["de"](box2, 0, F=2.5)


class TestAnnealing:
    def test_schedule_start(self):
        assert schedule(0) == 0.25
        assert schedule(2) == pytest.approx(0.25 * 0.85**2)

    def test_converges_to_incumbent(self, mixed_space):
        inc = sample_uniform(mixed_space, 1, 4)[0]
        q = anneal_propose(mixed_space, inc, 400, seed=0)
        assert q["depth"] == inc["depth"] and q["kind"] == inc["kind"] and q["flag"] == inc["flag"]
        assert q["lr"] == pytest.approx(inc["lr"], rel=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31), iter_id=st.integers(0, 50))
    def test_domain_valid(self, seed, iter_id):
        sp = SearchSpace([ParamSpec.real("x", 1.0, 2.0), ParamSpec.integer("n", -3, 3), ParamSpec.boolean("b")])
        inc = sample_uniform(sp, 1, seed)[0]
        sp.validate(anneal_propose(sp, inc, iter_id, T0=5.0, seed=seed))

    def test_iteration_counter(self, box2):
        opt = drive(OPTIMIZERS["anneal"](box2, 0), score_fn(box2), 3)
        assert opt.iter_id == 2

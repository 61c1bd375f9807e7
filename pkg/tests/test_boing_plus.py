import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boing.boing import BoingConfig
from boing.boing_plus import (
    BoingPlusOptimizer,
    SwitchState,
    select_exploration_subregion,
    switch_probability,
    switch_sides,
    update_failure_counter,
)
from boing.forest import RandomForestSurrogate, extract_subregion
from boing.objectives import get_objective
from boing.space import Box, SearchSpace, box_volume_fraction
from boing.turbo import TrustRegionConfig, TrustRegionState, TurboOptimizer


def unit_space(dim):
    return SearchSpace(tuple(((0.0, 1.0),) * dim))


class TestSwitchProbability:
    def test_exact_decimal_values(self):
        assert switch_probability(0) == 0.0
        assert switch_probability(3) == 0.3  # exact, not 0.30000000000000004
        assert switch_probability(10) == 1.0

    def test_caps_at_one(self):
        assert switch_probability(15) == 1.0
        assert switch_probability(1000) == 1.0

    @given(st.integers(0, 100))
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_counter(self, c):
        assert switch_probability(c) <= switch_probability(c + 1)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            switch_probability(-1)


class TestFailureCounter:
    def test_increment_every_dim_failures(self):
        state = SwitchState(dim=3)
        for i in range(1, 10):
            state = update_failure_counter(state, improved=False)
            assert state.c_fail_boing == i // 3

    def test_improvement_decrements_and_resets_clock(self):
        state = SwitchState(dim=2, c_fail_boing=4, stall_boing=1)
        state = update_failure_counter(state, improved=True)
        assert state.c_fail_boing == 3
        assert state.stall_boing == 0

    def test_counter_floor_is_zero(self):
        state = SwitchState(dim=2)
        state = update_failure_counter(state, improved=True)
        assert state.c_fail_boing == 0

    def test_only_active_side_is_touched(self):
        state = SwitchState(dim=2, side="turbo", c_fail_boing=5, stall_boing=1)
        state = update_failure_counter(state, improved=False)
        assert state.c_fail_boing == 5 and state.stall_boing == 1
        assert state.stall_turbo == 1

    def test_clock_survives_partial_streaks(self):
        state = SwitchState(dim=4)
        for _ in range(3):
            state = update_failure_counter(state, improved=False)
        assert state.c_fail_boing == 0 and state.stall_boing == 3
        state = update_failure_counter(state, improved=False)
        assert state.c_fail_boing == 1


class TestSwitchSides:
    def test_flip_and_halve(self):
        state = SwitchState(dim=2, side="boing", c_fail_boing=7, c_fail_turbo=5)
        flipped = switch_sides(state)
        assert flipped.side == "turbo"
        assert flipped.c_fail_boing == 3  # floor division
        assert flipped.c_fail_turbo == 2

    def test_double_flip_returns_side(self):
        state = SwitchState(dim=2)
        assert switch_sides(switch_sides(state)).side == "boing"


class TestTrustRegion:
    def test_expands_after_success_streak(self):
        tr = TrustRegionState(2, TrustRegionConfig(success_tolerance=3))
        tr.seed_data(np.array([[0.5, 0.5]]), np.array([10.0]))
        for cost in (9.0, 8.0, 7.0):
            tr.add(np.array([0.5, 0.5]), cost)
        assert tr.length == pytest.approx(1.6)  # doubled and capped

    def test_shrinks_after_failure_streak(self):
        tr = TrustRegionState(2, TrustRegionConfig())  # fail tolerance max(4, d) = 4
        tr.seed_data(np.array([[0.5, 0.5]]), np.array([1.0]))
        for _ in range(4):
            tr.add(np.array([0.5, 0.5]), 2.0)
        assert tr.length == pytest.approx(0.4)

    def test_restart_below_length_floor(self):
        tr = TrustRegionState(2, TrustRegionConfig())
        tr.seed_data(np.array([[0.5, 0.5]]), np.array([1.0]))
        for _ in range(4 * 4):  # four failure streaks halve 0.8 down to 0.05
            tr.add(np.array([0.5, 0.5]), 2.0)
        assert tr.length < 2.0**-4
        assert tr.needs_restart

    def test_mixed_streaks_reset_each_other(self):
        tr = TrustRegionState(2, TrustRegionConfig())
        tr.seed_data(np.array([[0.5, 0.5]]), np.array([10.0]))
        tr.add(np.array([0.4, 0.4]), 9.0)
        tr.add(np.array([0.3, 0.3]), 11.0)
        tr.add(np.array([0.2, 0.2]), 8.0)
        assert tr.success_count == 1 and tr.fail_count == 0
        assert tr.length == pytest.approx(0.8)

    def test_box_centered_on_local_incumbent_and_clipped(self):
        tr = TrustRegionState(2, TrustRegionConfig())
        tr.seed_data(np.array([[0.1, 0.5], [0.9, 0.9]]), np.array([1.0, 2.0]))
        box = tr.box(Box.unit(2))
        np.testing.assert_allclose(box.lower, [0.0, 0.1])
        np.testing.assert_allclose(box.upper, [0.5, 0.9])

    def test_box_weights_have_geometric_mean_one(self):
        tr = TrustRegionState(2, TrustRegionConfig())
        tr.seed_data(np.array([[0.5, 0.5]]), np.array([1.0]))
        ls = np.array([0.1, 10.0])  # geometric mean 1 already
        box = tr.box(Box.unit(2), lengthscales=ls)
        widths = box.upper - box.lower
        assert widths[0] == pytest.approx(0.8 * 0.1)
        assert widths[1] == pytest.approx(1.0)  # nominal 8.0, clipped to the cube

    def test_fill_points_inside_region(self):
        tr = TrustRegionState(2, TrustRegionConfig(), rng=0)
        tr.seed_data(np.array([[0.5, 0.5]]), np.array([1.0]))
        outer = Box.unit(2)
        for _ in range(8):
            x = tr.next_fill_point(outer)
            assert tr.box(outer).contains(x[None, :])[0]


class TestTurboOptimizer:
    def test_runs_and_improves(self):
        spec = get_objective("branin")
        traj = TurboOptimizer(spec.space(), seed=0).run(spec, 25)
        assert traj.final_incumbent() < 5.0
        assert np.all(np.diff(traj.incumbents) <= 0)

    def test_restart_gets_fresh_region(self):
        opt = TurboOptimizer(unit_space(2), seed=1)
        rng = np.random.default_rng(0)
        # feed a worsening stream to force repeated shrinks and a restart
        opt.tell(rng.uniform(size=2), 0.0)
        for i in range(16):
            opt.tell(rng.uniform(size=2), 1.0 + i)
        assert opt.n_restarts_done >= 1
        assert opt.state.length == pytest.approx(0.8)
        assert len(opt.state) == 0

    def test_deterministic_for_seed(self):
        spec = get_objective("branin")
        t1 = TurboOptimizer(spec.space(), seed=3).run(spec, 12)
        t2 = TurboOptimizer(spec.space(), seed=3).run(spec, 12)
        for r1, r2 in zip(t1, t2):
            np.testing.assert_array_equal(r1.point, r2.point)


class TestExplorationSubregion:
    def test_returns_largest_volume_candidate(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(size=(60, 2))
        y = np.sin(5 * X[:, 0]) + X[:, 1]
        forest = RandomForestSurrogate(random_state=0).fit(X, y)
        box = select_exploration_subregion(
            forest.trees_, X, n_min=10, rng=np.random.default_rng(7)
        )
        # replay the same anchor stream and take the max by hand
        anchors = np.random.default_rng(7).uniform(size=(20, 2))
        volumes = [
            box_volume_fraction(extract_subregion(forest.trees_, a, X, 10).box, Box.unit(2))
            for a in anchors
        ]
        assert box_volume_fraction(box, Box.unit(2)) == pytest.approx(max(volumes))


class TestBoingPlusMechanics:
    def _warmed_optimizer(self, seed=0, dim=2, n=12):
        opt = BoingPlusOptimizer(unit_space(dim), seed=seed)
        rng = np.random.default_rng(seed)
        base = 5.0
        for i in range(n):
            # strictly improving stream keeps both counters at zero
            opt.tell(rng.uniform(size=dim), base - i)
        return opt

    def test_scripted_stalls_raise_counter(self):
        opt = self._warmed_optimizer()
        rng = np.random.default_rng(1)
        for _ in range(4):  # d = 2, so two increments
            opt.tell(rng.uniform(size=2), 100.0)
        assert opt.switch_state.c_fail_boing == 2
        assert opt.switch_state.side == "boing"

    def test_forced_switchback_on_turbo_improvement(self):
        opt = self._warmed_optimizer()
        rng = np.random.default_rng(2)
        for _ in range(6):
            opt.tell(rng.uniform(size=2), 100.0)
        c_before = opt.switch_state.c_fail_boing
        assert c_before == 3
        opt._switch()  # manual flip to the trust-region side
        assert opt.switch_state.side == "turbo"
        assert opt.switch_state.c_fail_boing == c_before // 2
        improving = float(opt.incumbent() - 1.0)
        opt.tell(rng.uniform(size=2), improving)
        assert opt.switch_state.side == "boing"  # improvement hands control back

    def test_switch_halves_both_counters(self):
        opt = self._warmed_optimizer()
        rng = np.random.default_rng(3)
        for _ in range(8):
            opt.tell(rng.uniform(size=2), 100.0)
        assert opt.switch_state.c_fail_boing == 4
        opt._switch()
        assert opt.switch_state.c_fail_boing == 2
        # stall on the trust-region side now
        for _ in range(4):
            opt.tell(rng.uniform(size=2), 100.0)
        assert opt.switch_state.c_fail_turbo == 2
        opt._switch()
        assert opt.switch_state.side == "boing"
        assert opt.switch_state.c_fail_boing == 1
        assert opt.switch_state.c_fail_turbo == 1

    def test_turbo_side_builds_trust_region_with_inside_points(self):
        opt = self._warmed_optimizer(n=14)
        opt._switch()
        assert opt._tr is not None and opt._tr_outer is not None
        inside = opt._tr_outer.contains(opt.space.normalize(opt.dataset.points))
        assert len(opt._tr) == int(inside.sum())

    def test_origin_labels_partition_run(self):
        spec = get_objective("branin")
        traj = BoingPlusOptimizer(spec.space(), seed=4).run(spec, 25)
        labels = {r.phase for r in traj}
        assert labels <= {"boing", "turbo"}
        assert "boing" in labels

    def test_deterministic_for_seed(self):
        spec = get_objective("branin")
        t1 = BoingPlusOptimizer(spec.space(), seed=6).run(spec, 18)
        t2 = BoingPlusOptimizer(spec.space(), seed=6).run(spec, 18)
        for r1, r2 in zip(t1, t2):
            np.testing.assert_array_equal(r1.point, r2.point)
            assert r1.phase == r2.phase

    def test_budget_exhaustion_raises(self):
        opt = BoingPlusOptimizer(unit_space(2), BoingConfig(budget=2), seed=7)
        for _ in range(2):
            x = opt.suggest()
            opt.tell(x, 1.0)
        with pytest.raises(RuntimeError, match="budget"):
            opt.suggest()

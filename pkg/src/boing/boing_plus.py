"""Meta-controller interleaving the two-stage optimizer with trust-region search.

Each side keeps a failure counter.  Before every evaluation a Bernoulli
draw with probability min(c_fail / 10, 1) decides whether to switch sides;
every switch halves both counters.  A side's counter grows by one for each
full dimension-count streak of non-improving evaluations and shrinks by
one on improvement.  When the trust-region side improves the global
incumbent, control returns to the two-stage side immediately.  The trust
region itself lives inside an exploration subregion: the largest-volume
subregion extracted around 20 random anchor points.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .boing import BoingConfig, BoingOptimizer, surrogate_targets
from .forest import RandomForestSurrogate, extract_subregion
from .loop import Trajectory
from .space import Box, SearchSpace, box_volume_fraction
from .turbo import TrustRegionConfig, TrustRegionState, trust_region_suggest
from .validation import check_rng

SIDE_BOING = "boing"
SIDE_TURBO = "turbo"


def switch_probability(c_fail: int) -> float:
    """Probability of leaving the active side given its failure counter.

    Computed as c_fail / 10 (capped at 1) so integer counters map to exact
    decimals.
    """
    if c_fail < 0:
        raise ValueError("failure counter cannot be negative")
    return min(c_fail / 10.0, 1.0)


@dataclass(frozen=True)
class SwitchState:
    """Active side plus per-side failure counters and stall clocks."""

    dim: int
    side: str = SIDE_BOING
    c_fail_boing: int = 0
    c_fail_turbo: int = 0
    stall_boing: int = 0
    stall_turbo: int = 0

    @property
    def active_counter(self) -> int:
        return self.c_fail_boing if self.side == SIDE_BOING else self.c_fail_turbo


def update_failure_counter(state: SwitchState, improved: bool) -> SwitchState:
    """Advance the active side's stall clock and failure counter.

    Improvement resets the clock and decrements the counter (floor zero);
    otherwise the clock ticks and every `dim`-th consecutive non-improving
    evaluation increments the counter.
    """
    if state.side == SIDE_BOING:
        c, stall = state.c_fail_boing, state.stall_boing
    else:
        c, stall = state.c_fail_turbo, state.stall_turbo
    if improved:
        c = max(0, c - 1)
        stall = 0
    else:
        stall += 1
        if stall % state.dim == 0:
            c += 1
    if state.side == SIDE_BOING:
        return replace(state, c_fail_boing=c, stall_boing=stall)
    return replace(state, c_fail_turbo=c, stall_turbo=stall)


def switch_sides(state: SwitchState) -> SwitchState:
    """Flip the active side; every switch halves both failure counters."""
    return replace(
        state,
        side=SIDE_TURBO if state.side == SIDE_BOING else SIDE_BOING,
        c_fail_boing=state.c_fail_boing // 2,
        c_fail_turbo=state.c_fail_turbo // 2,
    )


def select_exploration_subregion(
    trees,
    X: np.ndarray,
    n_min: int,
    rng: np.random.Generator,
    n_anchors: int = 20,
) -> Box:
    """Largest-volume subregion among extractions at random anchor points.

    Ties keep the first anchor's box, so the choice is deterministic given
    the rng state.
    """
    rng = check_rng(rng)
    d = X.shape[1]
    unit = Box.unit(d)
    anchors = rng.uniform(size=(n_anchors, d))
    best_box: Box | None = None
    best_volume = -np.inf
    for anchor in anchors:
        box = extract_subregion(trees, anchor, X, n_min).box
        volume = box_volume_fraction(box, unit)
        if volume > best_volume:
            best_volume = volume
            best_box = box
    return best_box


class BoingPlusOptimizer(BoingOptimizer):
    """Two-stage optimizer with stochastic trust-region interludes."""

    name = "boing_plus"

    def __init__(
        self,
        space: SearchSpace,
        config: BoingConfig | None = None,
        seed: int | np.random.Generator | None = None,
        tr_config: TrustRegionConfig | None = None,
    ):
        super().__init__(space, config, seed)
        self.tr_config = tr_config or TrustRegionConfig()
        self.switch_state = SwitchState(dim=space.dim)
        self._tr: TrustRegionState | None = None
        self._tr_outer: Box | None = None
        self.n_switches_ = 0

    def suggest(self) -> np.ndarray:
        cfg = self.config
        if cfg.budget is not None and len(self.dataset) >= cfg.budget:
            raise RuntimeError(f"evaluation budget of {cfg.budget} is exhausted")
        # one switch draw per evaluation, before suggesting
        if self._rng.random() < switch_probability(self.switch_state.active_counter):
            self._switch()
        if self.switch_state.side == SIDE_BOING:
            x = super().suggest()
            self._last_phase = SIDE_BOING
            return x
        return self._suggest_turbo()

    def _suggest_turbo(self) -> np.ndarray:
        cfg = self.config
        self._last_phase = SIDE_TURBO
        Xn = self.space.normalize(self.dataset.points)
        x = trust_region_suggest(
            self._tr,
            self._tr_outer,
            self._rng,
            Xn,
            cfg.acq_budget,
            cfg.gp_restarts,
            cfg.gp_max_opt_evals,
            gp_seed=self._spawn_seed(),
        )
        box = self._tr.box(self._tr_outer)
        self._last_region = (
            box_volume_fraction(box, self._unit_box),
            int(np.sum(box.contains(Xn))),
        )
        return self.space.denormalize(x[None, :])[0]

    def tell(self, point: np.ndarray, cost: float) -> None:
        improved = len(self.dataset) == 0 or cost < self.incumbent()
        side = self.switch_state.side
        super().tell(point, cost)
        if side == SIDE_TURBO and self._tr is not None:
            xn = self.space.normalize(np.asarray(point, dtype=np.float64)[None, :])[0]
            self._tr.add(xn, cost)
            if self._tr.needs_restart:
                self._build_trust_region()  # restart stays on the trust-region side
        self.switch_state = update_failure_counter(self.switch_state, improved)
        if side == SIDE_TURBO and improved:
            # improving the global incumbent hands control straight back
            self.switch_state = switch_sides(self.switch_state)
            self.n_switches_ += 1

    def _switch(self) -> None:
        self.switch_state = switch_sides(self.switch_state)
        self.n_switches_ += 1
        if self.switch_state.side == SIDE_TURBO:
            self._build_trust_region()

    def _build_trust_region(self) -> None:
        cfg = self.config
        d = self.space.dim
        Xn = self.space.normalize(self.dataset.points)
        y = self.dataset.costs
        targets, _ = surrogate_targets(cfg.global_acquisition, y)
        forest = RandomForestSurrogate(
            n_trees=cfg.n_trees,
            max_features=cfg.max_features,
            min_samples_leaf=cfg.min_samples_leaf,
            random_state=self._spawn_seed(),
        ).fit(Xn, targets)
        self._tr_outer = select_exploration_subregion(
            forest.trees_, Xn, cfg.n_min(d), self._rng
        )
        self._tr = TrustRegionState(d, self.tr_config, self._spawn_seed())
        inside = self._tr_outer.contains(Xn)
        if np.any(inside):
            self._tr.seed_data(Xn[inside], y[inside])

    def run(self, objective, budget: int | None = None) -> Trajectory:
        return super().run(objective, budget)

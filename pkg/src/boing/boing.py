"""Two-stage optimizer: forest-guided subregion plus a local GP inside it.

Each iteration after warmup fits a random-forest surrogate on all data,
maximizes the global acquisition to get an anchor, carves the subregion
around the anchor out of the forest, and then maximizes a local
acquisition under a GP restricted to that subregion.  While few points
lie outside the subregion a full GP is used directly; otherwise the
outside points enter through the augmented local GP.

Phases by dataset size n (dimension d):
  n < 2d          init       Sobol design
  2d <= n < 5d    full_gp    exact GP over the whole space
  n >= 5d         two_stage  forest subregion + local model
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .acquisition import (
    AcqOptBudget,
    expected_improvement,
    log_expected_improvement,
    optimize_acquisition,
)
from .forest import RandomForestSurrogate, extract_subregion
from .gp import GaussianProcess
from .lgpga import AugmentedLocalGP, inducing_count
from .loop import AskTellOptimizer, perturb_duplicate
from .space import Box, SearchSpace, box_volume_fraction, sobol_init
from .validation import check_positive_int

PHASE_INIT = "init"
PHASE_FULL_GP = "full_gp"
PHASE_TWO_STAGE = "two_stage"

ACQUISITIONS = ("ei", "logei")


@dataclass
class BoingConfig:
    """Tuning knobs for the two-stage optimizer.

    The subregion must keep at least `n_min_factor * d` observations; the
    init design has `init_multiplier * d` points; `two_stage` starts once
    the full-GP phase has gathered `n_min_factor * d` observations total.
    """

    n_min_factor: int = 5
    init_multiplier: int = 2
    budget: int | None = None
    global_acquisition: str = "ei"
    local_acquisition: str = "ei"
    xi: float = 0.0
    n_trees: int = 10
    min_samples_leaf: int = 3
    max_features: int | None = None
    gp_restarts: int = 10
    gp_max_opt_evals: int = 30
    lgpga_passes: int = 2
    lgpga_coord_budget: int = 48
    acq_budget: AcqOptBudget = field(default_factory=AcqOptBudget)

    def __post_init__(self) -> None:
        check_positive_int(self.n_min_factor, "n_min_factor")
        check_positive_int(self.init_multiplier, "init_multiplier")
        if self.global_acquisition not in ACQUISITIONS:
            raise ValueError(f"global_acquisition must be one of {ACQUISITIONS}")
        if self.local_acquisition not in ACQUISITIONS:
            raise ValueError(f"local_acquisition must be one of {ACQUISITIONS}")

    def n_init(self, dim: int) -> int:
        return self.init_multiplier * dim

    def n_min(self, dim: int) -> int:
        return self.n_min_factor * dim

    def n_exact_threshold(self, dim: int) -> int:
        """Outside-point count below which a full GP replaces the augmented one."""
        return min(10, 2 * dim)


def surrogate_targets(kind: str, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Targets for the surrogate plus the additive shift applied to costs.

    For log-EI the surrogate models log(y + shift) with the shift chosen to
    make every cost positive; plain EI models raw costs (shift 0).  Incumbent
    values passed to the acquisition must live on the same shifted-cost scale.
    """
    if kind == "logei":
        shift = 1e-6 - min(0.0, float(np.min(y)))
        return np.log(y + shift), shift
    return y, 0.0


def make_acquisition(
    kind: str,
    model,
    incumbent: float,
    xi: float = 0.0,
) -> Callable[[np.ndarray], np.ndarray]:
    """Batched acquisition closure over a fitted surrogate."""
    if kind == "ei":
        def acq(X: np.ndarray) -> np.ndarray:
            mean, var = model.predict(X, return_var=True)
            return expected_improvement(mean, var, incumbent, xi)
    elif kind == "logei":
        def acq(X: np.ndarray) -> np.ndarray:
            mean, var = model.predict(X, return_var=True)
            return log_expected_improvement(mean, var, incumbent)
    else:
        raise ValueError(f"unknown acquisition {kind!r}")
    return acq


def _best_rows(X: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """Rows of X at the k smallest y, as acquisition local-search seeds."""
    order = np.argsort(y, kind="stable")[: min(k, len(y))]
    return X[order]


class BoingOptimizer(AskTellOptimizer):
    """Forest-guided local Bayesian optimization (ask/tell)."""

    name = "boing"

    def __init__(
        self,
        space: SearchSpace,
        config: BoingConfig | None = None,
        seed: int | np.random.Generator | None = None,
    ):
        super().__init__(space, seed)
        self.config = config or BoingConfig()
        d = space.dim
        self._unit_box = Box.unit(d)
        self._init_design = sobol_init(self.config.n_init(d), d, self._rng)
        self.last_subregion_: Box | None = None

    @property
    def phase(self) -> str:
        n = len(self.dataset)
        d = self.space.dim
        if n < self.config.n_init(d):
            return PHASE_INIT
        if n < self.config.n_min(d):
            return PHASE_FULL_GP
        return PHASE_TWO_STAGE

    def suggest(self) -> np.ndarray:
        cfg = self.config
        n = len(self.dataset)
        if cfg.budget is not None and n >= cfg.budget:
            raise RuntimeError(f"evaluation budget of {cfg.budget} is exhausted")
        phase = self.phase
        self._last_phase = phase
        self._last_region = (1.0, n)
        if phase == PHASE_INIT:
            return self.space.denormalize(self._init_design[n][None, :])[0]
        if phase == PHASE_FULL_GP:
            x = self._suggest_full_gp()
        else:
            x = self._suggest_two_stage()
        return self.space.denormalize(x[None, :])[0]

    def _suggest_full_gp(self) -> np.ndarray:
        cfg = self.config
        Xn = self.space.normalize(self.dataset.points)
        y = self.dataset.costs
        targets, shift = surrogate_targets(cfg.global_acquisition, y)
        incumbent = float(np.min(y)) + shift
        gp = GaussianProcess(
            n_restarts=cfg.gp_restarts,
            max_opt_evals=cfg.gp_max_opt_evals,
            random_state=self._spawn_seed(),
        ).fit(Xn, targets)
        acq = make_acquisition(cfg.global_acquisition, gp, incumbent, cfg.xi)
        x, _ = optimize_acquisition(
            acq, self._unit_box, self._rng, cfg.acq_budget, seeds=_best_rows(Xn, y, 3)
        )
        return perturb_duplicate(x, Xn, self._unit_box, self._rng)

    def _suggest_two_stage(self) -> np.ndarray:
        cfg = self.config
        d = self.space.dim
        Xn = self.space.normalize(self.dataset.points)
        y = self.dataset.costs

        # global stage: forest surrogate proposes an anchor over the full space
        g_targets, g_shift = surrogate_targets(cfg.global_acquisition, y)
        g_incumbent = float(np.min(y)) + g_shift
        forest = RandomForestSurrogate(
            n_trees=cfg.n_trees,
            max_features=cfg.max_features,
            min_samples_leaf=cfg.min_samples_leaf,
            random_state=self._spawn_seed(),
        ).fit(Xn, g_targets)
        acq_g = make_acquisition(cfg.global_acquisition, forest, g_incumbent, cfg.xi)
        x_g, _ = optimize_acquisition(
            acq_g, self._unit_box, self._rng, cfg.acq_budget, seeds=_best_rows(Xn, y, 3)
        )

        sub = extract_subregion(forest.trees_, x_g, Xn, cfg.n_min(d))
        inside = sub.inside_idx
        outside = np.setdiff1d(np.arange(Xn.shape[0]), inside, assume_unique=True)
        self.last_subregion_ = sub.box
        self._last_region = (
            box_volume_fraction(sub.box, self._unit_box),
            int(inside.shape[0]),
        )

        # local stage: GP inside the subregion, outside data as prior when plentiful
        l_targets, l_shift = surrogate_targets(cfg.local_acquisition, y)
        l_incumbent = float(np.min(y[inside])) + l_shift
        if outside.shape[0] < cfg.n_exact_threshold(d):
            model = GaussianProcess(
                n_restarts=cfg.gp_restarts,
                max_opt_evals=cfg.gp_max_opt_evals,
                random_state=self._spawn_seed(),
            ).fit(Xn, l_targets)
        else:
            model = AugmentedLocalGP(
                n_inducing=inducing_count(d, Xn.shape[0]),
                n_restarts=cfg.gp_restarts,
                max_opt_evals=cfg.gp_max_opt_evals,
                stage_two_passes=cfg.lgpga_passes,
                stage_two_coord_budget=cfg.lgpga_coord_budget,
                random_state=self._spawn_seed(),
            ).fit(
                Xn[inside],
                l_targets[inside],
                Xn[outside],
                l_targets[outside],
                center=sub.box.center,
            )
        acq_l = make_acquisition(cfg.local_acquisition, model, l_incumbent, cfg.xi)
        local_seeds = np.vstack([_best_rows(Xn[inside], y[inside], 3), x_g[None, :]])
        x_l, _ = optimize_acquisition(
            acq_l, sub.box, self._rng, cfg.acq_budget, seeds=local_seeds
        )
        return perturb_duplicate(x_l, Xn, sub.box, self._rng)

    def run(self, objective, budget: int | None = None):
        budget = budget if budget is not None else self.config.budget
        if budget is None:
            raise ValueError("no budget given (neither run(budget=...) nor config.budget)")
        return super().run(objective, budget)

"""Reference optimizers the bench compares against."""

from __future__ import annotations

import numpy as np

from .acquisition import AcqOptBudget, optimize_acquisition
from .boing import make_acquisition, surrogate_targets
from .forest import RandomForestSurrogate
from .gp import GaussianProcess
from .loop import AskTellOptimizer, perturb_duplicate
from .space import Box, SearchSpace, sobol_init


class RandomSearch(AskTellOptimizer):
    """Uniform sampling over the space; the floor every method must beat."""

    name = "random"

    def suggest(self) -> np.ndarray:
        self._last_phase = self.name
        self._last_region = (1.0, len(self.dataset))
        return self.space.uniform(1, self._rng)[0]


class _SurrogateSearch(AskTellOptimizer):
    """Shared scaffold: Sobol warmup, then surrogate + acquisition over the space."""

    def __init__(
        self,
        space: SearchSpace,
        seed: int | np.random.Generator | None = None,
        acquisition: str = "ei",
        init_multiplier: int = 2,
        acq_budget: AcqOptBudget | None = None,
    ):
        super().__init__(space, seed)
        self.acquisition = acquisition
        self.acq_budget = acq_budget or AcqOptBudget()
        self._unit_box = Box.unit(space.dim)
        self._init_design = sobol_init(init_multiplier * space.dim, space.dim, self._rng)

    def _fit_surrogate(self, Xn: np.ndarray, targets: np.ndarray):
        raise NotImplementedError

    def suggest(self) -> np.ndarray:
        self._last_phase = self.name
        n = len(self.dataset)
        self._last_region = (1.0, n)
        if n < self._init_design.shape[0]:
            return self.space.denormalize(self._init_design[n][None, :])[0]
        Xn = self.space.normalize(self.dataset.points)
        y = self.dataset.costs
        targets, shift = surrogate_targets(self.acquisition, y)
        model = self._fit_surrogate(Xn, targets)
        acq = make_acquisition(self.acquisition, model, float(np.min(y)) + shift)
        x, _ = optimize_acquisition(acq, self._unit_box, self._rng, self.acq_budget)
        x = perturb_duplicate(x, Xn, self._unit_box, self._rng)
        return self.space.denormalize(x[None, :])[0]


class GPOptimizer(_SurrogateSearch):
    """Plain global GP Bayesian optimization.

    Refits warm-start from the previous iteration's hyperparameters with a
    reduced number of fresh restarts; hyperparameters drift slowly as the
    dataset grows, so this keeps per-iteration cost flat without changing
    what the optimizer converges to.
    """

    name = "gp"

    def __init__(
        self,
        space: SearchSpace,
        seed: int | np.random.Generator | None = None,
        acquisition: str = "ei",
        n_restarts: int = 10,
        refit_restarts: int = 1,
        max_opt_evals: int = 50,
        acq_budget: AcqOptBudget | None = None,
    ):
        super().__init__(space, seed, acquisition, acq_budget=acq_budget)
        self.n_restarts = n_restarts
        self.refit_restarts = refit_restarts
        self.max_opt_evals = max_opt_evals
        self._prev_params = None

    def _fit_surrogate(self, Xn: np.ndarray, targets: np.ndarray):
        model = GaussianProcess(
            n_restarts=self.n_restarts if self._prev_params is None else self.refit_restarts,
            max_opt_evals=self.max_opt_evals,
            random_state=self._spawn_seed(),
            init_params=self._prev_params,
        ).fit(Xn, targets)
        self._prev_params = model.params_
        return model


class RFOptimizer(_SurrogateSearch):
    """Global random-forest Bayesian optimization (no subregion stage)."""

    name = "rf"

    def __init__(
        self,
        space: SearchSpace,
        seed: int | np.random.Generator | None = None,
        acquisition: str = "ei",
        n_trees: int = 10,
        min_samples_leaf: int = 3,
        acq_budget: AcqOptBudget | None = None,
    ):
        super().__init__(space, seed, acquisition, acq_budget=acq_budget)
        self.n_trees = n_trees
        self.min_samples_leaf = min_samples_leaf

    def _fit_surrogate(self, Xn: np.ndarray, targets: np.ndarray):
        return RandomForestSurrogate(
            n_trees=self.n_trees,
            min_samples_leaf=self.min_samples_leaf,
            random_state=self._spawn_seed(),
        ).fit(Xn, targets)

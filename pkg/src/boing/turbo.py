"""Trust-region GP optimizer in the TuRBO style.

Maintains a hyper-rectangle around the local incumbent whose side lengths
expand after a streak of successes and shrink after a streak of failures;
when the base length drops below a floor the region restarts.  The box
sides are weighted by the fitted GP lengthscales (rescaled to geometric
mean one) so the region stretches along insensitive dimensions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .acquisition import AcqOptBudget, expected_improvement, optimize_acquisition
from .gp import GaussianProcess
from .loop import AskTellOptimizer, perturb_duplicate
from .space import Box, SearchSpace
from .validation import check_rng


@dataclass(frozen=True)
class TrustRegionConfig:
    """Trust-region dynamics; side lengths are in normalized coordinates."""

    length_init: float = 0.8
    length_min: float = 2.0**-4
    length_max: float = 1.6
    success_tolerance: int = 3
    fail_tolerance: int | None = None  # None uses max(4, dim)

    def resolved_fail_tolerance(self, dim: int) -> int:
        return self.fail_tolerance if self.fail_tolerance is not None else max(4, dim)


class TrustRegionState:
    """Local data, base length, and success/failure streaks of one region."""

    def __init__(
        self,
        dim: int,
        config: TrustRegionConfig | None = None,
        rng: int | np.random.Generator | None = None,
    ):
        self.dim = dim
        self.config = config or TrustRegionConfig()
        self.length = self.config.length_init
        self.success_count = 0
        self.fail_count = 0
        self.needs_restart = False
        self._X: list[np.ndarray] = []
        self._y: list[float] = []
        self._sobol = qmc.Sobol(d=dim, scramble=True, seed=check_rng(rng))

    def __len__(self) -> int:
        return len(self._y)

    @property
    def X(self) -> np.ndarray:
        return np.array(self._X) if self._X else np.empty((0, self.dim))

    @property
    def y(self) -> np.ndarray:
        return np.array(self._y)

    def best_cost(self) -> float:
        return float(np.min(self._y)) if self._y else np.inf

    def seed_data(self, X: np.ndarray, y: np.ndarray) -> None:
        """Adopt existing observations without touching the streak counters."""
        for row, cost in zip(np.atleast_2d(X), np.ravel(y)):
            self._X.append(np.asarray(row, dtype=np.float64))
            self._y.append(float(cost))

    def add(self, x: np.ndarray, cost: float) -> None:
        """Record an evaluation and update streaks and the base length."""
        improved = cost < self.best_cost()
        self._X.append(np.asarray(x, dtype=np.float64))
        self._y.append(float(cost))
        if improved:
            self.success_count += 1
            self.fail_count = 0
        else:
            self.fail_count += 1
            self.success_count = 0
        if self.success_count >= self.config.success_tolerance:
            self.length = min(2.0 * self.length, self.config.length_max)
            self.success_count = 0
        elif self.fail_count >= self.config.resolved_fail_tolerance(self.dim):
            self.length = 0.5 * self.length
            self.fail_count = 0
        if self.length < self.config.length_min:
            self.needs_restart = True

    def box(self, outer: Box, lengthscales: np.ndarray | None = None) -> Box:
        """Current trust-region box, clipped to `outer`."""
        if self._y:
            center = self._X[int(np.argmin(self._y))]
        else:
            center = outer.center
        if lengthscales is not None:
            ls = np.asarray(lengthscales, dtype=np.float64)
            weights = ls / np.exp(np.mean(np.log(ls)))  # geometric mean one
        else:
            weights = np.ones(self.dim)
        half = 0.5 * self.length * weights
        return Box(
            np.maximum(center - half, outer.lower),
            np.minimum(center + half, outer.upper),
        )

    def next_fill_point(self, outer: Box) -> np.ndarray:
        """Next Sobol point inside the current trust-region box."""
        box = self.box(outer)
        with warnings.catch_warnings():
            # fill points are drawn one at a time, not in power-of-two blocks
            warnings.simplefilter("ignore", UserWarning)
            u = self._sobol.random(1)[0]
        return box.lower + u * box.widths


def trust_region_suggest(
    state: TrustRegionState,
    outer: Box,
    rng: np.random.Generator,
    existing: np.ndarray,
    acq_budget: AcqOptBudget,
    gp_restarts: int = 10,
    gp_max_opt_evals: int = 30,
    gp_seed: int | None = None,
) -> np.ndarray:
    """One suggestion from a trust region (normalized coordinates).

    Sobol-fills until the region holds 2 * dim points, then maximizes EI
    under a GP fit to the local data, over the lengthscale-weighted box.
    """
    if len(state) < 2 * state.dim:
        x = state.next_fill_point(outer)
        return perturb_duplicate(x, existing, state.box(outer), rng)
    gp = GaussianProcess(
        n_restarts=gp_restarts,
        max_opt_evals=gp_max_opt_evals,
        random_state=gp_seed,
    ).fit(state.X, state.y)
    box = state.box(outer, gp.params_.lengthscales)
    incumbent = state.best_cost()

    def acq(X: np.ndarray) -> np.ndarray:
        mean, var = gp.predict(X, return_var=True)
        return expected_improvement(mean, var, incumbent)

    x, _ = optimize_acquisition(acq, box, rng, acq_budget)
    return perturb_duplicate(x, existing, box, rng)


class TurboOptimizer(AskTellOptimizer):
    """Standalone trust-region optimizer over the whole space."""

    name = "turbo"

    def __init__(
        self,
        space: SearchSpace,
        config: TrustRegionConfig | None = None,
        seed: int | np.random.Generator | None = None,
        acq_budget: AcqOptBudget | None = None,
        gp_restarts: int = 10,
        gp_max_opt_evals: int = 30,
    ):
        super().__init__(space, seed)
        self.config = config or TrustRegionConfig()
        self.acq_budget = acq_budget or AcqOptBudget()
        self.gp_restarts = gp_restarts
        self.gp_max_opt_evals = gp_max_opt_evals
        self._outer = Box.unit(space.dim)
        self.state = TrustRegionState(space.dim, self.config, self._spawn_seed())
        self.n_restarts_done = 0

    def suggest(self) -> np.ndarray:
        self._last_phase = self.name
        self._last_region = (1.0, len(self.dataset))
        Xn = self.space.normalize(self.dataset.points) if len(self.dataset) else np.empty(
            (0, self.space.dim)
        )
        x = trust_region_suggest(
            self.state,
            self._outer,
            self._rng,
            Xn,
            self.acq_budget,
            self.gp_restarts,
            self.gp_max_opt_evals,
            gp_seed=self._spawn_seed(),
        )
        return self.space.denormalize(x[None, :])[0]

    def tell(self, point: np.ndarray, cost: float) -> None:
        super().tell(point, cost)
        xn = self.space.normalize(np.asarray(point, dtype=np.float64)[None, :])[0]
        self.state.add(xn, cost)
        if self.state.needs_restart:
            self.state = TrustRegionState(self.space.dim, self.config, self._spawn_seed())
            self.n_restarts_done += 1

"""Observation storage for the optimization loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_float_1d, as_float_2d


@dataclass(frozen=True)
class Observation:
    """One evaluated configuration and its cost (minimization)."""

    point: np.ndarray
    cost: float

    def __post_init__(self) -> None:
        point = np.array(self.point, dtype=np.float64, copy=True).ravel()
        if not np.all(np.isfinite(point)):
            raise ValueError("observation point must be finite")
        cost = float(self.cost)
        if not np.isfinite(cost):
            raise ValueError("observation cost must be finite")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "cost", cost)


class Dataset:
    """Append-only collection of observations with array views.

    Points are stored in the caller's coordinates; optimizers normalize on
    the way into their models.
    """

    def __init__(self, dim: int):
        self._dim = int(dim)
        self._points: list[np.ndarray] = []
        self._costs: list[float] = []

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._costs)

    def append(self, point: np.ndarray, cost: float) -> Observation:
        obs = Observation(point, cost)
        if obs.point.shape[0] != self._dim:
            raise ValueError(f"point has dim {obs.point.shape[0]}, expected {self._dim}")
        self._points.append(obs.point)
        self._costs.append(obs.cost)
        return obs

    @property
    def points(self) -> np.ndarray:
        if not self._points:
            return np.empty((0, self._dim))
        return np.array(self._points)

    @property
    def costs(self) -> np.ndarray:
        return np.array(self._costs)

    def best(self) -> Observation:
        if not self._costs:
            raise ValueError("dataset is empty")
        i = int(np.argmin(self._costs))
        return Observation(self._points[i], self._costs[i])

    def incumbent_cost(self) -> float:
        return self.best().cost

    @classmethod
    def from_arrays(cls, X: np.ndarray, y: np.ndarray) -> "Dataset":
        X = as_float_2d(X)
        y = as_float_1d(y)
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y disagree on the number of observations")
        ds = cls(X.shape[1])
        for row, cost in zip(X, y):
            ds.append(row, cost)
        return ds

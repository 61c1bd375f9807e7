"""Ask/tell optimizer base and per-iteration trajectory records."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import Dataset
from .space import Box, SearchSpace
from .validation import check_rng


@dataclass(frozen=True)
class IterationRecord:
    """One optimization step: what was evaluated and the loop state around it."""

    t: int
    point: np.ndarray
    cost: float
    incumbent: float
    phase: str
    subregion_volume_fraction: float
    inside_count: int
    wall_ms: float


class Trajectory:
    """Ordered iteration records of a single run."""

    def __init__(self) -> None:
        self.records: list[IterationRecord] = []

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def incumbents(self) -> np.ndarray:
        return np.array([r.incumbent for r in self.records])

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    def final_incumbent(self) -> float:
        if not self.records:
            raise ValueError("trajectory is empty")
        return self.records[-1].incumbent

    def phase_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.records:
            counts[r.phase] = counts.get(r.phase, 0) + 1
        return counts


def perturb_duplicate(
    x: np.ndarray,
    existing: np.ndarray,
    box: Box,
    rng: np.random.Generator,
    tol: float = 1e-9,
    fraction: float = 0.01,
) -> np.ndarray:
    """Nudge a suggestion that collides with an already-evaluated point.

    A collision (within `tol` of any row of `existing`) is moved uniformly
    within `fraction` of the box width and clipped back into the box, so
    models never see exact duplicates.
    """
    if existing.shape[0] == 0:
        return x
    d2 = np.sum((existing - x) ** 2, axis=1)
    if float(np.min(d2)) >= tol * tol:
        return x
    shift = rng.uniform(-fraction, fraction, size=x.shape[0]) * box.widths
    return box.clip(x + shift)


class AskTellOptimizer:
    """Base minimizer: subclasses implement suggest(); tell() records data.

    `suggest` returns points in the original (denormalized) coordinates and
    sets `_last_phase` and `_last_region` so `run` can log where the
    suggestion came from.
    """

    name = "base"

    def __init__(self, space: SearchSpace, seed: int | np.random.Generator | None = None):
        if not isinstance(space, SearchSpace):
            raise TypeError("space must be a SearchSpace")
        self.space = space
        self._rng = check_rng(seed)
        self.dataset = Dataset(space.dim)
        self._last_phase = self.name
        self._last_region: tuple[float, int] = (1.0, 0)

    def suggest(self) -> np.ndarray:
        raise NotImplementedError

    def tell(self, point: np.ndarray, cost: float) -> None:
        self.dataset.append(point, cost)

    def incumbent(self) -> float:
        return self.dataset.incumbent_cost()

    def _spawn_seed(self) -> int:
        return int(self._rng.integers(2**63))

    def run(
        self,
        objective: Callable[[np.ndarray], float],
        budget: int,
    ) -> Trajectory:
        """Drive suggest/evaluate/tell for `budget` iterations."""
        if budget < 1:
            raise ValueError("budget must be at least 1")
        trajectory = Trajectory()
        for t in range(1, budget + 1):
            t0 = time.perf_counter()
            x = self.suggest()
            phase = self._last_phase
            volume_fraction, inside_count = self._last_region
            try:
                cost = float(objective(x))
            except Exception as exc:
                raise RuntimeError(
                    f"objective evaluation failed at iteration {t} (point {x!r})"
                ) from exc
            if not np.isfinite(cost):
                raise ValueError(f"objective returned non-finite cost {cost} at iteration {t}")
            self.tell(x, cost)
            wall_ms = (time.perf_counter() - t0) * 1e3
            trajectory.append(
                IterationRecord(
                    t=t,
                    point=np.asarray(x, dtype=np.float64).copy(),
                    cost=cost,
                    incumbent=self.incumbent(),
                    phase=phase,
                    subregion_volume_fraction=volume_fraction,
                    inside_count=inside_count,
                    wall_ms=wall_ms,
                )
            )
        return trajectory

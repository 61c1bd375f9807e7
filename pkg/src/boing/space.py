"""Continuous box-bounded search spaces and axis-aligned subregions.

Optimizers work on the unit cube internally; `SearchSpace` handles the
affine map to and from the user's coordinates.  `Box` is the axis-aligned
subregion type produced by tree-based extraction; membership uses closed
intervals on both ends so boundary points count as inside.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .validation import as_float_2d, check_rng


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with closed-interval membership."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=np.float64).ravel()
        upper = np.asarray(self.upper, dtype=np.float64).ravel()
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(lower > upper):
            raise ValueError("box has lower > upper on some dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, X: np.ndarray) -> np.ndarray:
        """Boolean mask of rows inside the box (boundaries inclusive)."""
        X = as_float_2d(X)
        return np.all((X >= self.lower) & (X <= self.upper), axis=1)

    def clip(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    def intersect(self, other: "Box") -> "Box":
        return Box(np.maximum(self.lower, other.lower), np.minimum(self.upper, other.upper))

    @staticmethod
    def unit(dim: int) -> "Box":
        return Box(np.zeros(dim), np.ones(dim))


def box_volume_fraction(box: Box, reference: Box) -> float:
    """Volume of `box` as a fraction of `reference` volume."""
    ref_widths = reference.widths
    if np.any(ref_widths <= 0):
        raise ValueError("reference box must have positive width on every dimension")
    return float(np.prod(box.widths / ref_widths))


def points_in_box(X: np.ndarray, box: Box) -> tuple[np.ndarray, np.ndarray]:
    """Split row indices of X into (inside, outside) of `box`, original order kept."""
    mask = box.contains(X)
    idx = np.arange(mask.shape[0])
    return idx[mask], idx[~mask]


@dataclass(frozen=True)
class SearchSpace:
    """Box-bounded continuous domain given as per-dimension (lower, upper) bounds."""

    bounds: tuple[tuple[float, float], ...]
    lower: np.ndarray = field(init=False, repr=False)
    upper: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValueError("search space needs at least one dimension")
        lower = np.array([b[0] for b in bounds])
        upper = np.array([b[1] for b in bounds])
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise ValueError("bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("every dimension needs lower < upper")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def normalize(self, X: np.ndarray) -> np.ndarray:
        """Map points from the original domain onto the unit cube."""
        X = as_float_2d(X)
        return (X - self.lower) / (self.upper - self.lower)

    def denormalize(self, U: np.ndarray) -> np.ndarray:
        """Map unit-cube points back to the original domain."""
        U = as_float_2d(U)
        return self.lower + U * (self.upper - self.lower)

    def contains(self, X: np.ndarray) -> np.ndarray:
        return self.as_box().contains(X)

    def as_box(self) -> Box:
        return Box(self.lower.copy(), self.upper.copy())

    def uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


def sobol_init(
    n: int,
    dim: int,
    seed: int | np.random.Generator | None,
    box: Box | None = None,
) -> np.ndarray:
    """Scrambled Sobol design of `n` points, scaled into `box` (unit cube default).

    Deterministic for a fixed int seed.  Points are nudged strictly inside
    the box so downstream log transforms and open-interval consumers are safe.
    """
    rng = check_rng(seed)
    sampler = qmc.Sobol(d=dim, scramble=True, seed=rng)
    with warnings.catch_warnings():
        # design sizes are fixed multiples of the dimension, not powers of two
        warnings.simplefilter("ignore", UserWarning)
        U = sampler.random(n)
    eps = 1e-12
    U = np.clip(U, eps, 1.0 - eps)
    if box is None:
        return U
    return box.lower + U * box.widths

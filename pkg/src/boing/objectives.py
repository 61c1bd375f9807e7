"""Synthetic benchmark objectives and the heteroscedastic 1-D regression toy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .space import SearchSpace
from .validation import check_rng


@dataclass(frozen=True)
class ObjectiveSpec:
    """A benchmark function with its domain and known optimum."""

    name: str
    dim: int
    bounds: tuple[tuple[float, float], ...]
    fn: Callable[[np.ndarray], float]
    optimum_value: float
    optima: tuple[tuple[float, ...], ...]

    def space(self) -> SearchSpace:
        return SearchSpace(self.bounds)

    def __call__(self, x: np.ndarray) -> float:
        return float(self.fn(np.asarray(x, dtype=np.float64).ravel()))

    def verify_optima(self, atol: float = 1e-6) -> None:
        """Sanity check: every listed optimum attains the stated value."""
        for point in self.optima:
            value = self(np.array(point))
            if abs(value - self.optimum_value) > atol:
                raise AssertionError(
                    f"{self.name}: f({point}) = {value}, expected {self.optimum_value}"
                )


def branin(x: np.ndarray) -> float:
    a = 1.0
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    r = 6.0
    s = 10.0
    t = 1.0 / (8.0 * math.pi)
    x1, x2 = x[0], x[1]
    return a * (x2 - b * x1**2 + c * x1 - r) ** 2 + s * (1.0 - t) * math.cos(x1) + s


def ackley(x: np.ndarray) -> float:
    d = x.shape[0]
    term1 = -20.0 * math.exp(-0.2 * math.sqrt(float(np.sum(x * x)) / d))
    term2 = -math.exp(float(np.sum(np.cos(2.0 * math.pi * x))) / d)
    return term1 + term2 + 20.0 + math.e


def levy(x: np.ndarray) -> float:
    w = 1.0 + (x - 1.0) / 4.0
    head = math.sin(math.pi * w[0]) ** 2
    body = float(np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * w[:-1] + 1.0) ** 2)))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w[-1]) ** 2)
    return head + body + tail


BRANIN_OPTIMUM = 0.39788735772973816  # 10 / (8 pi)


def get_objective(name: str, dim: int | None = None) -> ObjectiveSpec:
    """Look up a benchmark by name; `dim` applies to the scalable ones."""
    name = name.lower()
    if name == "branin":
        if dim not in (None, 2):
            raise ValueError("branin is fixed at dimension 2")
        return ObjectiveSpec(
            name="branin",
            dim=2,
            bounds=((-5.0, 10.0), (0.0, 15.0)),
            fn=branin,
            optimum_value=BRANIN_OPTIMUM,
            optima=(
                (-math.pi, 12.275),
                (math.pi, 2.275),
                (9.42478, 2.475),
            ),
        )
    if name == "ackley":
        d = dim or 10
        return ObjectiveSpec(
            name="ackley",
            dim=d,
            bounds=tuple(((-32.768, 32.768),) * d),
            fn=ackley,
            optimum_value=0.0,
            optima=(tuple(0.0 for _ in range(d)),),
        )
    if name == "levy":
        d = dim or 10
        return ObjectiveSpec(
            name="levy",
            dim=d,
            bounds=tuple(((-10.0, 10.0),) * d),
            fn=levy,
            optimum_value=0.0,
            optima=(tuple(1.0 for _ in range(d)),),
        )
    raise ValueError(f"unknown objective {name!r} (choose branin, ackley, or levy)")


def toy_mean(x: np.ndarray) -> np.ndarray:
    """Mean of the 1-D heteroscedastic toy: a bump at 1/4 over a chirp."""
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * np.exp(-30.0 * (x - 0.25) ** 2) + np.sin(np.pi * x**2)


def toy_noise_variance(x: np.ndarray) -> np.ndarray:
    """Input-dependent noise variance exp(2 sin(2 pi x))."""
    x = np.asarray(x, dtype=np.float64)
    return np.exp(2.0 * np.sin(2.0 * np.pi * x))


def hetero_toy_sample(
    n: int = 50, seed: int | np.random.Generator | None = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Draw the toy dataset on [0, 1], returned sorted by x.

    Sorting makes index ranges meaningful: a contiguous slice of indices is
    a contiguous band of the input space.
    """
    rng = check_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, size=n))
    y = toy_mean(x) + np.sqrt(toy_noise_variance(x)) * rng.standard_normal(n)
    return x, y


# sorted sample indices treated as the "inside" band in the toy demo
TOY_INSIDE_RANGE = (35, 45)

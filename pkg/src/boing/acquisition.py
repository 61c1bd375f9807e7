"""Acquisition functions and their within-box maximizer.

Everything here is phrased for minimization: improvement means falling
below the incumbent cost eta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from .space import Box
from .validation import as_float_1d, check_rng


def expected_improvement(
    mean: np.ndarray, var: np.ndarray, incumbent: float, xi: float = 0.0
) -> np.ndarray:
    """Closed-form EI for minimization.

    With z = (eta - xi - mu) / sigma:  EI = sigma * (z Phi(z) + phi(z)).
    Zero-variance entries fall back to the deterministic improvement
    max(eta - xi - mu, 0).
    """
    mean = as_float_1d(np.asarray(mean), "mean")
    var = np.asarray(var, dtype=np.float64).ravel()
    if np.any(var < 0):
        raise ValueError("variance must be non-negative")
    sigma = np.sqrt(var)
    gap = incumbent - xi - mean
    out = np.maximum(gap, 0.0)
    pos = sigma > 0
    if np.any(pos):
        z = gap[pos] / sigma[pos]
        out[pos] = sigma[pos] * (z * norm.cdf(z) + norm.pdf(z))
    return out


def log_expected_improvement(
    mean_log: np.ndarray, var_log: np.ndarray, incumbent: float
) -> np.ndarray:
    """EI on log-costs: E[max(log eta - L, 0)] for L ~ N(mean_log, var_log).

    The surrogate models L = log(cost); `incumbent` is the incumbent cost on
    the original scale and must be positive.  With z = (log eta - mu) / sigma
    the closed form is (log eta - mu) Phi(z) + sigma phi(z).
    """
    if incumbent <= 0:
        raise ValueError("log-EI needs a positive incumbent cost")
    mean_log = as_float_1d(np.asarray(mean_log), "mean_log")
    var_log = np.asarray(var_log, dtype=np.float64).ravel()
    if np.any(var_log < 0):
        raise ValueError("variance must be non-negative")
    sigma = np.sqrt(var_log)
    gap = np.log(incumbent) - mean_log
    out = np.maximum(gap, 0.0)
    pos = sigma > 0
    if np.any(pos):
        z = gap[pos] / sigma[pos]
        out[pos] = gap[pos] * norm.cdf(z) + sigma[pos] * norm.pdf(z)
    return out


@dataclass(frozen=True)
class AcqOptBudget:
    """Evaluation budget for the acquisition maximizer."""

    n_random: int = 1000
    n_local: int = 10
    max_steps: int = 100
    step_fraction: float = 0.1
    min_step_fraction: float = 1e-4


def optimize_acquisition(
    acq: Callable[[np.ndarray], np.ndarray],
    box: Box,
    rng: np.random.Generator,
    budget: AcqOptBudget | None = None,
    seeds: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize a batched acquisition over a box.

    Random search seeds a coordinate-perturbation local search from the top
    candidates.  The local searches run in lockstep so each step costs one
    batched acquisition call.  Deterministic given the rng state; only
    strict improvements are accepted, so the returned value is monotone in
    the budget.

    `seeds` adds extra local-search starts (clipped into the box).  In high
    dimension the acquisition peak near the incumbent is far too narrow for
    uniform draws to hit, so callers pass their best points here.
    """
    budget = budget or AcqOptBudget()
    rng = check_rng(rng)
    d = box.dim
    X = box.lower + rng.uniform(size=(budget.n_random, d)) * box.widths
    vals = np.asarray(acq(X), dtype=np.float64).ravel()
    if vals.shape[0] != X.shape[0]:
        raise ValueError("acquisition returned the wrong number of values")
    i_rand = int(np.argmax(vals))

    k = min(budget.n_local, X.shape[0])
    top = np.argsort(-vals, kind="stable")[:k]
    pts = X[top].copy()
    best = vals[top].copy()
    if seeds is not None and len(seeds):
        S = box.clip(np.atleast_2d(np.asarray(seeds, dtype=np.float64)))
        sv = np.asarray(acq(S), dtype=np.float64).ravel()
        pts = np.vstack([S, pts])
        best = np.concatenate([sv, best])
    if len(pts) == 0:
        return X[i_rand].copy(), float(vals[i_rand])

    widths = box.widths
    # per-searcher step fraction, halved whenever that searcher fails to improve
    scale = np.full(len(pts), budget.step_fraction)
    for _ in range(budget.max_steps):
        active = scale > budget.min_step_fraction
        if not np.any(active):
            break
        deltas = rng.uniform(-1.0, 1.0, size=pts.shape) * (scale[:, None] * widths)
        cand = box.clip(pts + deltas)
        cand_vals = np.asarray(acq(cand), dtype=np.float64).ravel()
        improved = active & (cand_vals > best)
        pts[improved] = cand[improved]
        best[improved] = cand_vals[improved]
        scale[active & ~improved] /= 2.0
    i = int(np.argmax(best))
    if best[i] < vals[i_rand]:  # possible only when every start was a seed
        return X[i_rand].copy(), float(vals[i_rand])
    return pts[i].copy(), float(best[i])

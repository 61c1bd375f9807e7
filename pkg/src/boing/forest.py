"""Random-forest surrogate and forest-guided subregion extraction.

The forest is hand-built so its split structure is directly walkable: the
subregion around a promising point is carved out of the trees' half-spaces,
descending level by level in round-robin order and keeping a split only
while enough observed points remain inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .space import Box
from .validation import (
    as_float_1d,
    as_float_2d,
    check_consistent_rows,
    check_positive_int,
    check_rng,
)


@dataclass
class TreeNode:
    """Regression-tree node; internal when children are present.

    Split semantics: x[feature] < threshold goes left, otherwise right.
    `value` is the mean target of the samples the node covers; `indices`
    keeps those (bootstrap) sample row ids for inspection.
    """

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0
    indices: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def child_towards(self, x: np.ndarray) -> "TreeNode":
        if self.is_leaf:
            raise ValueError("leaf has no children")
        return self.left if x[self.feature] < self.threshold else self.right


def _build_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample_idx: np.ndarray,
    max_features: int,
    min_samples_leaf: int,
    rng: np.random.Generator,
) -> TreeNode:
    Xs = X[sample_idx]
    ys = y[sample_idx]
    n = ys.shape[0]
    node = TreeNode(value=float(np.mean(ys)), indices=sample_idx)
    if n <= min_samples_leaf or np.ptp(ys) == 0.0:
        return node

    d = X.shape[1]
    feats = rng.choice(d, size=min(max_features, d), replace=False)
    split = _best_split(Xs, ys, feats)
    if split is None:
        return node
    feature, threshold = split
    go_left = Xs[:, feature] < threshold
    node.feature = int(feature)
    node.threshold = float(threshold)
    node.left = _build_tree(X, y, sample_idx[go_left], max_features, min_samples_leaf, rng)
    node.right = _build_tree(X, y, sample_idx[~go_left], max_features, min_samples_leaf, rng)
    return node


def _best_split(
    Xs: np.ndarray, ys: np.ndarray, feats: np.ndarray
) -> tuple[int, float] | None:
    """Variance-reduction split over the sampled features.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; the split minimizing total child squared error wins (parent SSE
    is constant, so this maximizes variance reduction).
    """
    n = ys.shape[0]
    Xf = Xs[:, feats]
    order = np.argsort(Xf, axis=0, kind="stable")
    xs = np.take_along_axis(Xf, order, axis=0)
    ys_sorted = ys[order]

    valid = np.diff(xs, axis=0) > 0  # (n-1, f) split allowed between rows p, p+1
    if not valid.any():
        return None

    cl = np.cumsum(ys_sorted, axis=0)
    cq = np.cumsum(ys_sorted * ys_sorted, axis=0)
    counts_l = np.arange(1, n, dtype=np.float64)[:, None]
    counts_r = n - counts_l
    sse_l = cq[:-1] - cl[:-1] ** 2 / counts_l
    sse_r = (cq[-1] - cq[:-1]) - (cl[-1] - cl[:-1]) ** 2 / counts_r
    total = sse_l + sse_r
    total[~valid] = np.inf

    flat = int(np.argmin(total))
    p, j = divmod(flat, total.shape[1])
    threshold = 0.5 * (xs[p, j] + xs[p + 1, j])
    return int(feats[j]), float(threshold)


def _flatten_trees(roots: Sequence[TreeNode]) -> dict[str, np.ndarray]:
    """Pack trees into flat arrays for batched prediction (-1 child = leaf)."""
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    starts: list[int] = []

    def add(node: TreeNode) -> int:
        i = len(feature)
        feature.append(node.feature if not node.is_leaf else -1)
        threshold.append(node.threshold)
        left.append(-1)
        right.append(-1)
        value.append(node.value)
        if not node.is_leaf:
            left[i] = add(node.left)
            right[i] = add(node.right)
        return i

    for root in roots:
        starts.append(add(root))
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value),
        "starts": np.array(starts, dtype=np.int64),
    }


def _predict_flat(flat: dict[str, np.ndarray], X: np.ndarray) -> np.ndarray:
    """Per-tree predictions, shape (n_trees, n); one lockstep traversal."""
    n = X.shape[0]
    n_trees = flat["starts"].shape[0]
    idx = np.repeat(flat["starts"], n)
    pts = np.tile(np.arange(n), n_trees)
    feature = flat["feature"]
    while True:
        feat = feature[idx]
        active = np.nonzero(feat >= 0)[0]
        if active.size == 0:
            break
        cur = idx[active]
        go_left = X[pts[active], feat[active]] < flat["threshold"][cur]
        idx[active] = np.where(go_left, flat["left"][cur], flat["right"][cur])
    return flat["value"][idx].reshape(n_trees, n)


class RandomForestSurrogate(BaseEstimator, RegressorMixin):
    """Bagged regression trees with uncertainty from across-tree spread.

    Defaults: 10 trees, ceil(5d/6) features tried per split, leaves of at
    most 3 samples, bootstrap resampling of the full dataset size.  The
    predictive mean averages tree outputs; the variance is the population
    variance of the tree outputs.
    """

    def __init__(
        self,
        n_trees: int = 10,
        max_features: int | None = None,
        min_samples_leaf: int = 3,
        bootstrap_fraction: float = 1.0,
        random_state: int | np.random.Generator | None = None,
    ):
        self.n_trees = n_trees
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap_fraction = bootstrap_fraction
        self.random_state = random_state

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForestSurrogate":
        X = as_float_2d(X)
        y = as_float_1d(y)
        check_consistent_rows(X, y)
        check_positive_int(self.n_trees, "n_trees")
        if not 0.0 < self.bootstrap_fraction <= 1.0:
            raise ValueError("bootstrap_fraction must be in (0, 1]")
        rng = check_rng(self.random_state)
        n, d = X.shape
        if n < 1:
            raise ValueError("need at least one observation")
        max_features = (
            self.max_features if self.max_features is not None else math.ceil(d * 5.0 / 6.0)
        )
        check_positive_int(max_features, "max_features")
        n_boot = max(1, round(self.bootstrap_fraction * n))

        self.trees_ = []
        for _ in range(self.n_trees):
            sample_idx = rng.integers(0, n, size=n_boot)
            self.trees_.append(
                _build_tree(X, y, sample_idx, max_features, self.min_samples_leaf, rng)
            )
        self._flat = _flatten_trees(self.trees_)
        self.n_features_in_ = d
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "trees_"):
            raise NotFittedError("this RandomForestSurrogate instance is not fitted yet")

    def predict(
        self, X: np.ndarray, return_var: bool = False
    ) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
        self._check_fitted()
        X = as_float_2d(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("query dimensionality does not match training data")
        per_tree = _predict_flat(self._flat, X)
        mean = per_tree.mean(axis=0)
        if not return_var:
            return mean
        return mean, per_tree.var(axis=0)


@dataclass(frozen=True)
class SubregionResult:
    """Outcome of a subregion extraction.

    `box` is the intersected half-space region, `inside_idx` the dataset
    rows inside it (closed-interval membership), and `stop_depths[t]` how
    many split levels tree t contributed before stopping.
    """

    box: Box
    inside_idx: np.ndarray
    stop_depths: tuple[int, ...]


def extract_subregion(
    trees: Sequence[TreeNode],
    x_g: np.ndarray,
    X: np.ndarray,
    n_min: int,
    bounds: Box | None = None,
) -> SubregionResult:
    """Carve the subregion around `x_g` out of the trees' split structure.

    Trees take turns contributing one split level per round.  At each turn
    a tree descends into its child containing `x_g`; the descent is kept
    only if at least `n_min` of the currently kept points satisfy the
    child's half-space, which then also narrows the box.  A tree stops at
    its first rejected split or on reaching a leaf.  With `n_min >= len(X)`
    the full space is returned untouched.
    """
    X = as_float_2d(X)
    x_g = np.asarray(x_g, dtype=np.float64).ravel()
    d = X.shape[1]
    if x_g.shape[0] != d:
        raise ValueError("x_g dimensionality does not match X")
    check_positive_int(n_min, "n_min")
    box = bounds if bounds is not None else Box.unit(d)
    lower = box.lower.copy()
    upper = box.upper.copy()

    n = X.shape[0]
    if n_min >= n:
        full = Box(lower, upper)
        inside, _ = _split_indices(X, full)
        return SubregionResult(full, inside, tuple(0 for _ in trees))

    keep = np.ones(n, dtype=bool)  # current D_sub
    cursors: list[TreeNode | None] = [t if not t.is_leaf else None for t in trees]
    depths = [0] * len(trees)

    while any(c is not None for c in cursors):
        for t, node in enumerate(cursors):
            if node is None:
                continue
            f, thr = node.feature, node.threshold
            goes_left = x_g[f] < thr
            in_child = (X[:, f] < thr) if goes_left else (X[:, f] >= thr)
            cand = keep & in_child
            if int(cand.sum()) < n_min:
                cursors[t] = None  # reject: tree contributes no further splits
                continue
            keep = cand
            if goes_left:
                upper[f] = min(upper[f], thr)
            else:
                lower[f] = max(lower[f], thr)
            depths[t] += 1
            child = node.left if goes_left else node.right
            cursors[t] = None if child.is_leaf else child

    final = Box(lower, upper)
    inside, _ = _split_indices(X, final)
    return SubregionResult(final, inside, tuple(depths))


def _split_indices(X: np.ndarray, box: Box) -> tuple[np.ndarray, np.ndarray]:
    mask = box.contains(X)
    idx = np.arange(X.shape[0])
    return idx[mask], idx[~mask]

"""Exact Gaussian-process regression with a Matern-5/2 ARD kernel.

The posterior is the standard noisy-GP conditional: with K_y = K + sigma_n^2 I,

    mu(x)     = k(x, X) K_y^{-1} y
    sigma2(x) = k(x, x) - k(x, X) K_y^{-1} k(X, x)

Predictions report the latent (noise-free) variance.  Hyperparameters are
fit by maximizing the log marginal likelihood with multi-restart L-BFGS-B
in log-space; gradients are analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .validation import as_float_1d, as_float_2d, check_consistent_rows, check_rng

SQRT5 = math.sqrt(5.0)

# log-space hyperparameter bounds: lengthscales and signal variance in
# [1e-3, 1e3], noise variance in [1e-8, 1].
LOG_LS_BOUNDS = (math.log(1e-3), math.log(1e3))
LOG_SF2_BOUNDS = (math.log(1e-3), math.log(1e3))
LOG_SN2_BOUNDS = (math.log(1e-8), math.log(1.0))

# Restart initializers are drawn log-uniformly from a narrower window than
# the bounds: inputs live near the unit cube and targets are standardized,
# so plausible optima sit near lengthscale ~1 and unit variances.  Starting
# restarts at the bound extremes mostly finds the all-noise solution.
LOG_LS_INIT = (math.log(5e-2), math.log(5.0))
LOG_SF2_INIT = (math.log(0.25), math.log(4.0))
LOG_SN2_INIT = (math.log(1e-6), math.log(1e-1))

JITTER_START = 1e-8
JITTER_MAX = 1e-2


@dataclass(frozen=True)
class KernelParams:
    """Matern-5/2 ARD hyperparameters (one lengthscale per dimension)."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self) -> None:
        ls = np.asarray(self.lengthscales, dtype=np.float64).ravel()
        if np.any(ls <= 0):
            raise ValueError("lengthscales must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def dim(self) -> int:
        return self.lengthscales.shape[0]

    def to_log_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                np.log(self.lengthscales),
                [math.log(self.signal_variance), math.log(self.noise_variance)],
            ]
        )

    @staticmethod
    def from_log_vector(theta: np.ndarray, dim: int) -> "KernelParams":
        theta = np.asarray(theta, dtype=np.float64).ravel()
        return KernelParams(
            lengthscales=np.exp(theta[:dim]),
            signal_variance=math.exp(theta[dim]),
            noise_variance=math.exp(theta[dim + 1]),
        )


def matern52_kernel(A: np.ndarray, B: np.ndarray, params: KernelParams) -> np.ndarray:
    """Cross-covariance matrix k(A, B) under the Matern-5/2 ARD kernel."""
    A = as_float_2d(A, "A")
    B = as_float_2d(B, "B")
    r = cdist(A / params.lengthscales, B / params.lengthscales)
    sr = SQRT5 * r
    return params.signal_variance * (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)


def matern52_diag(n: int, params: KernelParams) -> np.ndarray:
    """Prior variance k(x, x) for n points (constant sigma_f^2)."""
    return np.full(n, params.signal_variance)


def chol_with_jitter(K: np.ndarray, noise_variance: float) -> tuple[np.ndarray, float]:
    """Cholesky of K + noise*I, escalating diagonal jitter on failure.

    Jitter starts at 1e-8 and grows tenfold up to 1e-2 before giving up.
    Returns (lower factor, jitter actually used).
    """
    n = K.shape[0]
    diag_idx = np.arange(n)
    Ky = K.copy()
    Ky[diag_idx, diag_idx] += noise_variance
    try:
        return cholesky(Ky, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START
    while jitter <= JITTER_MAX:
        Kj = Ky.copy()
        Kj[diag_idx, diag_idx] += jitter
        try:
            return cholesky(Kj, lower=True, check_finite=False), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError(
        f"covariance matrix not positive definite even with jitter {JITTER_MAX:g}"
    )


def _sq_diff_stack(X: np.ndarray) -> np.ndarray:
    """Per-dimension squared coordinate differences, shape (d, n, n)."""
    diff = X[:, None, :] - X[None, :, :]
    return np.ascontiguousarray(np.moveaxis(diff * diff, 2, 0))


def log_marginal_likelihood(params: KernelParams, X: np.ndarray, y: np.ndarray) -> float:
    """Log marginal likelihood of (X, y) under `params`.

    log p(y|X) = -1/2 y^T K_y^{-1} y - 1/2 log|K_y| - n/2 log(2 pi)
    """
    X = as_float_2d(X)
    y = as_float_1d(y)
    check_consistent_rows(X, y)
    K = matern52_kernel(X, X, params)
    L, _ = chol_with_jitter(K, params.noise_variance)
    alpha = cho_solve((L, True), y, check_finite=False)
    n = y.shape[0]
    return float(
        -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2.0 * math.pi)
    )


def _neg_lml_and_grad(
    theta: np.ndarray, X: np.ndarray, y: np.ndarray, sq_diffs: np.ndarray
) -> tuple[float, np.ndarray]:
    """Negative LML and its gradient w.r.t. log-space hyperparameters.

    With W = alpha alpha^T - K_y^{-1} and dK/dtheta_j the kernel derivative,
    dL/dtheta_j = 1/2 tr(W dK/dtheta_j).  For log-lengthscales the Matern-5/2
    derivative is (5/3) sigma_f^2 (1 + sqrt5 r) exp(-sqrt5 r) * d_j^2 / l_j^2,
    which is finite at r = 0, so no special-casing is needed.
    """
    n, d = X.shape
    ls = np.exp(theta[:d])
    sf2 = math.exp(theta[d])
    sn2 = math.exp(theta[d + 1])

    R2 = np.tensordot(1.0 / (ls * ls), sq_diffs, axes=1)
    np.maximum(R2, 0.0, out=R2)
    R = np.sqrt(R2)
    E = np.exp(-SQRT5 * R)
    K = sf2 * (1.0 + SQRT5 * R + (5.0 / 3.0) * R2) * E

    try:
        L, jitter = chol_with_jitter(K, sn2)
    except np.linalg.LinAlgError:
        return 1e25, np.zeros(d + 2)
    alpha = cho_solve((L, True), y, check_finite=False)
    lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2.0 * math.pi)

    # K_y^{-1} via the factor, then W = alpha alpha^T - K_y^{-1}.
    Kinv = cho_solve((L, True), np.eye(n), check_finite=False)
    W = np.outer(alpha, alpha) - Kinv

    G = (5.0 / 3.0) * sf2 * (1.0 + SQRT5 * R) * E
    WG = (W * G).ravel()
    grad_ls = 0.5 * (sq_diffs.reshape(d, n * n) @ WG) / (ls * ls)
    grad_sf2 = 0.5 * float(np.sum(W * K))
    grad_sn2 = 0.5 * (sn2 + jitter) * float(np.trace(W))
    grad = np.concatenate([grad_ls, [grad_sf2, grad_sn2]])
    return -float(lml), -grad


class GaussianProcess(BaseEstimator, RegressorMixin):
    """Exact GP regressor with Matern-5/2 ARD kernel and zero prior mean.

    Targets are standardized internally when `normalize_y` is set, so the
    zero-mean prior acts on standardized costs; predictions are expressed
    on the original scale.  Pass `kernel_params` to freeze hyperparameters
    and skip optimization (used when a local model inherits tuned values).

    Parameters
    ----------
    kernel_params : KernelParams or None
        Fixed hyperparameters.  None means optimize by restarted L-BFGS-B.
    n_restarts : int
        Number of optimizer restarts from log-uniform random initializers.
    max_opt_evals : int
        Objective-evaluation cap per restart.
    normalize_y : bool
        Standardize targets to zero mean / unit variance before fitting.
    random_state : int, Generator, or None
        Source for restart initializers.
    init_params : KernelParams or None
        Warm start: run one extra optimization from these values before the
        random restarts (same convention as sklearn's GPR, whose first
        restart uses the kernel's current theta).
    """

    def __init__(
        self,
        kernel_params: KernelParams | None = None,
        n_restarts: int = 10,
        max_opt_evals: int = 30,
        normalize_y: bool = True,
        random_state: int | np.random.Generator | None = None,
        init_params: KernelParams | None = None,
    ):
        self.kernel_params = kernel_params
        self.n_restarts = n_restarts
        self.max_opt_evals = max_opt_evals
        self.normalize_y = normalize_y
        self.random_state = random_state
        self.init_params = init_params

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianProcess":
        X = as_float_2d(X)
        y = as_float_1d(y)
        check_consistent_rows(X, y)
        if X.shape[0] < 1:
            raise ValueError("need at least one observation")
        self.X_train_ = X
        if self.normalize_y:
            self._y_mean = float(np.mean(y))
            std = float(np.std(y))
            self._y_std = std if std > 1e-12 else 1.0
        else:
            self._y_mean = 0.0
            self._y_std = 1.0
        self._y_train = (y - self._y_mean) / self._y_std

        if self.kernel_params is not None:
            if self.kernel_params.dim != X.shape[1]:
                raise ValueError("kernel_params dimensionality does not match X")
            self.params_ = self.kernel_params
        else:
            self.params_ = self._optimize_hyperparameters(X, self._y_train)

        K = matern52_kernel(X, X, self.params_)
        self.L_, self.jitter_ = chol_with_jitter(K, self.params_.noise_variance)
        self.alpha_ = cho_solve((self.L_, True), self._y_train, check_finite=False)
        self.log_marginal_likelihood_value_ = float(
            -0.5 * self._y_train @ self.alpha_
            - np.sum(np.log(np.diag(self.L_)))
            - 0.5 * X.shape[0] * math.log(2.0 * math.pi)
        )
        return self

    def _optimize_hyperparameters(self, X: np.ndarray, y: np.ndarray) -> KernelParams:
        rng = check_rng(self.random_state)
        n, d = X.shape
        sq_diffs = _sq_diff_stack(X)
        lo = np.array([LOG_LS_BOUNDS[0]] * d + [LOG_SF2_BOUNDS[0], LOG_SN2_BOUNDS[0]])
        hi = np.array([LOG_LS_BOUNDS[1]] * d + [LOG_SF2_BOUNDS[1], LOG_SN2_BOUNDS[1]])
        bounds = list(zip(lo, hi))
        lo_init = np.array([LOG_LS_INIT[0]] * d + [LOG_SF2_INIT[0], LOG_SN2_INIT[0]])
        hi_init = np.array([LOG_LS_INIT[1]] * d + [LOG_SF2_INIT[1], LOG_SN2_INIT[1]])

        starts = []
        if self.init_params is not None:
            if self.init_params.dim != d:
                raise ValueError("init_params dimensionality does not match X")
            starts.append(np.clip(self.init_params.to_log_vector(), lo, hi))
        starts.extend(rng.uniform(lo_init, hi_init) for _ in range(self.n_restarts))

        best_theta = None
        best_val = np.inf
        for theta0 in starts:
            res = minimize(
                _neg_lml_and_grad,
                theta0,
                args=(X, y, sq_diffs),
                method="L-BFGS-B",
                jac=True,
                bounds=bounds,
                options={"maxfun": self.max_opt_evals, "maxiter": self.max_opt_evals},
            )
            if np.isfinite(res.fun) and res.fun < best_val:
                best_val = float(res.fun)
                best_theta = np.asarray(res.x)
        if best_theta is None:
            raise RuntimeError("hyperparameter optimization failed on every restart")
        return KernelParams.from_log_vector(best_theta, d)

    def _check_fitted(self) -> None:
        if not hasattr(self, "alpha_"):
            raise NotFittedError("this GaussianProcess instance is not fitted yet")

    def predict(
        self, X: np.ndarray, return_var: bool = False
    ) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
        """Posterior mean (and latent variance) at X, on the original y scale."""
        self._check_fitted()
        X = as_float_2d(X)
        if X.shape[1] != self.X_train_.shape[1]:
            raise ValueError("query dimensionality does not match training data")
        Ks = matern52_kernel(X, self.X_train_, self.params_)
        mean = Ks @ self.alpha_ * self._y_std + self._y_mean
        if not return_var:
            return mean
        V = solve_triangular(self.L_, Ks.T, lower=True, check_finite=False)
        var = matern52_diag(X.shape[0], self.params_) - np.sum(V * V, axis=0)
        np.maximum(var, 0.0, out=var)
        return mean, var * self._y_std**2

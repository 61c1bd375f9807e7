"""Local GP whose prior is augmented by observations outside the subregion.

The model treats points inside a subregion exactly and compresses the
outside points through m inducing points with the FITC approximation.
Writing Q_ab = K_au K_uu^{-1} K_ub, the joint covariance over outside
targets f_o, inside targets f_i, and query targets f_* is

    [[Q_oo - diag(Q_oo - K_oo),  Q_oi,   Q_o*],
     [Q_io,                      K_ii,   K_i*],
     [Q_*o,                      K_*i,   K_**]]

so conditioning on the outside data yields a cheap global prior (cost
O(m^2 n_o)) and conditioning that prior on the inside data stays exact.
Training is two-staged: an exact GP fit on the inside data fixes the
kernel hyperparameters, then the inducing positions alone are tuned by
maximizing the FITC marginal likelihood of the outside data.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .gp import GaussianProcess, KernelParams, chol_with_jitter, matern52_kernel
from .validation import as_float_1d, as_float_2d, check_consistent_rows, check_rng

INDUCING_MAX = 50


def inducing_count(dim: int, n_total: int) -> int:
    """Inducing-point schedule: floor min(2d, 10), growing as n/20, capped at 50."""
    if dim < 1 or n_total < 0:
        raise ValueError("dim must be >= 1 and n_total >= 0")
    base = min(2 * dim, 10)
    return int(np.clip(max(base, n_total // 20), 1, INDUCING_MAX))


def _fitc_factors(
    X_o: np.ndarray, U: np.ndarray, params: KernelParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Shared FITC quantities: L_u, V_o = L_u^{-1} K_uo, Lambda diag, L_B.

    Lambda = diag(K_oo - Q_oo) + sigma_n^2 I and B = I + V_o Lambda^{-1} V_o^T,
    so (Q_oo + Lambda)^{-1} = Lambda^{-1} - Lambda^{-1} V_o^T B^{-1} V_o Lambda^{-1}.
    """
    K_uu = matern52_kernel(U, U, params)
    L_u, _ = chol_with_jitter(K_uu, 0.0)
    K_uo = matern52_kernel(U, X_o, params)
    V_o = solve_triangular(L_u, K_uo, lower=True, check_finite=False)
    lam = params.signal_variance - np.sum(V_o * V_o, axis=0) + params.noise_variance
    np.maximum(lam, 1e-12, out=lam)
    B = V_o / lam @ V_o.T
    B[np.diag_indices_from(B)] += 1.0
    L_B = cholesky(B, lower=True, check_finite=False)
    return L_u, V_o, lam, L_B


def fitc_log_marginal_likelihood(
    X_o: np.ndarray, y_o: np.ndarray, U: np.ndarray, params: KernelParams
) -> float:
    """log N(y_o; 0, Q_oo + Lambda) without forming any n_o x n_o matrix."""
    X_o = as_float_2d(X_o, "X_o")
    y_o = as_float_1d(y_o, "y_o")
    check_consistent_rows(X_o, y_o)
    try:
        _, V_o, lam, L_B = _fitc_factors(X_o, U, params)
    except np.linalg.LinAlgError:
        return -np.inf
    g = V_o @ (y_o / lam)
    w = solve_triangular(L_B, g, lower=True, check_finite=False)
    quad = y_o @ (y_o / lam) - w @ w
    logdet = 2.0 * np.sum(np.log(np.diag(L_B))) + np.sum(np.log(lam))
    n_o = y_o.shape[0]
    return float(-0.5 * quad - 0.5 * logdet - 0.5 * n_o * math.log(2.0 * math.pi))


def fitc_global_prior(
    X_o: np.ndarray,
    y_o: np.ndarray,
    U: np.ndarray,
    params: KernelParams,
    X_target: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """FITC posterior given the outside data, evaluated jointly at X_target.

    Returns the mean vector and full covariance matrix of f(X_target) after
    conditioning on y_o through the inducing points.  With no outside data
    this is the zero-mean kernel prior.
    """
    X_target = as_float_2d(X_target, "X_target")
    X_o = as_float_2d(X_o, "X_o") if np.size(X_o) else np.empty((0, X_target.shape[1]))
    if X_o.shape[0] == 0:
        K_tt = matern52_kernel(X_target, X_target, params)
        return np.zeros(X_target.shape[0]), K_tt
    y_o = as_float_1d(y_o, "y_o")
    check_consistent_rows(X_o, y_o)
    L_u, V_o, lam, L_B = _fitc_factors(X_o, U, params)
    g = V_o @ (y_o / lam)
    c = cho_solve((L_B, True), g, check_finite=False)
    K_ut = matern52_kernel(U, X_target, params)
    V_t = solve_triangular(L_u, K_ut, lower=True, check_finite=False)
    mean = V_t.T @ c
    # Sigma_1 = K_tt - V_t^T (I - B^{-1}) V_t
    Binv_Vt = cho_solve((L_B, True), V_t, check_finite=False)
    K_tt = matern52_kernel(X_target, X_target, params)
    cov = K_tt - V_t.T @ V_t + V_t.T @ Binv_Vt
    return mean, cov


def dense_reference_predict(
    X_o: np.ndarray,
    y_o: np.ndarray,
    X_i: np.ndarray,
    y_i: np.ndarray,
    U: np.ndarray,
    params: KernelParams,
    X_star: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Reference prediction from the explicitly assembled joint covariance.

    Builds the full (n_o + n_i + n_*) covariance with plain dense algebra
    and conditions on all observed targets at once.  Economical only for
    small problems; exists as the correctness anchor for the structured
    implementation in AugmentedLocalGP.
    """
    X_i = as_float_2d(X_i, "X_i")
    y_i = as_float_1d(y_i, "y_i")
    X_star = as_float_2d(X_star, "X_star")
    X_o = as_float_2d(X_o, "X_o") if np.size(X_o) else np.empty((0, X_i.shape[1]))
    y_o = as_float_1d(y_o, "y_o") if np.size(y_o) else np.empty(0)
    n_o, n_i = X_o.shape[0], X_i.shape[0]

    if n_o:
        K_uu = matern52_kernel(U, U, params)
        K_uo = matern52_kernel(U, X_o, params)
        K_ui = matern52_kernel(U, X_i, params)
        K_us = matern52_kernel(U, X_star, params)
        A_o = np.linalg.solve(K_uu, K_uo)
        Q_oo = K_uo.T @ A_o
        lam = np.diag(matern52_kernel(X_o, X_o, params)) - np.diag(Q_oo)
        top = Q_oo + np.diag(lam)
        Q_oi = K_uo.T @ np.linalg.solve(K_uu, K_ui)
        Q_os = K_uo.T @ np.linalg.solve(K_uu, K_us)
    else:
        top = np.empty((0, 0))
        Q_oi = np.empty((0, n_i))
        Q_os = np.empty((0, X_star.shape[0]))

    K_ii = matern52_kernel(X_i, X_i, params)
    K_is = matern52_kernel(X_i, X_star, params)
    K_ss = matern52_kernel(X_star, X_star, params)

    obs_cov = np.block([[top, Q_oi], [Q_oi.T, K_ii]])
    obs_cov = obs_cov + params.noise_variance * np.eye(n_o + n_i)
    cross = np.vstack([Q_os, K_is])  # cov(observed, f_*)
    y = np.concatenate([y_o, y_i])

    sol = np.linalg.solve(obs_cov, cross)
    mean = sol.T @ y
    var = np.diag(K_ss) - np.sum(cross * sol, axis=0)
    return mean, var


def _farthest_point_init(
    X_o: np.ndarray, m: int, center: np.ndarray
) -> np.ndarray:
    """Greedy max-min subset of X_o, seeded at the point nearest `center`."""
    d2_center = np.sum((X_o - center) ** 2, axis=1)
    chosen = [int(np.argmin(d2_center))]
    dist = np.sum((X_o - X_o[chosen[0]]) ** 2, axis=1)
    while len(chosen) < m:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((X_o - X_o[nxt]) ** 2, axis=1))
    return X_o[chosen].copy()


class AugmentedLocalGP(BaseEstimator, RegressorMixin):
    """Exact GP on inside data under a FITC-compressed global prior.

    fit() takes the inside split as (X, y) and the outside split as
    (X_outside, y_outside).  Stage one fits an exact GP to the inside data
    and freezes its kernel hyperparameters; stage two places the inducing
    points by greedy farthest-point init followed by a bounded coordinate
    search on the FITC marginal likelihood of the outside data.  With no
    outside data the model reduces to the stage-one exact GP.

    Parameters
    ----------
    n_inducing : int or None
        Number of inducing points; None uses the dimension/size schedule.
    kernel_params : KernelParams or None
        Frozen hyperparameters for stage one (None fits them).
    n_restarts, max_opt_evals : int
        Stage-one hyperparameter optimization budget.
    stage_two_passes : int
        Coordinate-search sweeps over the inducing coordinates (each sweep
        visits at most `stage_two_coord_budget` coordinates).
    stage_two_step : float
        Initial step as a fraction of the data bounding-box width.
    """

    def __init__(
        self,
        n_inducing: int | None = None,
        kernel_params: KernelParams | None = None,
        n_restarts: int = 10,
        max_opt_evals: int = 30,
        stage_two_passes: int = 4,
        stage_two_coord_budget: int = 96,
        stage_two_step: float = 0.1,
        normalize_y: bool = True,
        random_state: int | np.random.Generator | None = None,
    ):
        self.n_inducing = n_inducing
        self.kernel_params = kernel_params
        self.n_restarts = n_restarts
        self.max_opt_evals = max_opt_evals
        self.stage_two_passes = stage_two_passes
        self.stage_two_coord_budget = stage_two_coord_budget
        self.stage_two_step = stage_two_step
        self.normalize_y = normalize_y
        self.random_state = random_state

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        X_outside: np.ndarray | None = None,
        y_outside: np.ndarray | None = None,
        center: np.ndarray | None = None,
    ) -> "AugmentedLocalGP":
        X = as_float_2d(X)
        y = as_float_1d(y)
        check_consistent_rows(X, y)
        if X_outside is None or np.size(X_outside) == 0:
            X_out = np.empty((0, X.shape[1]))
            y_out = np.empty(0)
        else:
            X_out = as_float_2d(X_outside, "X_outside")
            y_out = as_float_1d(y_outside, "y_outside")
            check_consistent_rows(X_out, y_out)
            if X_out.shape[1] != X.shape[1]:
                raise ValueError("inside and outside data disagree on dimensionality")
        rng = check_rng(self.random_state)

        # one scaler over all targets keeps the zero-mean prior honest for
        # both splits and makes the no-outside case match a plain GP fit
        y_all = np.concatenate([y, y_out])
        if self.normalize_y:
            self._y_mean = float(np.mean(y_all))
            std = float(np.std(y_all))
            self._y_std = std if std > 1e-12 else 1.0
        else:
            self._y_mean, self._y_std = 0.0, 1.0
        z_in = (y - self._y_mean) / self._y_std
        z_out = (y_out - self._y_mean) / self._y_std

        stage_one = GaussianProcess(
            kernel_params=self.kernel_params,
            n_restarts=self.n_restarts,
            max_opt_evals=self.max_opt_evals,
            normalize_y=False,
            random_state=rng,
        ).fit(X, z_in)
        self.gp_ = stage_one
        self.kernel_params_ = stage_one.params_
        self.X_in_ = X
        self._z_in = z_in
        self.X_out_ = X_out
        self._z_out = z_out

        if X_out.shape[0] == 0:
            self.exact_fallback_ = True
            self.inducing_ = np.empty((0, X.shape[1]))
            self.stage_two_trace_ = []
            return self

        self.exact_fallback_ = False
        d = X.shape[1]
        m = self.n_inducing or inducing_count(d, X.shape[0] + X_out.shape[0])
        m = min(m, X_out.shape[0])
        seed_center = np.asarray(center, dtype=np.float64).ravel() if center is not None else X.mean(axis=0)
        U0 = _farthest_point_init(X_out, m, seed_center)
        self.inducing_, self.stage_two_trace_ = self._optimize_inducing(U0, rng)
        self._cache_prediction_factors()
        return self

    def _optimize_inducing(
        self, U0: np.ndarray, rng: np.random.Generator
    ) -> tuple[np.ndarray, list[float]]:
        params = self.kernel_params_
        X_o, z_o = self.X_out_, self._z_out
        all_pts = np.vstack([self.X_in_, X_o])
        lo = all_pts.min(axis=0)
        hi = all_pts.max(axis=0)
        widths = np.maximum(hi - lo, 1e-12)

        U = U0.copy()
        best = fitc_log_marginal_likelihood(X_o, z_o, U, params)
        trace = [best]
        m, d = U.shape
        step = self.stage_two_step
        for _ in range(self.stage_two_passes):
            n_coords = m * d
            if n_coords <= self.stage_two_coord_budget:
                coords = np.arange(n_coords)
            else:
                coords = rng.choice(n_coords, size=self.stage_two_coord_budget, replace=False)
            improved = False
            for flat in coords:
                i, j = divmod(int(flat), d)
                base = U[i, j]
                for delta in (step * widths[j], -step * widths[j]):
                    cand = float(np.clip(base + delta, lo[j], hi[j]))
                    if cand == base:
                        continue
                    U[i, j] = cand
                    val = fitc_log_marginal_likelihood(X_o, z_o, U, params)
                    if val > best:
                        best = val
                        improved = True
                        break
                    U[i, j] = base
            trace.append(best)
            if not improved:
                step *= 0.5
                if step < 1e-3:
                    break
        return U, trace

    def _cache_prediction_factors(self) -> None:
        params = self.kernel_params_
        L_u, V_o, lam, L_B = _fitc_factors(self.X_out_, self.inducing_, params)
        g = V_o @ (self._z_out / lam)
        self._L_u = L_u
        self._c = cho_solve((L_B, True), g, check_finite=False)
        m = L_B.shape[0]
        Binv = cho_solve((L_B, True), np.eye(m), check_finite=False)
        self._M = np.eye(m) - Binv  # Sigma_1(a,b) = K_ab - V_a^T M V_b
        K_ui = matern52_kernel(self.inducing_, self.X_in_, params)
        self._V_i = solve_triangular(L_u, K_ui, lower=True, check_finite=False)
        mu1_i = self._V_i.T @ self._c
        K_ii = matern52_kernel(self.X_in_, self.X_in_, params)
        S = K_ii - self._V_i.T @ (self._M @ self._V_i)
        self._L_S, _ = chol_with_jitter(S, params.noise_variance)
        self._beta = cho_solve((self._L_S, True), self._z_in - mu1_i, check_finite=False)

    def _check_fitted(self) -> None:
        if not hasattr(self, "exact_fallback_"):
            raise NotFittedError("this AugmentedLocalGP instance is not fitted yet")

    def predict(
        self, X: np.ndarray, return_var: bool = False
    ) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
        """Posterior mean (and latent variance) on the original target scale."""
        self._check_fitted()
        X = as_float_2d(X)
        if X.shape[1] != self.X_in_.shape[1]:
            raise ValueError("query dimensionality does not match training data")
        if self.exact_fallback_:
            out = self.gp_.predict(X, return_var=return_var)
            if return_var:
                mean, var = out
                return mean * self._y_std + self._y_mean, var * self._y_std**2
            return out * self._y_std + self._y_mean

        params = self.kernel_params_
        K_us = matern52_kernel(self.inducing_, X, params)
        V_s = solve_triangular(self._L_u, K_us, lower=True, check_finite=False)
        mu1 = V_s.T @ self._c
        C = matern52_kernel(X, self.X_in_, params) - V_s.T @ (self._M @ self._V_i)
        mean = mu1 + C @ self._beta
        if not return_var:
            return mean * self._y_std + self._y_mean
        prior_var = params.signal_variance - np.sum(V_s * (self._M @ V_s), axis=0)
        G = solve_triangular(self._L_S, C.T, lower=True, check_finite=False)
        var = prior_var - np.sum(G * G, axis=0)
        np.maximum(var, 0.0, out=var)
        return mean * self._y_std + self._y_mean, var * self._y_std**2

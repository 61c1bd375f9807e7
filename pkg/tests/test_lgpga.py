import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from boing.gp import GaussianProcess, KernelParams, matern52_kernel
from boing.lgpga import (
    AugmentedLocalGP,
    _farthest_point_init,
    dense_reference_predict,
    fitc_global_prior,
    fitc_log_marginal_likelihood,
    inducing_count,
)
from helpers import random_kernel_params


def min_separated(rng, n, dim, min_dist):
    pts = []
    while len(pts) < n:
        cand = rng.uniform(size=dim)
        if all(np.linalg.norm(cand - p) >= min_dist for p in pts):
            pts.append(cand)
    return np.array(pts)


def dense_fitc_lml(X_o, y_o, U, params):
    """Independent FITC likelihood via explicit matrices and slogdet."""
    K_uu = matern52_kernel(U, U, params)
    K_uo = matern52_kernel(U, X_o, params)
    Q_oo = K_uo.T @ np.linalg.solve(K_uu, K_uo)
    lam = params.signal_variance - np.diag(Q_oo) + params.noise_variance
    C = Q_oo + np.diag(lam)
    _, logdet = np.linalg.slogdet(C)
    n = y_o.shape[0]
    return float(
        -0.5 * y_o @ np.linalg.solve(C, y_o) - 0.5 * logdet - 0.5 * n * np.log(2 * np.pi)
    )


class TestInducingCount:
    def test_schedule_values(self):
        assert inducing_count(5, 50) == 10
        assert inducing_count(3, 300) == 15
        assert inducing_count(10, 10_000) == 50

    def test_floor_is_dimension_rule(self):
        assert inducing_count(1, 0) == 2  # min(2d, 10) with d = 1
        assert inducing_count(7, 10) == 10  # min(14, 10)

    def test_growth_is_one_twentieth(self):
        assert inducing_count(2, 200) == 10
        assert inducing_count(2, 400) == 20

    def test_cap_at_fifty(self):
        assert inducing_count(30, 5000) == 50

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            inducing_count(0, 10)
        with pytest.raises(ValueError):
            inducing_count(2, -1)


class TestFitcMath:
    def test_lml_matches_dense(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            n_o = int(rng.integers(5, 30))
            m = int(rng.integers(2, 7))
            params = random_kernel_params(rng, d)
            X_o = min_separated(rng, n_o, d, 0.02)
            U = min_separated(rng, m, d, 0.1)
            y_o = rng.normal(size=n_o)
            got = fitc_log_marginal_likelihood(X_o, y_o, U, params)
            want = dense_fitc_lml(X_o, y_o, U, params)
            assert got == pytest.approx(want, rel=1e-8, abs=1e-8)

    def test_prior_exact_when_inducing_equal_outside(self):
        rng = np.random.default_rng(1)
        for _ in range(15):
            d = int(rng.integers(1, 4))
            n_o = int(rng.integers(3, 15))
            params = random_kernel_params(rng, d)
            X_o = min_separated(rng, n_o, d, 0.05)
            y_o = rng.normal(size=n_o)
            Xt = rng.uniform(size=(6, d))
            mean, cov = fitc_global_prior(X_o, y_o, X_o, params, Xt)
            K = matern52_kernel(X_o, X_o, params) + params.noise_variance * np.eye(n_o)
            mean_ref = matern52_kernel(Xt, X_o, params) @ np.linalg.solve(K, y_o)
            Kt = matern52_kernel(Xt, X_o, params)
            cov_ref = matern52_kernel(Xt, Xt, params) - Kt @ np.linalg.solve(K, Kt.T)
            np.testing.assert_allclose(mean, mean_ref, atol=1e-6)
            np.testing.assert_allclose(cov, cov_ref, atol=1e-6)

    def test_prior_with_no_outside_is_kernel_prior(self):
        params = KernelParams(np.array([1.0]), 2.0, 0.01)
        Xt = np.array([[0.1], [0.9]])
        mean, cov = fitc_global_prior(np.empty((0, 1)), np.empty(0), np.empty((0, 1)), params, Xt)
        np.testing.assert_array_equal(mean, 0.0)
        np.testing.assert_allclose(cov, matern52_kernel(Xt, Xt, params))


class TestFarthestPointInit:
    def test_seeds_nearest_to_center(self):
        X = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
        U = _farthest_point_init(X, 2, center=np.array([0.45, 0.45]))
        np.testing.assert_array_equal(U[0], [0.5, 0.5])

    def test_spreads_points(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(size=(50, 2))
        U = _farthest_point_init(X, 5, center=np.array([0.5, 0.5]))
        dists = [np.linalg.norm(U[i] - U[j]) for i in range(5) for j in range(i + 1, 5)]
        assert min(dists) > 0.2


class TestAugmentedLocalGP:
    def test_matches_dense_reference(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            n_o = int(rng.integers(6, 35))
            n_i = int(rng.integers(2, 12))
            m = int(rng.integers(2, 8))
            params = random_kernel_params(rng, d)
            X_o = min_separated(rng, n_o, d, 0.02)
            X_i = rng.uniform(size=(n_i, d))
            y_o = rng.normal(size=n_o)
            y_i = rng.normal(size=n_i)
            Xs = rng.uniform(size=(9, d))
            model = AugmentedLocalGP(
                n_inducing=m, kernel_params=params, stage_two_passes=0, normalize_y=False
            ).fit(X_i, y_i, X_o, y_o)
            mean, var = model.predict(Xs, return_var=True)
            mean_ref, var_ref = dense_reference_predict(
                X_o, y_o, X_i, y_i, model.inducing_, params, Xs
            )
            np.testing.assert_allclose(mean, mean_ref, atol=1e-6)
            np.testing.assert_allclose(var, np.maximum(var_ref, 0.0), atol=1e-6)

    def test_empty_outside_reduces_to_exact_gp(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(size=(12, 2))
        y = np.sin(3 * X[:, 0]) + X[:, 1]
        local = AugmentedLocalGP(random_state=9).fit(X, y)
        exact = GaussianProcess(random_state=9).fit(X, y)
        grid = rng.uniform(size=(20, 2))
        m1, v1 = local.predict(grid, return_var=True)
        m2, v2 = exact.predict(grid, return_var=True)
        assert local.exact_fallback_
        np.testing.assert_allclose(m1, m2, atol=1e-10)
        np.testing.assert_allclose(v1, v2, atol=1e-10)

    def test_stage_one_fixes_kernel_params(self):
        rng = np.random.default_rng(5)
        X_i = rng.uniform(size=(10, 2))
        y_i = rng.normal(size=10)
        X_o = rng.uniform(size=(25, 2))
        y_o = rng.normal(size=25)
        model = AugmentedLocalGP(n_inducing=4, random_state=7).fit(X_i, y_i, X_o, y_o)
        assert model.kernel_params_ is model.gp_.params_

    def test_stage_two_trace_is_non_decreasing(self):
        rng = np.random.default_rng(6)
        X_i = rng.uniform(size=(8, 2))
        y_i = np.sin(4 * X_i[:, 0])
        X_o = min_separated(rng, 30, 2, 0.02)
        y_o = np.sin(4 * X_o[:, 0])
        model = AugmentedLocalGP(
            n_inducing=5, stage_two_passes=6, random_state=8
        ).fit(X_i, y_i, X_o, y_o)
        trace = model.stage_two_trace_
        assert len(trace) >= 2
        assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))

    def test_outside_data_informs_predictions(self):
        # inside sees only a flat segment; outside reveals the slope
        X_i = np.array([[0.48], [0.5], [0.52]])
        y_i = 10.0 * X_i[:, 0]
        X_o = np.linspace(0, 1, 30)[:, None]
        X_o = X_o[(X_o[:, 0] < 0.4) | (X_o[:, 0] > 0.6)]
        y_o = 10.0 * X_o[:, 0]
        model = AugmentedLocalGP(n_inducing=6, random_state=0).fit(X_i, y_i, X_o, y_o)
        bare = GaussianProcess(random_state=0).fit(X_i, y_i)
        at_edge = np.array([[0.9]])
        aug_err = abs(model.predict(at_edge)[0] - 9.0)
        bare_err = abs(bare.predict(at_edge)[0] - 9.0)
        assert aug_err < bare_err

    def test_variance_nonnegative(self):
        rng = np.random.default_rng(7)
        X_i = rng.uniform(size=(6, 2))
        y_i = rng.normal(size=6)
        X_o = min_separated(rng, 20, 2, 0.02)
        y_o = rng.normal(size=20)
        model = AugmentedLocalGP(n_inducing=4, random_state=1).fit(X_i, y_i, X_o, y_o)
        _, var = model.predict(rng.uniform(size=(40, 2)), return_var=True)
        assert var.min() >= 0.0

    def test_not_fitted_raises(self):
        with pytest.raises(NotFittedError):
            AugmentedLocalGP().predict(np.array([[0.0]]))

    def test_dimension_mismatch_raises(self):
        X = np.ones((3, 2))
        y = np.zeros(3)
        with pytest.raises(ValueError):
            AugmentedLocalGP().fit(X, y, np.ones((4, 3)), np.zeros(4))

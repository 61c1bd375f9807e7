"""Shared dense-formula oracles for the test suite.

These reimplement model math directly from the defining equations with
plain dense linear algebra (np.linalg.solve, explicit matrices) so the
package code is checked against an independent path.
"""

from __future__ import annotations

import numpy as np

from boing.gp import KernelParams, matern52_kernel


def dense_gp_predict(
    X: np.ndarray,
    y: np.ndarray,
    X_star: np.ndarray,
    params: KernelParams,
    jitter: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Noisy-GP posterior mean/latent variance via direct dense solves."""
    n = X.shape[0]
    K = matern52_kernel(X, X, params) + (params.noise_variance + jitter) * np.eye(n)
    Ks = matern52_kernel(X_star, X, params)
    Kinv_y = np.linalg.solve(K, y)
    mean = Ks @ Kinv_y
    Kinv_Kst = np.linalg.solve(K, Ks.T)
    var = params.signal_variance - np.sum(Ks * Kinv_Kst.T, axis=1)
    return mean, var


def dense_gp_lml(X: np.ndarray, y: np.ndarray, params: KernelParams) -> float:
    """Log marginal likelihood via slogdet and a dense solve."""
    n = X.shape[0]
    K = matern52_kernel(X, X, params) + params.noise_variance * np.eye(n)
    _, logdet = np.linalg.slogdet(K)
    return float(-0.5 * y @ np.linalg.solve(K, y) - 0.5 * logdet - 0.5 * n * np.log(2 * np.pi))


def random_kernel_params(rng: np.random.Generator, dim: int) -> KernelParams:
    return KernelParams(
        lengthscales=rng.uniform(0.3, 2.0, size=dim),
        signal_variance=float(rng.uniform(0.5, 3.0)),
        noise_variance=float(rng.uniform(1e-4, 1e-1)),
    )

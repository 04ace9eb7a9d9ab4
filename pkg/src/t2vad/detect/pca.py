"""Principal-component pre-reduction (dimensionality guard for the
robust-covariance detector)."""

from __future__ import annotations

import numpy as np


def pca_fit(x: np.ndarray, n_dims: int):
    """Top-`n_dims` eigenvectors of the sample covariance.

    Returns (basis, mean): basis is (d, n_dims), columns ordered by
    explained variance (descending) with a deterministic sign convention.
    Raises when the covariance rank is below n_dims.
    """
    x = np.asarray(x, dtype=np.float64)
    n, d = x.shape
    if n <= n_dims:
        raise ValueError(f"need more than {n_dims} samples, got {n}")
    mean = x.mean(axis=0)
    cov = np.cov(x - mean, rowvar=False, ddof=1).reshape(d, d)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    scale = max(float(evals[0]), 1.0)
    rank = int(np.sum(evals > 1e-12 * scale))
    if rank < n_dims:
        raise ValueError(f"covariance rank {rank} < requested dims {n_dims}")
    basis = evecs[:, :n_dims].copy()
    for j in range(n_dims):  # sign convention: dominant entry positive
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return basis, mean


def pca_transform(x: np.ndarray, basis: np.ndarray, mean: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - mean) @ basis

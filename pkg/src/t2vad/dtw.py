"""Multivariate dynamic time warping.

Dependent DTW: one alignment over the full feature vector with Euclidean
local cost. Used as the hyperparameter-search objective and as one
component of the baseline anomaly score. `dtw_bruteforce` enumerates every
monotone alignment path and exists purely as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DTWParams:
    """band_radius is an optional Sakoe-Chiba window; None means full DP."""

    band_radius: int | None = None

    def __post_init__(self):
        if self.band_radius is not None and self.band_radius < 0:
            raise ValueError("band radius must be >= 0")


def _local_cost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances, (Na, Nb)."""
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(np.maximum(d2, 0.0))


def _validate_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("series must be (N, F) arrays")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("empty series")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"feature counts differ: {a.shape[1]} vs {b.shape[1]}")
    return a, b


def dtw_distance(a, b, params: DTWParams = DTWParams()) -> float:
    """Alignment cost D(Na, Nb) of the standard dependent-DTW recurrence.

    D(i,j) = d(a_i, b_j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1)); the DP runs
    over anti-diagonals so each wavefront is one vectorized update.
    """
    a, b = _validate_pair(a, b)
    na, nb = a.shape[0], b.shape[0]
    cost = _local_cost(a, b)
    if params.band_radius is not None:
        i_idx = np.arange(na)[:, None]
        j_idx = np.arange(nb)[None, :]
        # band around the resampled diagonal, radius in steps
        diag = i_idx * (nb - 1) / max(na - 1, 1)
        cost = np.where(np.abs(j_idx - diag) <= params.band_radius, cost, np.inf)

    d = np.full((na + 1, nb + 1), np.inf)
    d[0, 0] = 0.0
    for s in range(2, na + nb + 1):
        lo = max(1, s - nb)
        hi = min(na, s - 1)
        if lo > hi:
            continue
        i = np.arange(lo, hi + 1)
        j = s - i
        prev = np.minimum(d[i - 1, j], np.minimum(d[i, j - 1], d[i - 1, j - 1]))
        d[i, j] = cost[i - 1, j - 1] + prev
    return float(d[na, nb])


def dtw_bruteforce(a, b) -> float:
    """Minimum total cost over an exhaustive enumeration of monotone paths.

    Exponential; refuses pairs with Na*Nb > 64. Oracle only.
    """
    a, b = _validate_pair(a, b)
    na, nb = a.shape[0], b.shape[0]
    if na * nb > 64:
        raise ValueError(f"bruteforce limited to Na*Nb <= 64, got {na * nb}")
    cost = _local_cost(a, b)

    best = np.inf
    # iterative DFS over (i, j, accumulated cost); moves: right, down, diagonal
    stack = [(0, 0, cost[0, 0])]
    while stack:
        i, j, acc = stack.pop()
        if i == na - 1 and j == nb - 1:
            if acc < best:
                best = acc
            continue
        if i + 1 < na:
            stack.append((i + 1, j, acc + cost[i + 1, j]))
        if j + 1 < nb:
            stack.append((i, j + 1, acc + cost[i, j + 1]))
        if i + 1 < na and j + 1 < nb:
            stack.append((i + 1, j + 1, acc + cost[i + 1, j + 1]))
    return float(best)


def mean_dtw(pairs) -> float:
    """Mean DTW over (a, b) pairs; divides by pair count only."""
    total = 0.0
    count = 0
    for a, b in pairs:
        total += dtw_distance(a, b)
        count += 1
    if count == 0:
        raise ValueError("no pairs")
    return total / count

"""Exact k-nearest-neighbour distances for every point of a sample.

The production path (`knn_all`) finds neighbour indices with a kd-tree
(median split on the widest coordinate, leaf size 16, exact squared-distance
pruning); `knn_brute` is the O(N^2 m) reference it is tested against.  Both
report distances computed by the same kernel -- squared differences
accumulated coordinate by coordinate, square root last -- so their outputs
agree bitwise, not just within tolerance.

Duplicate points are legal here (they simply yield zero distances);
downstream modules decide whether a zero distance is an error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import KTooLarge

_LEAF_SIZE = 16


@dataclass(frozen=True)
class KnnDistances:
    """Per-point neighbour distances: ``rho[i, j-1]`` is the distance from
    row i to its j-th nearest other row.  Rows are nondecreasing."""

    n: int
    k_max: int
    rho: np.ndarray


def _checked(x, k_max: int) -> tuple[np.ndarray, int]:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D sample matrix, got ndim={x.ndim}")
    if x.shape[1] < 1:
        raise ValueError("sample must have at least one column")
    n = x.shape[0]
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if k_max > n - 1:
        raise KTooLarge(f"k_max={k_max} requires at least {k_max + 1} points, got {n}")
    return x, n


def _distances(x: np.ndarray, rows: np.ndarray, neighbours: np.ndarray) -> np.ndarray:
    # Shared kernel: accumulate squared differences in coordinate order.
    d2 = np.zeros(neighbours.shape, dtype=float)
    for c in range(x.shape[1]):
        diff = x[rows, c][:, None] - x[:, c][neighbours]
        d2 += diff * diff
    return np.sqrt(d2)


def knn_all(x, k_max: int) -> KnnDistances:
    """Euclidean distances to the 1st..k_max-th nearest neighbour of each row.

    Exact (no approximation); distance ties affect only which neighbour is
    reported, never the distance values.

    Raises
    ------
    KTooLarge
        If ``k_max > N - 1``.
    """
    x, n = _checked(x, k_max)
    tree = cKDTree(x, leafsize=_LEAF_SIZE, balanced_tree=True)
    _, idx = tree.query(x, k=k_max + 1)
    rows = np.arange(n)
    # Drop each row's self-match; when the row is duplicated the self index
    # may be absent from the result, in which case the first entry is an
    # equivalent zero-distance twin (argmax over all-False picks 0).
    self_pos = np.argmax(idx == rows[:, None], axis=1)
    keep = np.ones_like(idx, dtype=bool)
    keep[rows, self_pos] = False
    neighbours = idx[keep].reshape(n, k_max)
    return KnnDistances(n=n, k_max=k_max, rho=_distances(x, rows, neighbours))


def knn_brute(x, k_max: int) -> KnnDistances:
    """O(N^2 m) reference implementation of `knn_all`."""
    x, n = _checked(x, k_max)
    d2 = np.zeros((n, n))
    for c in range(x.shape[1]):
        col = x[:, c]
        diff = col[:, None] - col[None, :]
        d2 += diff * diff
    d = np.sqrt(d2)
    np.fill_diagonal(d, np.inf)
    d.sort(axis=1)
    return KnnDistances(n=n, k_max=k_max, rho=np.ascontiguousarray(d[:, :k_max]))

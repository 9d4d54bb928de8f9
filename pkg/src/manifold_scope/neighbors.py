"""Exact Euclidean nearest-neighbor queries over point clouds.

All queries are brute force and exact. Neighbor lists are ordered by
(distance, index) ascending so ties resolve the same way on every backend.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .tensor_io import PointCloud


@dataclass
class NeighborResult:
    """Neighbor indices with matching distances, nearest first."""

    indices: np.ndarray
    distances: np.ndarray


def knn(cloud: PointCloud, query_index: int, k: int) -> NeighborResult:
    """The k nearest neighbors of one cloud point, excluding the point itself."""
    n = cloud.n_points
    if not 0 <= query_index < n:
        raise ValueError("query_index out of range")
    if not 1 <= k <= n - 1:
        raise ValueError("k must be between 1 and n_points - 1, got %d" % k)
    idx, dist = knn_batch(cloud, np.array([query_index], dtype=np.int64), k)
    return NeighborResult(idx[0], dist[0])


def knn_batch(cloud: PointCloud, center_indices, k: int):
    """k nearest neighbors for many query points at once.

    Returns (indices, distances) of shape (len(centers), k).
    """
    n = cloud.n_points
    centers = np.ascontiguousarray(center_indices, dtype=np.int64)
    if centers.ndim != 1 or centers.size == 0:
        raise ValueError("center_indices must be a non-empty 1-D sequence")
    if centers.min() < 0 or centers.max() >= n:
        raise ValueError("center index out of range")
    if not 1 <= k <= n - 1:
        raise ValueError("k must be between 1 and n_points - 1, got %d" % k)
    return get_kernels().knn_batch(cloud.data, centers, k)


def two_nearest_all(cloud: PointCloud) -> np.ndarray:
    """Distances to the two nearest other points for every cloud point.

    Returns an (N, 2) array of (r1, r2) rows with r1 <= r2. A point with a
    bitwise duplicate gets r1 == 0.0 exactly.
    """
    if cloud.n_points < 3:
        raise ValueError("need at least 3 points, got %d" % cloud.n_points)
    r1, r2 = get_kernels().two_nearest_all(cloud.data)
    return np.column_stack([r1, r2])

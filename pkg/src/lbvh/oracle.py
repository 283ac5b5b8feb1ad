"""Brute-force reference search, O(n) per query, for tests and verification.

The oracle shares the library's conventions exactly (single-precision
clamp-gap arithmetic, inclusive radius comparison, (distance, ordinal) tie
order), so radius-set comparisons are exact rather than approximate.
"""

from __future__ import annotations

import numpy as np

from .traversal import KnnQuery, SpatialQuery
from .validation import check_points

__all__ = ["brute_radius", "brute_knn", "brute_radius_sets", "brute_knn_batch"]


def _dist_sq(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    # same accumulation order (x, then y, then z) as the traversal kernels
    d = points - center
    return d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2]


def brute_radius(points, q: SpatialQuery) -> np.ndarray:
    """Ascending ordinals of all points within q.radius of q.center."""
    pts = check_points(points, "points")
    center = np.array([q.center.x, q.center.y, q.center.z], dtype=np.float32)
    r = np.float32(q.radius)
    return np.flatnonzero(_dist_sq(pts, center) <= r * r)


def brute_knn(points, q: KnnQuery) -> tuple[np.ndarray, np.ndarray]:
    """The min(k, n) nearest ordinals and true distances, sorted by
    (distance, ordinal)."""
    pts = check_points(points, "points")
    center = np.array([q.center.x, q.center.y, q.center.z], dtype=np.float32)
    d2 = _dist_sq(pts, center)
    kk = min(q.k, pts.shape[0])
    order = np.lexsort((np.arange(pts.shape[0]), d2))[:kk]
    return order, np.sqrt(d2[order])


def brute_radius_sets(points, centers, radii) -> list[np.ndarray]:
    """Per-query ascending hit ordinals for a whole batch."""
    pts = check_points(points, "points")
    centers = check_points(centers, "centers")
    radii = np.asarray(radii, dtype=np.float32)
    if radii.ndim == 0:
        radii = np.full(centers.shape[0], radii, dtype=np.float32)
    out = []
    for c, r in zip(centers, radii):
        out.append(np.flatnonzero(_dist_sq(pts, c) <= r * r))
    return out


def brute_knn_batch(points, centers, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched k-nearest: (nq, min(k, n)) index and distance arrays."""
    pts = check_points(points, "points")
    centers = check_points(centers, "centers")
    n = pts.shape[0]
    kk = min(k, n)
    idx = np.empty((centers.shape[0], kk), dtype=np.int64)
    dist = np.empty((centers.shape[0], kk), dtype=np.float32)
    ordinals = np.arange(n)
    for i, c in enumerate(centers):
        d2 = _dist_sq(pts, c)
        order = np.lexsort((ordinals, d2))[:kk]
        idx[i] = order
        dist[i] = np.sqrt(d2[order])
    return idx, dist

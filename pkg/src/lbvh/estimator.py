"""scikit-learn style front end for the BVH index.

``BvhNeighbors`` follows the fit-then-query protocol of
``sklearn.neighbors.NearestNeighbors`` but returns CSR-style
(offsets, indices) batches, which is the natural shape for variable-length
radius results.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .datasets import default_radius
from .traversal import (
    KnnQuery,
    ResultSet,
    SpatialQuery,
    query_knn,
    query_spatial_1p,
    query_spatial_2p,
)
from .tree import build
from .validation import check_points

__all__ = ["BvhNeighbors"]


class BvhNeighbors(BaseEstimator):
    """Spatial index over 3-D points or boxes with batched neighbor queries.

    Parameters
    ----------
    n_neighbors : int, default=10
        Neighbor count used by :meth:`kneighbors` when none is passed.
    radius : float, optional
        Radius used by :meth:`radius_neighbors` when none is passed.
        Defaults to the density-calibrated radius for ``n_neighbors``.
    sort_queries : bool, default=True
        Pre-sort query batches along the Z-order curve before traversal.
        Never changes results, only memory access patterns.
    buffer_size : int, optional
        Per-query result preallocation for radius queries. When set, the
        single-pass strategy is used, falling back to count-and-fill if any
        query overflows. When None, count-and-fill is always used.
    threads : int, default=1
        Worker threads for batched construction and queries.

    Examples
    --------
    >>> import numpy as np
    >>> from lbvh import BvhNeighbors
    >>> index = BvhNeighbors(n_neighbors=2).fit(np.random.rand(100, 3))
    >>> result = index.kneighbors(np.random.rand(5, 3))
    >>> result.hits(0).shape
    (2,)
    """

    def __init__(self, n_neighbors: int = 10, radius: float | None = None,
                 sort_queries: bool = True, buffer_size: int | None = None,
                 threads: int = 1):
        self.n_neighbors = n_neighbors
        self.radius = radius
        self.sort_queries = sort_queries
        self.buffer_size = buffer_size
        self.threads = threads

    def fit(self, X, y=None) -> "BvhNeighbors":
        """Index X, which may be points (n, 3), boxes (n, 6), a
        ``(mins, maxs)`` pair, or a sequence of Box/Point objects."""
        self.tree_ = build(X, threads=self.threads)
        self.n_samples_fit_ = self.tree_.leaf_count
        return self

    def _tree(self):
        if not hasattr(self, "tree_"):
            raise NotFittedError("this BvhNeighbors instance is not fitted yet")
        return self.tree_

    def radius_neighbors(self, X, radius: float | None = None) -> ResultSet:
        """All indexed objects within ``radius`` of each query point
        (inclusive). Hit order within a query is unspecified."""
        tree = self._tree()
        centers = check_points(X)
        r = radius if radius is not None else self.radius
        if r is None:
            r = default_radius(self.n_neighbors)
        if self.buffer_size is not None:
            result, _ = query_spatial_1p(tree, (centers, r), self.buffer_size,
                                         self.sort_queries, self.threads)
            return result
        return query_spatial_2p(tree, (centers, r), self.sort_queries, self.threads)

    def kneighbors(self, X, n_neighbors: int | None = None) -> ResultSet:
        """The min(k, n_samples_fit_) nearest indexed objects per query,
        sorted by (distance, index); distances included."""
        tree = self._tree()
        centers = check_points(X)
        k = n_neighbors if n_neighbors is not None else self.n_neighbors
        return query_knn(tree, (centers, k), self.sort_queries, self.threads)

    def query(self, queries, buffer_size: int | None = None) -> ResultSet:
        """Run a homogeneous batch of SpatialQuery or KnnQuery objects."""
        tree = self._tree()
        queries = list(queries)
        if all(isinstance(q, SpatialQuery) for q in queries):
            bs = buffer_size if buffer_size is not None else self.buffer_size
            if bs is not None:
                result, _ = query_spatial_1p(tree, queries, bs,
                                             self.sort_queries, self.threads)
                return result
            return query_spatial_2p(tree, queries, self.sort_queries, self.threads)
        if all(isinstance(q, KnnQuery) for q in queries):
            return query_knn(tree, queries, self.sort_queries, self.threads)
        raise TypeError("queries must be all SpatialQuery or all KnnQuery")

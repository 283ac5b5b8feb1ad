"""Batched tree queries: within-radius (two-pass or buffered) and k-nearest.

Batch results use a compressed-sparse-row layout: ``offsets`` has one entry
per query plus a trailing total, and the hits for query q are
``indices[offsets[q]:offsets[q+1]]``. Spatial hit order within a query is
unspecified; k-nearest spans are sorted ascending by (distance, ordinal) and
carry true (non-squared) distances.

Queries in a batch may be pre-sorted by the Morton code of their centers so
neighboring workers traverse similar subtrees; results are always written
back in the caller's query order, so the flag never changes output content.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .geometry import Box, Point
from .morton import morton_codes
from .parallel import run_chunked
from .tree import Bvh
from .validation import check_neighbor_counts, check_points, check_radii

__all__ = [
    "SpatialQuery",
    "KnnQuery",
    "ResultSet",
    "STACK_CAPACITY",
    "traverse_spatial_one",
    "traverse_knn_one",
    "query_spatial_2p",
    "query_spatial_1p",
    "query_knn",
    "query_sort_order",
]

STACK_CAPACITY = _kernels.STACK_CAPACITY


@dataclass(frozen=True)
class SpatialQuery:
    """Find every object within ``radius`` of ``center`` (inclusive)."""

    center: Point
    radius: float

    def __post_init__(self):
        if not math.isfinite(self.radius) or self.radius < 0:
            raise ValueError(f"radius must be finite and non-negative, got {self.radius}")


@dataclass(frozen=True)
class KnnQuery:
    """Find the ``k`` objects nearest to ``center``."""

    center: Point
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ResultSet:
    """CSR-style batched query output.

    ``offsets`` is non-decreasing with ``offsets[0] == 0`` and
    ``offsets[-1] == len(indices)``. ``distances`` is present for k-nearest
    results only, aligned with ``indices``.
    """

    offsets: np.ndarray
    indices: np.ndarray
    distances: np.ndarray | None = None

    def __post_init__(self):
        if self.offsets.ndim != 1 or self.offsets.shape[0] < 1 or self.offsets[0] != 0:
            raise ValueError("offsets must be 1-D and start at 0")
        if (np.diff(self.offsets) < 0).any():
            raise ValueError("offsets must be non-decreasing")
        if int(self.offsets[-1]) != self.indices.shape[0]:
            raise ValueError("offsets total must equal indices length")
        if self.distances is not None and self.distances.shape != self.indices.shape:
            raise ValueError("distances must align with indices")

    @property
    def query_count(self) -> int:
        return self.offsets.shape[0] - 1

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def hits(self, q: int) -> np.ndarray:
        return self.indices[self.offsets[q]:self.offsets[q + 1]]

    def hit_distances(self, q: int) -> np.ndarray:
        if self.distances is None:
            raise ValueError("result set carries no distances")
        return self.distances[self.offsets[q]:self.offsets[q + 1]]


# ---------------------------------------------------------------------------
# Input normalization
# ---------------------------------------------------------------------------


def _spatial_arrays(queries) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(queries, tuple) and len(queries) == 2:
        centers = check_points(queries[0], "query centers")
        radii = check_radii(queries[1], centers.shape[0])
        return centers, radii
    queries = list(queries)
    if not all(isinstance(q, SpatialQuery) for q in queries):
        raise TypeError("expected SpatialQuery items or a (centers, radii) pair")
    if not queries:
        return np.empty((0, 3), dtype=np.float32), np.empty(0, dtype=np.float32)
    centers = np.array([[q.center.x, q.center.y, q.center.z] for q in queries],
                       dtype=np.float32)
    radii = np.array([q.radius for q in queries], dtype=np.float32)
    return centers, radii


def _knn_arrays(queries) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(queries, tuple) and len(queries) == 2:
        centers = check_points(queries[0], "query centers")
        ks = check_neighbor_counts(queries[1], centers.shape[0])
        return centers, ks
    queries = list(queries)
    if not all(isinstance(q, KnnQuery) for q in queries):
        raise TypeError("expected KnnQuery items or a (centers, k) pair")
    if not queries:
        return np.empty((0, 3), dtype=np.float32), np.empty(0, dtype=np.int64)
    centers = np.array([[q.center.x, q.center.y, q.center.z] for q in queries],
                       dtype=np.float32)
    ks = np.array([q.k for q in queries], dtype=np.int64)
    return centers, ks


def query_sort_order(centers, scene: Box | tuple) -> np.ndarray:
    """Permutation ordering query centers by Morton code, ordinal tie-break.

    ``scene`` must be the tree's scene box so query codes live on the same
    grid the leaves were sorted on.
    """
    centers = check_points(centers, "query centers")
    if isinstance(scene, Box):
        smin = np.array([scene.min.x, scene.min.y, scene.min.z], dtype=np.float32)
        smax = np.array([scene.max.x, scene.max.y, scene.max.z], dtype=np.float32)
    else:
        smin, smax = scene
    codes = morton_codes(centers, smin, smax)
    return np.argsort(codes, kind="stable")


def _traversal_order(tree: Bvh, centers: np.ndarray, sort_queries: bool) -> np.ndarray:
    if sort_queries and centers.shape[0] > 1:
        return query_sort_order(centers, (tree.scene_min, tree.scene_max))
    return np.arange(centers.shape[0], dtype=np.int64)


def _check_errors(err: np.ndarray) -> None:
    if err.any():
        raise RuntimeError("traversal stack exhausted")


def _exclusive_scan(counts: np.ndarray) -> np.ndarray:
    offsets = np.zeros(counts.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets


# ---------------------------------------------------------------------------
# Batched queries
# ---------------------------------------------------------------------------


def query_spatial_2p(tree: Bvh, queries, sort_queries: bool = True,
                     threads: int = 1) -> ResultSet:
    """Within-radius batch via count-and-fill: one pass to size the output,
    an exclusive scan, then a second pass writing into disjoint spans."""
    centers, radii = _spatial_arrays(queries)
    nq = centers.shape[0]
    if nq == 0:
        return ResultSet(np.zeros(1, dtype=np.int64), np.empty(0, dtype=np.int32))
    order = _traversal_order(tree, centers, sort_queries)
    counts = np.zeros(nq, dtype=np.int64)
    err = np.zeros(nq, dtype=np.uint8)
    dummy_off = np.zeros(1, dtype=np.int64)
    dummy_out = np.empty(0, dtype=np.int32)
    run_chunked(
        lambda s, e: _kernels.spatial_pass(
            tree.node_mins, tree.node_maxs, tree.left, tree.right, tree.leaf_obj,
            centers, radii, order, s, e, counts, dummy_off, dummy_out, False, err),
        nq, threads)
    _check_errors(err)
    offsets = _exclusive_scan(counts)
    out = np.empty(int(offsets[-1]), dtype=np.int32)
    run_chunked(
        lambda s, e: _kernels.spatial_pass(
            tree.node_mins, tree.node_maxs, tree.left, tree.right, tree.leaf_obj,
            centers, radii, order, s, e, counts, offsets, out, True, err),
        nq, threads)
    _check_errors(err)
    return ResultSet(offsets, out)


def query_spatial_1p(tree: Bvh, queries, buffer_size: int,
                     sort_queries: bool = True, threads: int = 1
                     ) -> tuple[ResultSet, bool]:
    """Within-radius batch with per-query preallocation of ``buffer_size``.

    A single pass counts and stores; if no query overflows its row the rows
    are compacted into CSR form, otherwise the whole batch falls back to the
    two-pass path. Returns the result set and whether fallback occurred.
    Per-query results are identical to :func:`query_spatial_2p` either way.
    """
    buffer_size = int(buffer_size)
    if buffer_size < 1:
        raise ValueError(f"buffer_size must be >= 1, got {buffer_size}")
    centers, radii = _spatial_arrays(queries)
    nq = centers.shape[0]
    if nq == 0:
        return ResultSet(np.zeros(1, dtype=np.int64), np.empty(0, dtype=np.int32)), False
    order = _traversal_order(tree, centers, sort_queries)
    buf = np.empty((nq, buffer_size), dtype=np.int32)
    counts = np.zeros(nq, dtype=np.int64)
    overflow = np.zeros(nq, dtype=np.uint8)
    err = np.zeros(nq, dtype=np.uint8)
    run_chunked(
        lambda s, e: _kernels.spatial_pass_buffered(
            tree.node_mins, tree.node_maxs, tree.left, tree.right, tree.leaf_obj,
            centers, radii, order, s, e, buf, counts, overflow, err),
        nq, threads)
    _check_errors(err)
    if overflow.any():
        return query_spatial_2p(tree, (centers, radii), sort_queries, threads), True
    offsets = _exclusive_scan(counts)
    out = np.empty(int(offsets[-1]), dtype=np.int32)
    run_chunked(lambda s, e: _kernels.compact_rows(buf, counts, offsets, out, s, e),
                nq, threads)
    return ResultSet(offsets, out), False


def query_knn(tree: Bvh, queries, sort_queries: bool = True,
              threads: int = 1) -> ResultSet:
    """k-nearest batch. Result sizes are known up front (min(k, n) per
    query), so spans are preallocated and a single pass fills them."""
    centers, ks = _knn_arrays(queries)
    nq = centers.shape[0]
    if nq == 0:
        return ResultSet(np.zeros(1, dtype=np.int64), np.empty(0, dtype=np.int32),
                         np.empty(0, dtype=np.float32))
    order = _traversal_order(tree, centers, sort_queries)
    spans = np.minimum(ks, tree.leaf_count)
    offsets = _exclusive_scan(spans)
    out_idx = np.empty(int(offsets[-1]), dtype=np.int32)
    out_dist = np.empty(int(offsets[-1]), dtype=np.float32)
    err = np.zeros(nq, dtype=np.uint8)
    run_chunked(
        lambda s, e: _kernels.knn_pass(
            tree.node_mins, tree.node_maxs, tree.left, tree.right, tree.leaf_obj,
            centers, order, s, e, offsets, out_idx, out_dist, err),
        nq, threads)
    _check_errors(err)
    return ResultSet(offsets, out_idx, out_dist)


# ---------------------------------------------------------------------------
# Single-query reference traversals (plain Python, same f32 arithmetic)
# ---------------------------------------------------------------------------


def _box_dist_sq_py(tree: Bvh, node: int, center: np.ndarray) -> np.float32:
    d = np.float32(0.0)
    for axis in range(3):
        v = center[axis]
        lo = tree.node_mins[node, axis]
        hi = tree.node_maxs[node, axis]
        if v < lo:
            t = lo - v
            d += t * t
        elif v > hi:
            t = v - hi
            d += t * t
    return d


def traverse_spatial_one(tree: Bvh, query: SpatialQuery,
                         sink: Callable[[int], None] | None = None) -> int:
    """Run one within-radius query, feeding each hit ordinal to ``sink``.

    Returns the number of hits. Delivery order is unspecified. This is the
    uncompiled reference path; batches should use :func:`query_spatial_2p`
    or :func:`query_spatial_1p`.
    """
    center = np.array([query.center.x, query.center.y, query.center.z],
                      dtype=np.float32)
    r = np.float32(query.radius)
    r2 = r * r
    internal = tree.internal_count
    count = 0
    if tree.leaf_count == 1:
        if _box_dist_sq_py(tree, 0, center) <= r2:
            count = 1
            if sink is not None:
                sink(int(tree.leaf_obj[0]))
        return count
    stack = [0]
    while stack:
        node = stack.pop()
        for child in (int(tree.left[node]), int(tree.right[node])):
            if _box_dist_sq_py(tree, child, center) <= r2:
                if child >= internal:
                    count += 1
                    if sink is not None:
                        sink(int(tree.leaf_obj[child - internal]))
                else:
                    if len(stack) >= STACK_CAPACITY:
                        raise RuntimeError("traversal stack exhausted")
                    stack.append(child)
    return count


def traverse_knn_one(tree: Bvh, query: KnnQuery) -> list[tuple[int, float]]:
    """Run one k-nearest query; returns min(k, n) (ordinal, distance) pairs
    sorted ascending by (distance, ordinal), distances unsquared.

    Uncompiled reference path mirroring the batched kernel: a stack ordered
    so the closer child is visited first, candidates kept in a bounded
    worst-on-top structure, entries worse than the current k-th best skipped.
    """
    center = np.array([query.center.x, query.center.y, query.center.z],
                      dtype=np.float32)
    kk = min(query.k, tree.leaf_count)
    internal = tree.internal_count
    # worst candidate on top: min-heap over (-distance, -ordinal)
    heap: list[tuple[np.float32, int]] = []

    def offer(dist: np.float32, obj: int) -> None:
        entry = (-dist, -obj)
        if len(heap) < kk:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)

    def worst() -> np.float32:
        return -heap[0][0]

    if tree.leaf_count == 1:
        offer(_box_dist_sq_py(tree, 0, center), int(tree.leaf_obj[0]))
    else:
        stack = [(0, _box_dist_sq_py(tree, 0, center))]
        while stack:
            node, nd = stack.pop()
            if len(heap) == kk and nd > worst():
                continue
            cl, cr = int(tree.left[node]), int(tree.right[node])
            dl = _box_dist_sq_py(tree, cl, center)
            dr = _box_dist_sq_py(tree, cr, center)
            ordered = ((cr, dr), (cl, dl)) if dl <= dr else ((cl, dl), (cr, dr))
            for child, cd in ordered:
                if len(heap) == kk and cd > worst():
                    continue
                if child >= internal:
                    offer(cd, int(tree.leaf_obj[child - internal]))
                else:
                    if len(stack) >= STACK_CAPACITY:
                        raise RuntimeError("traversal stack exhausted")
                    stack.append((child, cd))
    pairs = sorted((float(-nd), -no) for nd, no in heap)
    return [(obj, float(np.sqrt(np.float32(d)))) for d, obj in pairs]

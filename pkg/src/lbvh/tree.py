"""Linear BVH construction: Morton sort, parallel topology generation, refit.

The pipeline is fixed: scene box reduction, per-centroid Morton codes, stable
(code, index) sort, independent per-node topology resolution, then bottom-up
box refit. Stages are internally parallelizable with a barrier between each;
the finished tree is immutable and safe to share across threads.

Node storage is a single flat array: internal nodes occupy ordinals 0..n-2
(0 is the root for n > 1) and the leaf at sorted position p has ordinal
(n-1)+p, which keeps allocation static at exactly 2n-1 nodes. Nodes hold no
parent links; the refit stage uses a temporary parent array that is discarded
after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .geometry import Box
from .morton import morton_codes
from .parallel import run_chunked
from .validation import check_boxes

__all__ = [
    "Bvh",
    "Topology",
    "build",
    "common_prefix",
    "find_split",
    "node_range",
    "generate_topology",
    "refit_bounds",
]


def _augmented_keys(sorted_codes: np.ndarray) -> np.ndarray:
    # 64-bit concatenation code * 2**32 + position; all keys distinct, so
    # equal codes split on position bits (the duplicate tie-break).
    codes = np.asarray(sorted_codes, dtype=np.int64)
    return (codes << 32) | np.arange(codes.shape[0], dtype=np.int64)


def common_prefix(codes, i: int, j: int) -> int:
    """Common-prefix length of sorted keys i and j, or -1 if j is out of range.

    Measured on the 64-bit concatenation of the 32-bit code word with the
    32-bit position word, so equal codes compare on their position bits.
    """
    codes = np.asarray(codes, dtype=np.int64)
    n = codes.shape[0]
    if j < 0 or j >= n:
        return -1
    x = int((codes[i] << 32) | i) ^ int((codes[j] << 32) | j)
    return 64 - x.bit_length()


def find_split(codes, first: int, last: int) -> int:
    """Split position s in [first, last) separating the highest differing bit."""
    if not 0 <= first < last < len(codes):
        raise ValueError(f"need 0 <= first < last < {len(codes)}, got ({first}, {last})")
    return int(_kernels.find_split_kernel(_augmented_keys(codes), first, last))


def node_range(codes, i: int) -> tuple[int, int]:
    """Leaf range [first, last] owned by internal node i."""
    n = len(codes)
    if not 0 <= i < n - 1:
        raise ValueError(f"internal ordinal must be in [0, {n - 1}), got {i}")
    first, last = _kernels.node_range_kernel(_augmented_keys(codes), i)
    return int(first), int(last)


class Topology(NamedTuple):
    """Child links of the n-1 internal nodes plus the auxiliary parent array."""

    left: np.ndarray
    right: np.ndarray
    parent: np.ndarray


def generate_topology(sorted_codes, threads: int = 1) -> Topology:
    """Resolve all internal nodes of the radix tree over sorted codes.

    Every internal node is computed independently, so the work may be chunked
    across threads in any order with identical results.
    """
    codes = np.asarray(sorted_codes)
    n = codes.shape[0]
    if n < 1:
        raise ValueError("empty scene")
    left = np.full(max(n - 1, 0), -1, dtype=np.int32)
    right = np.full(max(n - 1, 0), -1, dtype=np.int32)
    parent = np.full(2 * n - 1, -1, dtype=np.int32)
    if n > 1:
        akeys = _augmented_keys(codes)
        run_chunked(
            lambda s, e: _kernels.build_topology(akeys, left, right, parent, s, e),
            n - 1,
            threads,
        )
    return Topology(left, right, parent)


def refit_bounds(node_mins, node_maxs, topology: Topology) -> None:
    """Fill internal boxes bottom-up; leaf boxes must already be in place.

    An internal box is written only after both child boxes are final: each
    leaf walks toward the root and the first walker arriving at a node
    terminates, letting the second (whose sibling subtree is complete)
    proceed.
    """
    n = (node_mins.shape[0] + 1) // 2
    if n > 1:
        _kernels.refit_kernel(node_mins, node_maxs, topology.left, topology.right,
                              topology.parent, n)


@dataclass(frozen=True)
class Bvh:
    """Immutable linear BVH: n leaves, n-1 internal nodes, flat node arrays.

    ``node_mins``/``node_maxs`` are indexed by node ordinal; ``left``/``right``
    give child ordinals for internal nodes; ``leaf_obj[p]`` is the original
    object ordinal of the leaf at Morton-sorted position p (node ordinal
    ``(n-1)+p``).
    """

    node_mins: np.ndarray
    node_maxs: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_obj: np.ndarray
    scene_min: np.ndarray = field(repr=False)
    scene_max: np.ndarray = field(repr=False)

    @property
    def leaf_count(self) -> int:
        return self.leaf_obj.shape[0]

    @property
    def internal_count(self) -> int:
        return self.leaf_count - 1

    @property
    def node_count(self) -> int:
        return 2 * self.leaf_count - 1

    @property
    def scene(self) -> Box:
        return Box.from_arrays(self.scene_min, self.scene_max)

    def is_leaf(self, node: int) -> bool:
        return node >= self.internal_count

    def leaf_ordinal(self, node: int) -> int:
        """Original object ordinal stored in a leaf node."""
        if not self.is_leaf(node):
            raise ValueError(f"node {node} is internal")
        return int(self.leaf_obj[node - self.internal_count])

    def children(self, node: int) -> tuple[int, int]:
        if self.is_leaf(node):
            raise ValueError(f"node {node} is a leaf")
        return int(self.left[node]), int(self.right[node])

    def node_box(self, node: int) -> Box:
        return Box.from_arrays(self.node_mins[node], self.node_maxs[node])

    def __repr__(self) -> str:  # keep array dumps out of tracebacks
        return f"Bvh(leaves={self.leaf_count}, nodes={self.node_count})"


def build(boxes, threads: int = 1) -> Bvh:
    """Build a linear BVH over a non-empty collection of boxes.

    Accepts any form :func:`~lbvh.validation.check_boxes` does: (n, 3) points,
    (n, 6) corner rows, a ``(mins, maxs)`` pair, or Box/Point sequences.
    Construction is deterministic: the same input yields bit-identical node
    arrays regardless of ``threads``.
    """
    mins, maxs = check_boxes(boxes)
    n = mins.shape[0]
    if n == 0:
        raise ValueError("empty scene")
    scene_min = mins.min(axis=0)
    scene_max = maxs.max(axis=0)
    # midpoints in double so corner sums near the float32 limit don't overflow
    centroids = (mins.astype(np.float64) + maxs) * 0.5
    codes = morton_codes(centroids, scene_min, scene_max)
    perm = np.argsort(codes, kind="stable")

    node_mins = np.empty((2 * n - 1, 3), dtype=np.float32)
    node_maxs = np.empty((2 * n - 1, 3), dtype=np.float32)
    node_mins[n - 1:] = mins[perm]
    node_maxs[n - 1:] = maxs[perm]
    topo = generate_topology(codes[perm], threads=threads)
    refit_bounds(node_mins, node_maxs, topo)
    # the auxiliary parent array is dropped here; nodes keep no parent links

    leaf_obj = perm.astype(np.int32)
    for arr in (node_mins, node_maxs, topo.left, topo.right, leaf_obj,
                scene_min, scene_max):
        arr.setflags(write=False)
    return Bvh(node_mins, node_maxs, topo.left, topo.right, leaf_obj,
               scene_min, scene_max)

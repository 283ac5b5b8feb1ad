"""Z-order (Morton) sort keys for box centroids.

Keys are 30-bit codes, 10 bits per axis on a 1024-cell grid normalized by the
scene box, with x occupying the most significant bit of each 3-bit group.
Duplicate codes are disambiguated by the original object ordinal, so sorting
by (code, index) is a strict total order and the sorted leaf order is unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Box, Point

__all__ = [
    "MORTON_BITS",
    "GRID_RESOLUTION",
    "MortonKey",
    "expand_bits_10",
    "morton_code",
    "morton_codes",
    "sort_by_key",
]

MORTON_BITS = 30
GRID_RESOLUTION = 1024  # cells per axis, 2**10

# Bit-spreading masks: insert two zero bits between each of 10 input bits.
_M0 = np.uint32(0x030000FF)
_M1 = np.uint32(0x0300F00F)
_M2 = np.uint32(0x030C30C3)
_M3 = np.uint32(0x09249249)


@dataclass(frozen=True)
class MortonKey:
    """A 30-bit spatial sort key plus the original object ordinal."""

    code: int
    index: int

    def __post_init__(self):
        if not 0 <= self.code < (1 << MORTON_BITS):
            raise ValueError(f"code must be a {MORTON_BITS}-bit unsigned value, got {self.code}")
        if self.index < 0:
            raise ValueError(f"index must be non-negative, got {self.index}")


def _spread_bits(v: np.ndarray) -> np.ndarray:
    # v: uint32 values < 1024; bit i moves to bit 3i
    v = (v | (v << 16)) & _M0
    v = (v | (v << 8)) & _M1
    v = (v | (v << 4)) & _M2
    v = (v | (v << 2)) & _M3
    return v


def expand_bits_10(v: int) -> int:
    """Spread a 10-bit value so bit i lands at bit 3i of the result."""
    if not 0 <= v < GRID_RESOLUTION:
        raise ValueError(f"value must be in [0, {GRID_RESOLUTION}), got {v}")
    return int(_spread_bits(np.uint32(v)))


def morton_codes(points: np.ndarray, scene_min, scene_max) -> np.ndarray:
    """Vectorized 30-bit codes for an (n, 3) array of points.

    Points are normalized by the scene box, clamped into [0, 1] per axis
    (axes with zero extent normalize to 0), quantized to the 1024-cell grid
    with the top cell closed, and bit-interleaved. Normalization runs in
    double precision so scene extents near the float32 range don't overflow.
    """
    pts = np.asarray(points, dtype=np.float64)
    smin = np.asarray(scene_min, dtype=np.float64).reshape(3)
    smax = np.asarray(scene_max, dtype=np.float64).reshape(3)
    extent = smax - smin
    t = np.zeros_like(pts)
    np.divide(pts - smin, extent, out=t, where=extent > 0)
    np.clip(t, 0.0, 1.0, out=t)
    grid = np.minimum(
        (t * float(GRID_RESOLUTION)).astype(np.uint32),
        np.uint32(GRID_RESOLUTION - 1),
    )
    return (
        (_spread_bits(grid[:, 0]) << np.uint32(2))
        | (_spread_bits(grid[:, 1]) << np.uint32(1))
        | _spread_bits(grid[:, 2])
    )


def morton_code(c: Point, scene: Box) -> int:
    """30-bit code of a single point; out-of-scene points are clamped."""
    pts = np.array([[c.x, c.y, c.z]], dtype=np.float32)
    smin = np.array([scene.min.x, scene.min.y, scene.min.z], dtype=np.float32)
    smax = np.array([scene.max.x, scene.max.y, scene.max.z], dtype=np.float32)
    return int(morton_codes(pts, smin, smax)[0])


def sort_by_key(keys: Sequence[MortonKey] | tuple) -> np.ndarray:
    """Permutation ordering keys lexicographically by (code, index).

    Accepts a sequence of :class:`MortonKey` or a ``(codes, indices)`` pair of
    arrays. Indices must be unique, which makes the order strict and the
    permutation deterministic; applying it yields non-decreasing codes.
    """
    if isinstance(keys, tuple) and len(keys) == 2:
        codes = np.asarray(keys[0], dtype=np.uint32)
        indices = np.asarray(keys[1], dtype=np.int64)
    else:
        codes = np.array([k.code for k in keys], dtype=np.uint32)
        indices = np.array([k.index for k in keys], dtype=np.int64)
    if codes.shape[0] == 0:
        raise ValueError("empty key sequence")
    if np.unique(indices).shape[0] != indices.shape[0]:
        raise ValueError("key indices must be unique")
    return np.lexsort((indices, codes))

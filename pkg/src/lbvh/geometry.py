"""Scalar 3-D primitives: points, axis-aligned boxes, distances, reductions.

Coordinates are single precision at array boundaries; the scalar types here
validate finiteness and ordering so the rest of the library can assume
well-formed values. Distance comparisons throughout the library use squared
values; square roots are taken only where true distances are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "Point",
    "Box",
    "expand",
    "centroid",
    "distance_sq",
    "scene_bounds",
]


@dataclass(frozen=True)
class Point:
    """A finite 3-D point. NaN/Inf coordinates are rejected at construction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(
                f"point coordinates must be finite, got ({self.x}, {self.y}, {self.z})"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float32)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box stored as two opposite corner points.

    Degenerate boxes are allowed: a point is a box with ``min == max``, and
    lower-dimensional objects may have zero extent on some axes.
    """

    min: Point
    max: Point

    def __post_init__(self):
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise ValueError("box min corner must not exceed max corner on any axis")

    @classmethod
    def from_point(cls, p: Point) -> "Box":
        return cls(p, p)

    @classmethod
    def from_arrays(cls, mn, mx) -> "Box":
        return cls(Point(float(mn[0]), float(mn[1]), float(mn[2])),
                   Point(float(mx[0]), float(mx[1]), float(mx[2])))

    def contains_point(self, p: Point) -> bool:
        """Inclusive containment test; boundary points count as inside."""
        return (self.min.x <= p.x <= self.max.x
                and self.min.y <= p.y <= self.max.y
                and self.min.z <= p.z <= self.max.z)

    def contains(self, other: "Box") -> bool:
        """Componentwise inclusive containment of another box."""
        return (self.min.x <= other.min.x and other.max.x <= self.max.x
                and self.min.y <= other.min.y and other.max.y <= self.max.y
                and self.min.z <= other.min.z and other.max.z <= self.max.z)

    def extent(self) -> tuple[float, float, float]:
        return (self.max.x - self.min.x, self.max.y - self.min.y, self.max.z - self.min.z)


def expand(accumulator: Box, other: Box) -> Box:
    """Smallest box containing both operands (componentwise min/max).

    Exact in floating point, hence associative and commutative; safe to use
    as a parallel reduction operator.
    """
    return Box(
        Point(min(accumulator.min.x, other.min.x),
              min(accumulator.min.y, other.min.y),
              min(accumulator.min.z, other.min.z)),
        Point(max(accumulator.max.x, other.max.x),
              max(accumulator.max.y, other.max.y),
              max(accumulator.max.z, other.max.z)),
    )


def centroid(b: Box) -> Point:
    """Midpoint of a box, per axis."""
    return Point((b.min.x + b.max.x) * 0.5,
                 (b.min.y + b.max.y) * 0.5,
                 (b.min.z + b.max.z) * 0.5)


def distance_sq(p: Point, b: Box) -> float:
    """Squared Euclidean distance from a point to the nearest point of a box.

    Zero exactly when the point is inside or on the boundary; otherwise the
    sum over axes of the squared clamp gap.
    """
    d = 0.0
    for v, lo, hi in ((p.x, b.min.x, b.max.x),
                      (p.y, b.min.y, b.max.y),
                      (p.z, b.min.z, b.max.z)):
        if v < lo:
            d += (lo - v) * (lo - v)
        elif v > hi:
            d += (v - hi) * (v - hi)
    return d


def scene_bounds(boxes: Iterable[Box]) -> Box:
    """Fold of :func:`expand` over a non-empty sequence of boxes.

    The result is independent of association and iteration order because
    min/max reductions are exact.
    """
    it = iter(boxes)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("empty scene") from None
    for b in it:
        acc = expand(acc, b)
    return acc

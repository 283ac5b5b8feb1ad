"""Input validation helpers for array-based API boundaries.

All helpers return single-precision, C-contiguous arrays and reject NaN/Inf
up front so the compiled kernels never see malformed data.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import Box, Point

__all__ = ["check_points", "check_boxes", "check_radii", "check_neighbor_counts"]


def _as_float32(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.isfinite(out).all():
        raise ValueError(f"{name} must contain only finite values")
    return out


def check_points(X, name: str = "X") -> np.ndarray:
    """Coerce to an (n, 3) float32 array of finite points.

    Accepts an array-like of shape (n, 3), a single-point shape (3,), or a
    sequence of :class:`~lbvh.geometry.Point`.
    """
    if isinstance(X, Point):
        X = [X]
    if isinstance(X, Sequence) and len(X) > 0 and isinstance(X[0], Point):
        X = np.array([[p.x, p.y, p.z] for p in X], dtype=np.float32)
    arr = np.asarray(X, dtype=np.float32)
    if arr.ndim == 1 and arr.shape[0] == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {arr.shape}")
    return _as_float32(arr, name)


def check_boxes(X, name: str = "X"):
    """Coerce boxes to a pair of (n, 3) float32 arrays ``(mins, maxs)``.

    Accepted forms:

    - ``(n, 3)`` array of points (degenerate boxes, ``min == max``)
    - ``(n, 6)`` array of ``[min_x, min_y, min_z, max_x, max_y, max_z]`` rows
    - tuple ``(mins, maxs)`` of two (n, 3) arrays
    - sequence of :class:`~lbvh.geometry.Box` or :class:`~lbvh.geometry.Point`
    """
    if isinstance(X, tuple) and len(X) == 2 and not isinstance(X[0], (int, float)):
        mins = check_points(X[0], f"{name}.mins")
        maxs = check_points(X[1], f"{name}.maxs")
        if mins.shape != maxs.shape:
            raise ValueError(f"{name} min/max arrays must have the same shape")
    elif isinstance(X, np.ndarray):
        arr = _as_float32(X, name)
        if arr.ndim != 2 or arr.shape[1] not in (3, 6):
            raise ValueError(f"{name} must have shape (n, 3) or (n, 6), got {arr.shape}")
        if arr.shape[1] == 3:
            mins = arr
            maxs = arr.copy()
        else:
            mins = np.ascontiguousarray(arr[:, :3])
            maxs = np.ascontiguousarray(arr[:, 3:])
    elif isinstance(X, Sequence) and len(X) > 0 and isinstance(X[0], Box):
        mins = np.array([[b.min.x, b.min.y, b.min.z] for b in X], dtype=np.float32)
        maxs = np.array([[b.max.x, b.max.y, b.max.z] for b in X], dtype=np.float32)
    elif isinstance(X, Sequence) and len(X) > 0 and isinstance(X[0], Point):
        mins = check_points(X, name)
        maxs = mins.copy()
    else:
        return check_boxes(np.asarray(X, dtype=np.float32), name)
    if (mins > maxs).any():
        raise ValueError(f"{name} contains boxes with min corner above max corner")
    return mins, maxs


def check_radii(radius, n_queries: int, name: str = "radius") -> np.ndarray:
    """Broadcast a scalar or per-query radius to an (n,) float32 array, >= 0."""
    arr = np.asarray(radius, dtype=np.float32)
    if arr.ndim == 0:
        arr = np.full(n_queries, arr, dtype=np.float32)
    if arr.shape != (n_queries,):
        raise ValueError(f"{name} must be a scalar or shape ({n_queries},), got {arr.shape}")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise ValueError(f"{name} must be finite and non-negative")
    return np.ascontiguousarray(arr)


def check_neighbor_counts(k, n_queries: int, name: str = "k") -> np.ndarray:
    """Broadcast a scalar or per-query neighbor count to an (n,) int64 array, >= 1."""
    arr = np.asarray(k, dtype=np.int64)
    if arr.ndim == 0:
        arr = np.full(n_queries, arr, dtype=np.int64)
    if arr.shape != (n_queries,):
        raise ValueError(f"{name} must be a scalar or shape ({n_queries},), got {arr.shape}")
    if (arr < 1).any():
        raise ValueError(f"{name} must be >= 1")
    return np.ascontiguousarray(arr)

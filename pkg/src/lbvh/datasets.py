"""Deterministic synthetic point clouds and cloud file I/O.

Four cloud families over the domain [-a, a]^3 with a = p^(1/3), so filled
variants keep a constant density of 1/8 points per unit volume regardless of
p: points drawn uniformly inside a cube or ball (filled), or placed on the
cube faces / projected onto the sphere (hollow).

Randomness comes from numpy's PCG64 bit generator seeded per cloud, so a
(spec, seed) pair fully determines the cloud on any platform. Draw order is
fixed: each generator pulls batches of a deterministic size.

File formats: binary "PCL3" (magic ``PCL3``, little-endian uint32 count,
then count x 3 float32), or CSV with one ``x,y,z`` line per point and '.'
as the decimal separator. The extension ``.csv`` selects CSV; anything else
is binary.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CloudSpec",
    "gen_filled_cube",
    "gen_hollow_cube",
    "gen_filled_sphere",
    "gen_hollow_sphere",
    "generate",
    "default_radius",
    "half_extent",
    "save_cloud",
    "load_cloud",
    "PCL3_MAGIC",
]

PCL3_MAGIC = b"PCL3"

SHAPES = ("cube", "sphere")
VARIANTS = ("filled", "hollow")

# face order for the hollow cube: -x, +x, -y, +y, -z, +z
_FACE_AXIS = (0, 0, 1, 1, 2, 2)
_FACE_SIGN = (-1.0, 1.0, -1.0, 1.0, -1.0, 1.0)

_MIN_NORM = 1e-6  # resample threshold for near-zero hollow-sphere draws


@dataclass(frozen=True)
class CloudSpec:
    """Descriptor of a synthetic cloud: shape, variant, point count, seed."""

    shape: str
    variant: str
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")

    @classmethod
    def parse(cls, text: str, count: int, seed: int = 0) -> "CloudSpec":
        """Parse a ``shape:variant`` string such as ``cube:filled``."""
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"expected 'shape:variant', got {text!r}")
        return cls(parts[0], parts[1], count, seed)


def half_extent(p: int) -> float:
    """Domain half-width a = p^(1/3)."""
    return p ** (1.0 / 3.0)


def default_radius(k: int) -> float:
    """Radius giving k expected neighbors in a filled cube.

    Filled-cube density is p / (2a)^3 = 1/8 per unit volume for any p, so
    (4/3) pi r^3 / 8 = k solves to r = (6 k / pi)^(1/3).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return (6.0 * k / math.pi) ** (1.0 / 3.0)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_filled_cube(p: int, seed: int = 0) -> np.ndarray:
    """p points uniform in [-a, a]^3."""
    a = half_extent(p)
    pts = _rng(seed).uniform(-a, a, size=(p, 3)).astype(np.float32)
    a32 = np.float32(a)
    return np.clip(pts, -a32, a32)


def gen_hollow_cube(p: int, seed: int = 0) -> np.ndarray:
    """p points on the cube faces, point i on face i mod 6, uniform in-face."""
    a = half_extent(p)
    uv = _rng(seed).uniform(-a, a, size=(p, 2))
    a32 = np.float32(a)
    pts = np.empty((p, 3), dtype=np.float32)
    faces = np.arange(p) % 6
    for face in range(6):
        rows = faces == face
        axis = _FACE_AXIS[face]
        others = [d for d in range(3) if d != axis]
        pts[rows, axis] = np.float32(_FACE_SIGN[face]) * a32
        pts[rows, others[0]] = uv[rows, 0].astype(np.float32)
        pts[rows, others[1]] = uv[rows, 1].astype(np.float32)
    return np.clip(pts, -a32, a32)


def gen_filled_sphere(p: int, seed: int = 0) -> np.ndarray:
    """p points uniform in the ball of radius a, by rejection from the cube."""
    a = half_extent(p)
    rng = _rng(seed)
    kept: list[np.ndarray] = []
    have = 0
    while have < p:
        # ~pi/6 of cube draws land inside the ball; oversample accordingly
        want = p - have
        batch = rng.uniform(-a, a, size=(2 * want + 16, 3))
        inside = batch[np.einsum("ij,ij->i", batch, batch) <= a * a][:want]
        kept.append(inside)
        have += inside.shape[0]
    return np.vstack(kept).astype(np.float32)


def gen_hollow_sphere(p: int, seed: int = 0) -> np.ndarray:
    """p points projected from the unit cube onto the sphere of radius a.

    Deliberately non-uniform (denser toward the projected cube corners); the
    rare near-zero draw is resampled rather than divided through.
    """
    a = half_extent(p)
    rng = _rng(seed)
    u = rng.uniform(-1.0, 1.0, size=(p, 3))
    norms = np.linalg.norm(u, axis=1)
    while (bad := norms < _MIN_NORM).any():
        u[bad] = rng.uniform(-1.0, 1.0, size=(int(bad.sum()), 3))
        norms = np.linalg.norm(u, axis=1)
    return (a * u / norms[:, None]).astype(np.float32)


_GENERATORS = {
    ("cube", "filled"): gen_filled_cube,
    ("cube", "hollow"): gen_hollow_cube,
    ("sphere", "filled"): gen_filled_sphere,
    ("sphere", "hollow"): gen_hollow_sphere,
}


def generate(spec: CloudSpec) -> np.ndarray:
    """Generate the (count, 3) float32 cloud a spec describes."""
    return _GENERATORS[(spec.shape, spec.variant)](spec.count, spec.seed)


# ---------------------------------------------------------------------------
# Cloud files
# ---------------------------------------------------------------------------


def save_cloud(path, points: np.ndarray) -> None:
    """Write a cloud; ``.csv`` extension selects text, otherwise PCL3 binary."""
    pts = np.ascontiguousarray(points, dtype=np.float32)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
    path = str(path)
    if path.lower().endswith(".csv"):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            for x, y, z in pts:
                # repr of the exact float64 value round-trips the float32
                fh.write(f"{float(x)!r},{float(y)!r},{float(z)!r}\n")
    else:
        with open(path, "wb") as fh:
            fh.write(PCL3_MAGIC)
            fh.write(struct.pack("<I", pts.shape[0]))
            fh.write(pts.astype("<f4").tobytes())


def load_cloud(path) -> np.ndarray:
    """Read a cloud written by :func:`save_cloud` (format sniffed by magic)."""
    path = str(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == PCL3_MAGIC:
            (count,) = struct.unpack("<I", fh.read(4))
            raw = fh.read(count * 12)
            if len(raw) != count * 12:
                raise ValueError(f"truncated cloud file: {path}")
            return np.frombuffer(raw, dtype="<f4").reshape(count, 3).astype(np.float32)
        text = (head + fh.read()).decode("ascii")
    return np.loadtxt(io.StringIO(text), delimiter=",", dtype=np.float32, ndmin=2)

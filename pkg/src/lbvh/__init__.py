"""Linear BVH spatial search: parallel construction, batched radius and
k-nearest queries over 3-D axis-aligned boxes, plus a benchmark harness."""

from .datasets import CloudSpec, default_radius, generate, load_cloud, save_cloud
from .estimator import BvhNeighbors
from .geometry import Box, Point, centroid, distance_sq, expand, scene_bounds
from .morton import MortonKey, expand_bits_10, morton_code, morton_codes, sort_by_key
from .oracle import brute_knn, brute_radius
from .traversal import (
    KnnQuery,
    ResultSet,
    SpatialQuery,
    query_knn,
    query_sort_order,
    query_spatial_1p,
    query_spatial_2p,
    traverse_knn_one,
    traverse_spatial_one,
)
from .tree import Bvh, build, common_prefix, find_split, generate_topology, node_range

__version__ = "0.1.0"

__all__ = [
    "Point", "Box", "expand", "centroid", "distance_sq", "scene_bounds",
    "MortonKey", "expand_bits_10", "morton_code", "morton_codes", "sort_by_key",
    "Bvh", "build", "common_prefix", "find_split", "node_range", "generate_topology",
    "SpatialQuery", "KnnQuery", "ResultSet",
    "query_spatial_2p", "query_spatial_1p", "query_knn", "query_sort_order",
    "traverse_spatial_one", "traverse_knn_one",
    "brute_radius", "brute_knn",
    "BvhNeighbors",
    "CloudSpec", "generate", "default_radius", "save_cloud", "load_cloud",
    "__version__",
]

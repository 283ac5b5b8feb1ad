import numpy as np
import pytest

from lbvh.geometry import Point
from lbvh.oracle import brute_knn, brute_radius
from lbvh.traversal import KnnQuery, SpatialQuery


def test_radius_basic():
    pts = np.float32([[0, 0, 0], [3, 0, 0]])
    got = brute_radius(pts, SpatialQuery(Point(0, 0, 0), 1.0))
    assert got.tolist() == [0]


def test_radius_covers_everything_when_large():
    pts = np.float32([[0, 0, 0], [3, 0, 0], [-2, 5, 1]])
    got = brute_radius(pts, SpatialQuery(Point(0, 0, 0), 100.0))
    assert got.tolist() == [0, 1, 2]


def test_radius_zero_at_duplicated_point_returns_all_duplicates():
    pts = np.float32([[1, 1, 1], [2, 2, 2], [1, 1, 1]])
    got = brute_radius(pts, SpatialQuery(Point(1, 1, 1), 0.0))
    assert got.tolist() == [0, 2]


def test_knn_full_list_when_k_equals_n():
    pts = np.float32([[0, 0, 0], [2, 0, 0], [1, 0, 0]])
    idx, dist = brute_knn(pts, KnnQuery(Point(0, 0, 0), 3))
    assert idx.tolist() == [0, 2, 1]
    assert dist == pytest.approx([0.0, 1.0, 2.0])


def test_knn_self_query():
    pts = np.float32([[5, 5, 5], [6, 6, 6]])
    idx, dist = brute_knn(pts, KnnQuery(Point(6, 6, 6), 1))
    assert idx.tolist() == [1]
    assert dist[0] == 0.0


def test_knn_collinear_hand_check():
    # points at x = 0, 1, 2, 3; query at 1.4: nearest are 1 (0.4), 2 (0.6), 0 (1.4)
    pts = np.float32([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]])
    idx, dist = brute_knn(pts, KnnQuery(Point(1.4, 0, 0), 3))
    assert idx.tolist() == [1, 2, 0]
    assert dist == pytest.approx([0.4, 0.6, 1.4], rel=1e-6)


def test_knn_tie_breaks_by_ordinal():
    pts = np.float32([[1, 0, 0], [-1, 0, 0], [0, 1, 0]])
    idx, _ = brute_knn(pts, KnnQuery(Point(0, 0, 0), 2))
    assert idx.tolist() == [0, 1]

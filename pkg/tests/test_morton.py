import numpy as np
import pytest
from hypothesis import given, strategies as st

from lbvh.geometry import Box, Point
from lbvh.morton import (
    MORTON_BITS,
    MortonKey,
    expand_bits_10,
    morton_code,
    morton_codes,
    sort_by_key,
)

UNIT = Box(Point(0, 0, 0), Point(1, 1, 1))


def deinterleave(code):
    """Recover the (x, y, z) grid cell from a 30-bit code."""
    out = [0, 0, 0]
    for bit in range(10):
        out[0] |= ((code >> (3 * bit + 2)) & 1) << bit
        out[1] |= ((code >> (3 * bit + 1)) & 1) << bit
        out[2] |= ((code >> (3 * bit + 0)) & 1) << bit
    return tuple(out)


class TestExpandBits:
    def test_zero(self):
        assert expand_bits_10(0) == 0

    def test_two_low_bits(self):
        # bits 0 and 1 land at positions 0 and 3
        assert expand_bits_10(0b11) == 0b1001

    def test_bits_zero_and_two(self):
        # bits land at positions 0 and 6
        assert expand_bits_10(0b101) == 0b1000001

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            expand_bits_10(1024)

    @given(st.integers(min_value=0, max_value=1023))
    def test_every_bit_lands_at_triple_position(self, v):
        spread = expand_bits_10(v)
        assert spread < (1 << MORTON_BITS)
        for bit in range(10):
            assert (spread >> (3 * bit)) & 1 == (v >> bit) & 1
        # no other bits set
        mask = sum(1 << (3 * b) for b in range(10))
        assert spread & ~mask == 0


class TestMortonCode:
    def test_scene_min_is_zero(self):
        assert morton_code(Point(0, 0, 0), UNIT) == 0

    def test_scene_max_is_full_code(self):
        assert morton_code(Point(1, 1, 1), UNIT) == (1 << MORTON_BITS) - 1

    def test_single_x_cell(self):
        # 1.5 cells along x -> grid (1, 0, 0) -> x bit at position 2
        assert morton_code(Point(1.5 / 1024, 0, 0), UNIT) == 4

    def test_out_of_scene_points_clamp(self):
        assert morton_code(Point(-5, -5, -5), UNIT) == 0
        assert morton_code(Point(7, 7, 7), UNIT) == (1 << MORTON_BITS) - 1

    def test_degenerate_axis_maps_to_zero(self):
        flat = Box(Point(0, 0, 0), Point(1, 0, 1))  # zero y extent
        code = morton_code(Point(0, 0, 0), flat)
        assert deinterleave(code)[1] == 0

    def test_same_cell_same_code(self):
        a = morton_code(Point(0.50001, 0.50001, 0.50001), UNIT)
        b = morton_code(Point(0.50050, 0.50050, 0.50050), UNIT)
        assert a == b  # both inside cell 512 on every axis

    @given(st.integers(0, 1023), st.integers(0, 1023), st.integers(0, 1023))
    def test_roundtrip_over_grid_cells(self, gx, gy, gz):
        code = (expand_bits_10(gx) << 2) | (expand_bits_10(gy) << 1) | expand_bits_10(gz)
        assert deinterleave(code) == (gx, gy, gz)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone_along_x(self, lo, hi):
        lo, hi = min(lo, hi), max(lo, hi)
        ca = morton_code(Point(lo, 0.5, 0.5), UNIT)
        cb = morton_code(Point(hi, 0.5, 0.5), UNIT)
        assert deinterleave(ca)[0] <= deinterleave(cb)[0]

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-1, 2, size=(64, 3)).astype(np.float32)
        smin = np.zeros(3, dtype=np.float32)
        smax = np.ones(3, dtype=np.float32)
        batch = morton_codes(pts, smin, smax)
        for row, code in zip(pts, batch):
            assert morton_code(Point(*map(float, row)), UNIT) == int(code)


class TestSortByKey:
    def test_hand_sorted_with_tie_break(self):
        keys = [MortonKey(5, 0), MortonKey(3, 1), MortonKey(3, 2), MortonKey(1, 3)]
        assert sort_by_key(keys).tolist() == [3, 1, 2, 0]

    def test_already_sorted_is_identity(self):
        keys = [MortonKey(c, i) for i, c in enumerate([1, 2, 7, 9])]
        assert sort_by_key(keys).tolist() == [0, 1, 2, 3]

    def test_all_equal_codes_is_identity(self):
        keys = [MortonKey(42, i) for i in range(5)]
        assert sort_by_key(keys).tolist() == [0, 1, 2, 3, 4]

    def test_rejects_duplicate_indices(self):
        with pytest.raises(ValueError, match="unique"):
            sort_by_key([MortonKey(1, 0), MortonKey(2, 0)])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sort_by_key([])

    def test_array_form(self):
        perm = sort_by_key((np.array([9, 1, 5]), np.array([0, 1, 2])))
        assert perm.tolist() == [1, 2, 0]

    @given(st.lists(st.integers(0, (1 << MORTON_BITS) - 1), min_size=1, max_size=40))
    def test_strict_total_order(self, codes):
        keys = [MortonKey(c, i) for i, c in enumerate(codes)]
        perm = sort_by_key(keys)
        ordered = [(keys[p].code, keys[p].index) for p in perm]
        assert all(a < b for a, b in zip(ordered, ordered[1:]))


class TestMortonKey:
    def test_rejects_code_overflow(self):
        with pytest.raises(ValueError):
            MortonKey(1 << MORTON_BITS, 0)

    def test_rejects_negative_index(self):
        with pytest.raises(ValueError):
            MortonKey(0, -1)

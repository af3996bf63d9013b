"""Box geometry: IoU values, invariances, and BBox transforms."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nmsap.geometry import BBox, area, boxes_to_array, iou, iou_matrix

coords = st.floats(min_value=-500.0, max_value=500.0, allow_nan=False)
extents = st.floats(min_value=0.0, max_value=300.0, allow_nan=False)


@st.composite
def boxes(draw):
    x, y = draw(coords), draw(coords)
    return BBox(x, y, x + draw(extents), y + draw(extents))


class TestKnownValues:
    def test_identical_boxes(self):
        b = BBox(0, 0, 10, 10)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)) == 0.0

    def test_touching_edges(self):
        assert iou(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) == 0.0

    def test_half_width_overlap(self):
        assert iou(BBox(0, 0, 2, 1), BBox(1, 0, 3, 1)) == pytest.approx(1 / 3)

    def test_quarter_corner_overlap(self):
        # inter 25, union 175
        assert iou(BBox(0, 0, 10, 10), BBox(5, 5, 15, 15)) == pytest.approx(1 / 7)

    def test_contained_box(self):
        assert iou(BBox(0, 0, 10, 10), BBox(2, 2, 7, 7)) == 0.25

    def test_exact_half(self):
        # inter 50, union 100: the strict-inequality cases downstream
        # rely on this value being produced without rounding error.
        assert iou(BBox(0, 0, 10, 10), BBox(0, 0, 5, 10)) == 0.5

    def test_degenerate_zero_width(self):
        line = BBox(5, 0, 5, 10)
        assert iou(line, line) == 0.0
        assert iou(line, BBox(0, 0, 10, 10)) == 0.0

    def test_area_function(self):
        assert area(BBox(0, 0, 4, 5)) == 20.0
        assert area(BBox(3, 3, 3, 9)) == 0.0


class TestBBox:
    def test_xywh_round_trip(self):
        b = BBox.from_xywh(50, 50, 100, 80)
        assert b == BBox(50, 50, 150, 130)
        assert b.to_xywh() == (50, 50, 100, 80)

    def test_canonical_swaps_reversed_corners(self):
        assert BBox(10, 20, 3, 5).canonical() == BBox(3, 5, 10, 20)
        assert BBox(1, 2, 3, 4).canonical() == BBox(1, 2, 3, 4)

    def test_dimensions(self):
        b = BBox(1, 2, 4, 8)
        assert (b.width, b.height, b.area) == (3, 6, 18)

    def test_translate_and_scale(self):
        b = BBox(1, 1, 3, 5)
        assert b.translate(2, -1) == BBox(3, 0, 5, 4)
        assert b.scale(2) == BBox(2, 2, 6, 10)

    def test_as_tuple(self):
        assert BBox(1, 2, 3, 4).as_tuple() == (1, 2, 3, 4)

    def test_frozen(self):
        with pytest.raises(dataclasses.FrozenInstanceError):
            BBox(0, 0, 1, 1).x_min = 5


class TestProperties:
    @given(boxes(), boxes())
    def test_symmetry_bitwise(self, a, b):
        assert iou(a, b) == iou(b, a)

    @given(boxes(), boxes())
    def test_range(self, a, b):
        assert 0.0 <= iou(a, b) <= 1.0

    @given(boxes())
    def test_self_iou(self, a):
        assert iou(a, a) == (1.0 if a.area > 0 else 0.0)

    @given(boxes(), boxes(), st.integers(min_value=-3, max_value=3))
    def test_power_of_two_scale_bitwise(self, a, b, k):
        f = 2.0**k
        assert iou(a.scale(f), b.scale(f)) == iou(a, b)

    @given(
        st.integers(-100, 100), st.integers(-100, 100),
        st.integers(0, 50), st.integers(0, 50),
        st.integers(-100, 100), st.integers(-100, 100),
        st.integers(0, 50), st.integers(0, 50),
        st.integers(-200, 200), st.integers(-200, 200),
    )
    def test_integer_translation_exact(self, ax, ay, aw, ah, bx, by, bw, bh, dx, dy):
        a = BBox(ax, ay, ax + aw, ay + ah)
        b = BBox(bx, by, bx + bw, by + bh)
        assert iou(a.translate(dx, dy), b.translate(dx, dy)) == iou(a, b)

    @given(boxes(), boxes())
    def test_scalar_matches_matrix_bitwise(self, a, b):
        mat = iou_matrix(boxes_to_array([a]), boxes_to_array([b]))
        assert mat[0, 0] == iou(a, b)


class TestIouMatrix:
    def test_shape_and_entries(self):
        a = [BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)]
        b = [BBox(0, 0, 5, 10), BBox(20, 20, 30, 30), BBox(100, 100, 110, 110)]
        mat = iou_matrix(boxes_to_array(a), boxes_to_array(b))
        assert mat.shape == (2, 3)
        expected = np.array([[iou(x, y) for y in b] for x in a])
        assert np.array_equal(mat, expected)

    def test_empty_inputs(self):
        empty = np.zeros((0, 4))
        one = boxes_to_array([BBox(0, 0, 1, 1)])
        assert iou_matrix(empty, one).shape == (0, 1)
        assert iou_matrix(one, empty).shape == (1, 0)

    def test_boxes_to_array_dtype(self):
        arr = boxes_to_array([BBox(1, 2, 3, 4)])
        assert arr.dtype == np.float64
        assert arr.tolist() == [[1.0, 2.0, 3.0, 4.0]]

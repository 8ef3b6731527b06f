from __future__ import annotations

import math

import numpy as np
import pytest

from ddf.errors import MalformedPolygon
from ddf.geometry import (
    RectilinearPolygon,
    rect_difference,
    rect_intersection,
    rect_union,
    set_area,
    set_contains,
)


def rect(x0, y0, x1, y1):
    return RectilinearPolygon.from_rect(x0, y0, x1, y1)


class TestConstruction:
    def test_canonical_orientation(self):
        cw = RectilinearPolygon(((0, 0), (0, 1), (1, 1), (1, 0)))
        assert cw.area() == 1.0
        assert cw.outer[0] == (0.0, 0.0)

    def test_collinear_vertices_merged(self):
        p = RectilinearPolygon(((0, 0), (0.5, 0), (1, 0), (1, 1), (0, 1)))
        assert len(p.outer) == 4

    def test_rejects_diagonal_edge(self):
        with pytest.raises(MalformedPolygon):
            RectilinearPolygon(((0, 0), (1, 1), (0, 1)))

    def test_rejects_zero_area(self):
        with pytest.raises(MalformedPolygon):
            RectilinearPolygon(((0, 0), (1, 0), (1, 0), (0, 0)))

    def test_rejects_self_intersection(self):
        with pytest.raises(MalformedPolygon):
            RectilinearPolygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, -1), (0.5, -1), (0.5, 1), (0, 1)))

    def test_rejects_hole_outside(self):
        with pytest.raises(MalformedPolygon):
            RectilinearPolygon(
                ((0, 0), (1, 0), (1, 1), (0, 1)),
                (((2, 2), (3, 2), (3, 3), (2, 3)),),
            )


class TestBooleanExamples:
    def test_union_identity(self):
        a = (rect(0, 0, 1, 1),)
        assert rect_union(a, ()) == a

    def test_difference_annihilation(self):
        a = (rect(0, 0, 1, 1),)
        assert rect_difference(a, a) == ()

    def test_union_overlapping_squares(self):
        # inclusion-exclusion: 1 + 1 - 0.5 = 1.5
        a = (rect(0, 0, 1, 1),)
        b = (rect(0.5, 0, 1.5, 1),)
        assert set_area(rect_union(a, b)) == pytest.approx(1.5, abs=1e-12)
        inter = rect_intersection(a, b)
        assert set_area(a) + set_area(b) - set_area(inter) == pytest.approx(1.5, abs=1e-12)

    def test_difference_nested_square(self):
        result = rect_difference((rect(0, 0, 10, 10),), (rect(3, 3, 7, 7),))
        assert len(result) == 1
        assert len(result[0].holes) == 1
        assert set_area(result) == pytest.approx(84.0, abs=1e-12)

    def test_difference_is_canonical(self):
        # carving a corner gives an L: vertices merged, start at lex-min
        result = rect_difference((rect(0, 0, 2, 2),), (rect(1, 1, 3, 3),))
        assert len(result) == 1
        assert result[0].outer == ((0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0))

    def test_touching_lobes_stay_separate(self):
        result = rect_union((rect(0, 0, 1, 1),), (rect(1, 1, 2, 2),))
        assert len(result) == 2
        assert set_area(result) == pytest.approx(2.0)

    def test_hole_pinched_to_boundary(self):
        g = rect_difference((rect(0, 0, 3, 3),), (rect(1, 1, 2, 2),))
        g = rect_difference(g, (rect(2, 2, 3, 3),))
        assert set_area(g) == pytest.approx(7.0)
        for region in g:
            seen = set(region.outer)
            assert len(seen) == len(region.outer)


def random_rect_set(rng: np.random.Generator, max_rects: int = 4) -> tuple:
    out = ()
    for _ in range(rng.integers(1, max_rects + 1)):
        x0, y0 = rng.integers(0, 8, size=2) * 0.5
        w, h = (rng.integers(1, 8, size=2)) * 0.5
        out = rect_union(out, (rect(x0, y0, x0 + w, y0 + h),))
    return out


class TestBooleanProperties:
    """Randomized algebra checks over rectangle unions."""

    def test_union_commutes_and_contains(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            a = random_rect_set(rng)
            b = random_rect_set(rng)
            u1 = rect_union(a, b)
            u2 = rect_union(b, a)
            assert u1 == u2
            assert set_area(u1) >= max(set_area(a), set_area(b)) - 1e-12

    def test_difference_subset_of_minuend(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            a = random_rect_set(rng)
            b = random_rect_set(rng)
            d = rect_difference(a, b)
            # (a - b) outside a must be empty
            assert set_area(rect_difference(d, a)) <= 1e-12

    def test_union_then_remove_b_lands_in_a(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            a = random_rect_set(rng)
            b = random_rect_set(rng)
            lhs = rect_difference(rect_union(a, b), b)
            assert set_area(rect_difference(lhs, a)) <= 1e-9

    def test_inclusion_exclusion(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            a = random_rect_set(rng)
            b = random_rect_set(rng)
            union = set_area(rect_union(a, b))
            inter = set_area(rect_intersection(a, b))
            assert union + inter == pytest.approx(set_area(a) + set_area(b), abs=1e-9)

    def test_membership_agrees_with_area_classification(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = random_rect_set(rng)
            b = random_rect_set(rng)
            u = rect_union(a, b)
            pts = rng.uniform(-0.5, 4.5, size=(64, 2))
            for x, y in pts:
                expected = set_contains(a, x, y) or set_contains(b, x, y)
                assert set_contains(u, x, y) == expected

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from ddf.errors import EmptyProfile, ParseError, ValidationError
from ddf.floorplan import (
    DEFAULT_EXTERIOR_THICKNESS,
    FloorPlan,
    WallKind,
    WallSegment,
    WindowSegment,
    boundary_edges,
    compose,
    decompose,
    parse_plan,
    plan_from_profile,
    plan_to_document,
    rasterize,
    svg_to_document,
)
from ddf.geometry import RectilinearPolygon, point_on_ring
from ddf.massing import SectionalProfile


def square_plan_doc(window_entries=None) -> dict:
    corners = [(0, 0), (10, 0), (10, 10), (0, 10)]
    segments = [
        {"start": list(map(float, corners[i])), "end": list(map(float, corners[(i + 1) % 4])), "thickness": 0.3}
        for i in range(4)
    ]
    return {
        "schema_version": "1",
        "units": "m",
        "grid_resolution": 0.5,
        "layers": {"exterior": segments, "interior": [], "windows": window_entries or []},
    }


class TestParse:
    def test_minimal_plan_with_south_window(self):
        doc = square_plan_doc([{"start": [4.0, 0.0], "end": [6.0, 0.0]}])
        plan = parse_plan(doc)
        assert len(plan.windows) == 1
        win = plan.windows[0]
        wall = plan.exterior_walls[win.wall_index]
        assert wall.start == (0.0, 0.0) and wall.end == (10.0, 0.0)  # south edge
        assert win.offset == pytest.approx(4.0)
        assert win.length == pytest.approx(2.0)

    def test_window_one_mm_off_is_snapped(self):
        doc = square_plan_doc([{"start": [4.0, 0.001], "end": [6.0, 0.001]}])
        plan = parse_plan(doc)
        assert len(plan.windows) == 1
        assert plan.windows[0].wall_index == 0

    def test_window_five_cm_off_is_rejected(self):
        doc = square_plan_doc([{"start": [4.0, 0.05], "end": [6.0, 0.05]}])
        with pytest.raises(ValidationError):
            parse_plan(doc)

    def test_open_loop_rejected(self):
        doc = square_plan_doc()
        doc["layers"]["exterior"] = doc["layers"]["exterior"][:3]
        with pytest.raises(ValidationError):
            parse_plan(doc)

    def test_bad_schema_version(self):
        doc = square_plan_doc()
        doc["schema_version"] = "99"
        with pytest.raises(ParseError):
            parse_plan(doc)

    def test_wall_ref_window_form(self):
        doc = square_plan_doc([{"wall_ref": 1, "offset": 2.0, "length": 3.0, "transmittance": 0.5}])
        plan = parse_plan(doc)
        assert plan.windows[0].wall_index == 1
        assert plan.windows[0].transmittance == 0.5

    def test_courtyard_boundary(self):
        doc = square_plan_doc()
        inner = [(3, 3), (7, 3), (7, 7), (3, 7)]
        doc["layers"]["exterior"] += [
            {"start": list(map(float, inner[i])), "end": list(map(float, inner[(i + 1) % 4])), "thickness": 0.3}
            for i in range(4)
        ]
        plan = parse_plan(doc)
        assert len(plan.boundary.holes) == 1
        assert len(plan.exterior_walls) == 8
        assert all(w.kind is WallKind.EXTERIOR for w in plan.exterior_walls)


class TestDecompose:
    @pytest.fixture
    def sample_plans(self):
        plans = []
        doc = square_plan_doc([{"wall_ref": 0, "offset": 1.0, "length": 2.0}])
        doc["layers"]["interior"] = [
            {"start": [2.0, 2.0], "end": [8.0, 2.0], "thickness": 0.2},
            {"start": [5.0, 2.0], "end": [5.0, 8.0], "thickness": 0.2},
            {"start": [2.0, 6.0], "end": [8.0, 6.0], "thickness": 0.2},
        ]
        plans.append(parse_plan(doc))
        profile = SectionalProfile(0.0, (RectilinearPolygon(((0, 0), (6, 0), (6, 4), (3, 4), (3, 8), (0, 8))),))
        plans.append(plan_from_profile(profile))
        return plans

    def test_round_trip_identity(self, sample_plans):
        for plan in sample_plans:
            assert parse_plan(compose(decompose(plan))) == plan

    def test_zero_windows_gives_empty_layer(self, sample_plans):
        parts = decompose(sample_plans[1])
        assert parts["windows"]["layers"]["windows"] == []

    def test_interior_walls_preserved(self, sample_plans):
        parts = decompose(sample_plans[0])
        entries = parts["interior"]["layers"]["interior"]
        assert len(entries) == 3
        assert entries[0]["start"] == [2.0, 2.0]


class TestPlanFromProfile:
    def test_square(self, square_profile):
        plan = plan_from_profile(square_profile)
        assert len(plan.exterior_walls) == 4
        assert plan.windows == ()
        assert plan.boundary.area() == pytest.approx(100.0)

    def test_l_shape_edge_count(self):
        profile = SectionalProfile(
            0.0, (RectilinearPolygon(((0, 0), (6, 0), (6, 4), (3, 4), (3, 8), (0, 8))),)
        )
        plan = plan_from_profile(profile)
        assert len(plan.exterior_walls) == 6

    def test_courtyard_edges_exterior(self):
        region = RectilinearPolygon(
            ((0, 0), (10, 0), (10, 10), (0, 10)),
            (((3, 3), (7, 3), (7, 7), (3, 7)),),
        )
        plan = plan_from_profile(SectionalProfile(0.0, (region,)))
        assert len(plan.exterior_walls) == 8
        # every mask boundary cell must sit against an exterior wall
        grid = rasterize(plan)
        xs, ys = grid.centers()
        mask = grid.mask
        for j in range(grid.height):
            for i in range(grid.width):
                if not mask[j, i]:
                    continue
                neighbors = []
                for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    jj, ii = j + dj, i + di
                    inside = 0 <= jj < grid.height and 0 <= ii < grid.width and mask[jj, ii]
                    neighbors.append(inside)
                if all(neighbors):
                    continue
                dist = min(
                    _point_segment_distance((xs[i], ys[j]), w) for w in plan.exterior_walls
                )
                assert dist < 2 * grid.cell_size

    def test_empty_profile_raises(self):
        with pytest.raises(EmptyProfile):
            plan_from_profile(SectionalProfile(0.0, ()))

    def test_area_preserved(self, square_profile):
        plan = plan_from_profile(square_profile)
        assert plan.boundary.area() == pytest.approx(square_profile.regions[0].area(), abs=1e-9)


def _point_segment_distance(p, wall: WallSegment) -> float:
    ax, ay = wall.start
    bx, by = wall.end
    dx, dy = bx - ax, by - ay
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


class TestRasterize:
    def test_square_grid_counts_match_oracle(self, square_profile):
        plan = plan_from_profile(square_profile)
        grid = rasterize(plan)
        assert (grid.width, grid.height) == (20, 20)
        xs, ys = grid.centers()
        expected = 0
        for j in range(grid.height):
            for i in range(grid.width):
                p = (xs[i], ys[j])
                inside = plan.boundary.contains(*p)
                near_wall = any(
                    _point_segment_distance(p, w) <= w.thickness / 2
                    for w in (*plan.exterior_walls, *plan.interior_walls)
                )
                ok = inside and not near_wall
                expected += ok
                assert bool(grid.mask[j, i]) == ok
        assert grid.masked_count() == expected

    def test_thick_walls_exclude_border_ring(self, square_profile):
        plan = plan_from_profile(square_profile, wall_thickness=0.6)
        grid = rasterize(plan)
        # 0.25 m centers fall within 0.3 m of the boundary: outer ring gone
        assert grid.masked_count() == 18 * 18

    def test_tiny_plan_keeps_one_cell(self):
        profile = SectionalProfile(0.0, (RectilinearPolygon.from_rect(0, 0, 0.3, 0.3),))
        plan = plan_from_profile(profile)
        grid = rasterize(plan)
        assert grid.width >= 1 and grid.height >= 1

    def test_halving_resolution_quadruples_cells(self):
        profile = SectionalProfile(
            0.0, (RectilinearPolygon(((0, 0), (9, 0), (9, 7), (4, 7), (4, 11), (0, 11))),)
        )
        coarse = rasterize(plan_from_profile(profile, grid_resolution=1.0))
        fine = rasterize(plan_from_profile(profile, grid_resolution=0.5))
        ratio = fine.masked_count() / coarse.masked_count()
        assert ratio == pytest.approx(4.0, rel=0.10)

    def test_masked_centers_inside_boundary(self):
        profile = SectionalProfile(
            0.0, (RectilinearPolygon(((0, 0), (8, 0), (8, 5), (5, 5), (5, 9), (0, 9))),)
        )
        plan = plan_from_profile(profile)
        grid = rasterize(plan)
        xs, ys = grid.centers()
        jj, ii = np.nonzero(grid.mask)
        for j, i in zip(jj, ii):
            assert plan.boundary.contains(xs[i], ys[j])


class TestValidation:
    def test_window_past_wall_rejected(self, square_profile):
        plan = plan_from_profile(square_profile)
        with pytest.raises(ValidationError):
            replace(plan, windows=(WindowSegment(0, 9.0, 2.0),))

    def test_interior_wall_outside_rejected(self, square_profile):
        plan = plan_from_profile(square_profile)
        rogue = WallSegment((2.0, 2.0), (15.0, 2.0), 0.2, WallKind.INTERIOR)
        with pytest.raises(ValidationError):
            replace(plan, interior_walls=(rogue,))

    def test_short_window_rejected(self):
        with pytest.raises(ValidationError):
            WindowSegment(0, 0.0, 0.2)

    def test_bad_transmittance_rejected(self):
        with pytest.raises(ValidationError):
            WindowSegment(0, 0.0, 1.0, transmittance=0.0)


class TestSvgImport:
    SVG = """<svg xmlns="http://www.w3.org/2000/svg" data-scale="0.1">
      <g id="exterior">
        <rect x="0" y="0" width="100" height="80"/>
      </g>
      <g id="interior">
        <line x1="20" y1="0" x2="20" y2="80"/>
      </g>
      <g id="window">
        <line x1="30" y1="0" x2="60" y2="0"/>
      </g>
    </svg>"""

    def test_svg_round_trip(self):
        doc = svg_to_document(self.SVG)
        plan = parse_plan(doc)
        assert len(plan.exterior_walls) == 4
        assert len(plan.interior_walls) == 1
        assert len(plan.windows) == 1
        assert plan.boundary.area() == pytest.approx(80.0)  # 10 m x 8 m

    def test_missing_scale_rejected(self):
        with pytest.raises(ParseError):
            svg_to_document('<svg xmlns="http://www.w3.org/2000/svg"></svg>')

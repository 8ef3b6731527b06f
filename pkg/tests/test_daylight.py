from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from ddf.daylight import (
    DEFAULT_SAMPLES_PER_WINDOW,
    MapStyle,
    SiteParams,
    SkyModel,
    compute_daylight_map,
    map_sidecar,
    map_to_pgm,
    reference_constant,
    render_map,
    sun_position,
    thermal_lut,
)
from ddf.errors import GridMismatch
from ddf.floorplan import (
    WallKind,
    WallSegment,
    WindowSegment,
    mirror_plan,
    plan_from_profile,
    rasterize,
)
from ddf.geometry import RectilinearPolygon
from ddf.massing import SectionalProfile

from oracles import dense_sky_component

OVERCAST = SiteParams(sky=SkyModel.OVERCAST_ONLY)


def room(width=10.0, depth=10.0, windows=(), interior=()):
    profile = SectionalProfile(0.0, (RectilinearPolygon.from_rect(0, 0, width, depth),))
    plan = plan_from_profile(profile)
    return replace(plan, windows=tuple(windows), interior_walls=tuple(interior))


class TestSunPosition:
    def test_equator_equinox_noon_overhead(self):
        site = SiteParams(latitude=0.0, day_of_year=81)
        pos = sun_position(site, 12.0)
        assert pos.altitude == pytest.approx(90.0, abs=0.5)

    def test_tropic_solstice_noon_near_zenith(self):
        site = SiteParams(latitude=23.13, day_of_year=172)
        pos = sun_position(site, 12.0)
        assert pos.altitude == pytest.approx(90.0, abs=1.0)

    def test_night_sun_below_horizon(self):
        site = SiteParams(latitude=23.13, day_of_year=355)
        assert sun_position(site, 0.0).altitude < 0

    def test_morning_east_afternoon_west(self):
        site = SiteParams()
        assert 0 < sun_position(site, 9.0).azimuth < 180
        assert 180 < sun_position(site, 15.0).azimuth < 360

    def test_azimuth_range(self):
        for day in (10, 100, 200, 300):
            for hour in (6, 9, 12, 15, 18):
                pos = sun_position(SiteParams(day_of_year=day), float(hour))
                assert 0 <= pos.azimuth < 360
                assert -90 <= pos.altitude <= 90


class TestMapBasics:
    def test_zero_windows_all_zero(self):
        m = compute_daylight_map(room(), SiteParams())
        assert not m.values.any()

    def test_values_clamped_and_masked(self):
        plan = room(windows=[WindowSegment(0, 0.0, 10.0, 1.0)])
        m = compute_daylight_map(plan, SiteParams())
        assert m.values.min() >= 0.0
        assert m.values.max() <= 1.0
        assert not m.values[~m.grid.mask].any()

    def test_column_monotone_away_from_window(self):
        plan = room(windows=[WindowSegment(0, 4.0, 2.0)])
        m = compute_daylight_map(plan, OVERCAST)
        xs, _ = m.grid.centers()
        col = int(np.argmin(np.abs(xs - 5.0)))
        column = m.values[:, col][m.grid.mask[:, col]]
        assert np.all(np.diff(column) <= 1e-12)

    def test_matches_dense_oracle_ordering(self):
        plan = room(windows=[WindowSegment(0, 4.0, 2.0)])
        m = compute_daylight_map(plan, OVERCAST)
        xs, ys = m.grid.centers()
        col = int(np.argmin(np.abs(xs - 5.0)))
        cells = [(xs[col], ys[j]) for j in range(m.grid.height) if m.grid.mask[j, col]]
        dense = [dense_sky_component(plan, c, samples=1024) for c in cells]
        coarse = [m.sky[j, col] for j in range(m.grid.height) if m.grid.mask[j, col]]
        assert np.argsort(dense).tolist() == np.argsort(coarse).tolist()
        for d, c in zip(dense, coarse):
            assert d == pytest.approx(c, rel=0.05, abs=1e-6)

    def test_mirror_equivariance(self):
        plan = room(
            windows=[WindowSegment(0, 1.0, 2.0), WindowSegment(1, 3.0, 2.5)],
            interior=[WallSegment((3.0, 2.0), (3.0, 7.0), 0.2, WallKind.INTERIOR)],
        )
        m = compute_daylight_map(plan, OVERCAST)
        mm = compute_daylight_map(mirror_plan(plan), OVERCAST)
        assert np.abs(mm.values - np.fliplr(m.values)).max() <= 1e-9

    def test_transmittance_linearity(self):
        dim = room(windows=[WindowSegment(0, 4.0, 2.0, transmittance=0.35)])
        bright = room(windows=[WindowSegment(0, 4.0, 2.0, transmittance=0.70)])
        a = compute_daylight_map(dim, OVERCAST)
        b = compute_daylight_map(bright, OVERCAST)
        mask = a.grid.mask
        assert np.allclose(2.0 * a.sky[mask], b.sky[mask], atol=1e-12)

    def test_window_addition_never_darkens(self):
        base = room(windows=[WindowSegment(0, 1.0, 2.0)])
        more = room(windows=[WindowSegment(0, 1.0, 2.0), WindowSegment(2, 2.0, 3.0)])
        a = compute_daylight_map(base, SiteParams())
        b = compute_daylight_map(more, SiteParams())
        assert np.all(b.values >= a.values - 1e-9)

    def test_full_occlusion_zero(self):
        # wall straight across the room, window on the far side
        plan = room(
            windows=[WindowSegment(0, 4.0, 2.0)],
            interior=[WallSegment((0.0, 5.0), (10.0, 5.0), 0.2, WallKind.INTERIOR)],
        )
        m = compute_daylight_map(plan, OVERCAST)
        _, ys = m.grid.centers()
        far = ys > 5.25
        far_rows = m.values[far, :][m.grid.mask[far, :]]
        assert not far_rows.any()

    def test_grid_mismatch_rejected(self):
        plan = room(windows=[WindowSegment(0, 4.0, 2.0)])
        other = rasterize(replace(plan, grid_resolution=1.0))
        with pytest.raises(GridMismatch):
            compute_daylight_map(plan, SiteParams(), grid=other)

    def test_direct_component_south_window_sunlit(self):
        plan = room(windows=[WindowSegment(0, 0.0, 10.0)])
        site = SiteParams()  # autumn day: sun stands south
        m = compute_daylight_map(plan, site)
        assert m.direct[m.grid.mask].max() > 0

    def test_direct_zero_when_overcast(self):
        plan = room(windows=[WindowSegment(0, 0.0, 10.0)])
        m = compute_daylight_map(plan, OVERCAST)
        assert not m.direct.any()

    def test_north_window_no_direct_sun(self):
        plan = room(windows=[WindowSegment(2, 0.0, 10.0)])  # north wall
        m = compute_daylight_map(plan, SiteParams())
        assert not m.direct.any()

    def test_reference_constant_positive_and_cached(self):
        c1 = reference_constant(SiteParams())
        c2 = reference_constant(SiteParams())
        assert c1 > 0
        assert c1 == c2


class TestRendering:
    def test_pgm_format(self):
        plan = room(windows=[WindowSegment(0, 4.0, 2.0)])
        m = compute_daylight_map(plan, SiteParams())
        data = map_to_pgm(m)
        header, rest = data.split(b"\n", 1)
        assert header == b"P5"
        dims, rest = rest.split(b"\n", 1)
        w, h = map(int, dims.split())
        assert (w, h) == (m.grid.width, m.grid.height)
        maxval, pixels = rest.split(b"\n", 1)
        assert maxval == b"65535"
        assert len(pixels) == w * h * 2

    def test_grayscale_extremes(self):
        plan = room(windows=[WindowSegment(0, 0.0, 10.0, 1.0)])
        m = compute_daylight_map(plan, SiteParams())
        m.values[m.grid.mask] = 0.0
        img = render_map(m, MapStyle.GRAYSCALE)
        arr = np.array(img)
        assert (arr[..., :3][np.flipud(m.grid.mask)] == 0).all()
        m.values[m.grid.mask] = 1.0
        arr = np.array(render_map(m, MapStyle.GRAYSCALE))
        assert (arr[..., :3][np.flipud(m.grid.mask)] == 255).all()

    def test_render_bit_stable(self):
        plan = room(windows=[WindowSegment(0, 4.0, 2.0)])
        m = compute_daylight_map(plan, SiteParams())
        a = render_map(m, MapStyle.THERMAL).tobytes()
        b = render_map(m, MapStyle.THERMAL).tobytes()
        assert a == b

    def test_thermal_lut_shape(self):
        lut = thermal_lut()
        assert len(lut) == 256
        assert all(len(entry) == 3 for entry in lut)

    def test_sidecar_fields(self):
        plan = room(windows=[WindowSegment(0, 4.0, 2.0)])
        m = compute_daylight_map(plan, SiteParams(), plan_hash="abc123")
        sidecar = map_sidecar(m)
        assert sidecar["plan_hash"] == "abc123"
        assert sidecar["normalization_constant"] > 0

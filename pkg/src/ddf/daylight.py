"""Grid-based daylighting maps for floorplans.

The model is a 2D angular-aperture computation with occlusion, not a ray
tracer. For a cell center c the sky component sums, over every window,
the horizontal angle subtended by the window's visible sub-segments
(divided by pi, so a full half-plane of glazing scores 1) times the
glazing transmittance. Visibility is decided per sub-segment midpoint by
segment-intersection tests against interior walls and the boundary. The
direct component checks, for each configured solar hour, whether the ray
from the cell toward the sun exits through an unoccluded, sun-facing
window, weighted by sin(altitude) and the transmittance.

raw = 0.7 * sky + 0.3 * direct

Maps are normalized by the raw value of a probe 1 m inside the fully
glazed wall of an unobstructed 10 x 10 room (a per-site constant), then
clamped to [0, 1]. Inter-reflected light is not modeled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import GridMismatch, InvalidParams
from .floorplan import (
    AnalysisGrid,
    FloorPlan,
    WallKind,
    WallSegment,
    WindowSegment,
    boundary_edges,
    plan_from_profile,
    rasterize,
)
from .geometry import RectilinearPolygon

SKY_WEIGHT = 0.7
DIRECT_WEIGHT = 0.3
DEFAULT_SAMPLES_PER_WINDOW = 16
ORACLE_SAMPLES_PER_WINDOW = 1024


class SkyModel(str, Enum):
    OVERCAST_ONLY = "overcast_only"
    OVERCAST_PLUS_SUN = "overcast_plus_sun"


@dataclass(frozen=True)
class SunPosition:
    azimuth: float  # degrees clockwise from north, [0, 360)
    altitude: float  # degrees above horizon, [-90, 90]


@dataclass(frozen=True)
class SiteParams:
    """Solar context; defaults are Guangzhou, Guangdong province."""

    latitude: float = 23.13
    longitude: float = 113.26
    day_of_year: int = 295
    solar_hours: tuple[float, ...] = (9.0, 12.0, 15.0)
    sky: SkyModel = SkyModel.OVERCAST_PLUS_SUN

    def __post_init__(self):
        if not (-90 <= self.latitude <= 90):
            raise InvalidParams("latitude must be in [-90, 90]")
        if not (1 <= self.day_of_year <= 365):
            raise InvalidParams("day_of_year must be in [1, 365]")

    def to_document(self) -> dict:
        return {
            "latitude": self.latitude,
            "longitude": self.longitude,
            "day_of_year": self.day_of_year,
            "solar_hours": list(self.solar_hours),
            "sky": self.sky.value,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SiteParams":
        return cls(
            latitude=float(doc.get("latitude", 23.13)),
            longitude=float(doc.get("longitude", 113.26)),
            day_of_year=int(doc.get("day_of_year", 295)),
            solar_hours=tuple(float(h) for h in doc.get("solar_hours", (9.0, 12.0, 15.0))),
            sky=SkyModel(doc.get("sky", SkyModel.OVERCAST_PLUS_SUN.value)),
        )

    def cache_key(self) -> tuple:
        return (self.latitude, self.longitude, self.day_of_year, self.solar_hours, self.sky)


def sun_position(site: SiteParams, hour: float) -> SunPosition:
    """Solar position from declination and hour angle.

    declination = 23.45 deg * sin(360 deg * (284 + n) / 365)
    hour angle  = 15 deg * (solar hour - 12)
    altitude    = asin(sin(lat) sin(dec) + cos(lat) cos(dec) cos(h))
    """
    n = site.day_of_year
    dec = math.radians(23.45) * math.sin(math.radians(360.0 * (284 + n) / 365.0))
    lat = math.radians(site.latitude)
    h = math.radians(15.0 * (hour - 12.0))
    sin_alt = math.sin(lat) * math.sin(dec) + math.cos(lat) * math.cos(dec) * math.cos(h)
    sin_alt = min(1.0, max(-1.0, sin_alt))
    alt = math.asin(sin_alt)
    cos_alt = math.cos(alt)
    if cos_alt < 1e-12:
        azimuth = 0.0  # sun at zenith: azimuth undefined
    else:
        cos_az = (math.sin(dec) - sin_alt * math.sin(lat)) / (cos_alt * math.cos(lat))
        cos_az = min(1.0, max(-1.0, cos_az))
        azimuth = math.degrees(math.acos(cos_az))
        if h > 0:  # afternoon sun stands west of north
            azimuth = 360.0 - azimuth
    return SunPosition(azimuth % 360.0, math.degrees(alt))


@dataclass(eq=False)
class DaylightMap:
    """Normalized per-cell daylight values on an analysis grid.

    `values` is clamped to [0, 1]; `raw`, `sky` and `direct` keep the
    normalized-but-unclamped breakdown (sky/direct before weighting)
    for diagnostics and additive search.
    """

    grid: AnalysisGrid
    values: np.ndarray  # (height, width) float64 in [0, 1]
    meta: dict = field(default_factory=dict)
    raw: np.ndarray | None = None
    sky: np.ndarray | None = None
    direct: np.ndarray | None = None


def _obstacle_segments(plan: FloorPlan) -> np.ndarray:
    """All occluding centerlines: boundary edges then interior walls; (K, 4)."""
    segs = []
    for a, b in boundary_edges(plan.boundary):
        segs.append((a[0], a[1], b[0], b[1]))
    for wall in plan.interior_walls:
        segs.append((wall.start[0], wall.start[1], wall.end[0], wall.end[1]))
    if not segs:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array(segs, dtype=np.float64)


def _visible_fraction_blocked(cells: np.ndarray, targets: np.ndarray, obstacles: np.ndarray) -> np.ndarray:
    """Boolean (N, J): sight line from cell i to target j properly crosses
    an obstacle. Touching an obstacle endpoint does not block."""
    n, j = len(cells), len(targets)
    if len(obstacles) == 0:
        return np.zeros((n, j), dtype=bool)
    cx = cells[:, 0][:, None, None]
    cy = cells[:, 1][:, None, None]
    tx = targets[:, 0][None, :, None]
    ty = targets[:, 1][None, :, None]
    ox0 = obstacles[:, 0][None, None, :]
    oy0 = obstacles[:, 1][None, None, :]
    ox1 = obstacles[:, 2][None, None, :]
    oy1 = obstacles[:, 3][None, None, :]

    dx = tx - cx
    dy = ty - cy
    o0 = dx * (oy0 - cy) - dy * (ox0 - cx)  # orient(c, t, obstacle start)
    o1 = dx * (oy1 - cy) - dy * (ox1 - cx)
    ex = ox1 - ox0
    ey = oy1 - oy0
    p0 = ex * (cy - oy0) - ey * (cx - ox0)  # orient(o0, o1, c)
    p1 = ex * (ty - oy0) - ey * (tx - ox0)
    blocked = (o0 * o1 < 0) & (p0 * p1 < 0)
    return blocked.any(axis=2)


def _window_geometry(plan: FloorPlan, win: WindowSegment) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(endpoint a, endpoint b, outward normal) of a window in plan space."""
    wall = plan.exterior_walls[win.wall_index]
    d = wall.direction()
    a = np.array(wall.point_at(win.offset), dtype=np.float64)
    b = np.array(wall.point_at(win.offset + win.length), dtype=np.float64)
    # boundary rings run with the plan interior on the left, so the outward
    # normal is the direction rotated -90 degrees
    normal = np.array((d[1], -d[0]), dtype=np.float64)
    return a, b, normal


def _sky_component(
    cells: np.ndarray, plan: FloorPlan, obstacles: np.ndarray, samples: int
) -> np.ndarray:
    """Sum over windows of transmittance * visible subtended angle / pi."""
    total = np.zeros(len(cells), dtype=np.float64)
    if len(cells) == 0:
        return total
    for win in plan.windows:
        a, b, _ = _window_geometry(plan, win)
        j = np.arange(samples, dtype=np.float64)
        starts = a[None, :] + (b - a)[None, :] * (j / samples)[:, None]  # (J, 2)
        ends = a[None, :] + (b - a)[None, :] * ((j + 1) / samples)[:, None]
        mids = a[None, :] + (b - a)[None, :] * ((j + 0.5) / samples)[:, None]

        ux = starts[None, :, 0] - cells[:, 0][:, None]  # (N, J)
        uy = starts[None, :, 1] - cells[:, 1][:, None]
        vx = ends[None, :, 0] - cells[:, 0][:, None]
        vy = ends[None, :, 1] - cells[:, 1][:, None]
        cross = ux * vy - uy * vx
        dot = ux * vx + uy * vy
        angles = np.arctan2(np.abs(cross), dot)  # (N, J), in [0, pi)

        blocked = _visible_fraction_blocked(cells, mids, obstacles)
        visible_angle = np.where(blocked, 0.0, angles).sum(axis=1)
        total = total + win.transmittance * visible_angle / math.pi
    return total


def _direct_component(
    cells: np.ndarray, plan: FloorPlan, site: SiteParams, obstacles: np.ndarray
) -> np.ndarray:
    """Mean over solar hours of sin(altitude) * transmittance where the
    sun ray from the cell exits through a sun-facing window."""
    n_cells = len(cells)
    total = np.zeros(n_cells, dtype=np.float64)
    if n_cells == 0 or not site.solar_hours or not plan.windows:
        return total

    edges = boundary_edges(plan.boundary)
    n_boundary = len(edges)
    windows_by_edge: dict[int, list[WindowSegment]] = {}
    for win in plan.windows:
        windows_by_edge.setdefault(win.wall_index, []).append(win)

    for hour in site.solar_hours:
        sun = sun_position(site, hour)
        if sun.altitude <= 0:
            continue
        az = math.radians(sun.azimuth)
        d = np.array((math.sin(az), math.cos(az)), dtype=np.float64)  # x east, y north

        # first hit along the ray over all obstacle segments
        ox0, oy0 = obstacles[:, 0], obstacles[:, 1]
        ex = obstacles[:, 2] - ox0
        ey = obstacles[:, 3] - oy0
        denom = d[0] * ey - d[1] * ex  # (K,)
        cx = cells[:, 0][:, None]
        cy = cells[:, 1][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = ((ox0 - cx) * ey - (oy0 - cy) * ex) / denom
            u = ((ox0 - cx) * d[1] - (oy0 - cy) * d[0]) / denom
        valid = (np.abs(denom) > 1e-15) & (t > 1e-9) & (u >= -1e-12) & (u <= 1 + 1e-12)
        t = np.where(valid, t, np.inf)
        hit_idx = np.argmin(t, axis=1)  # ties resolve to the lowest segment index
        hit_t = t[np.arange(n_cells), hit_idx]
        hit_u = u[np.arange(n_cells), hit_idx]

        contribution = np.zeros(n_cells, dtype=np.float64)
        sin_alt = math.sin(math.radians(sun.altitude))
        for edge_idx, wins in windows_by_edge.items():
            a, b = edges[edge_idx]
            edge_len = math.hypot(b[0] - a[0], b[1] - a[1])
            dirx = (b[0] - a[0]) / edge_len
            diry = (b[1] - a[1]) / edge_len
            normal_dot = d[0] * diry - d[1] * dirx  # outward normal (dy, -dx) . sun dir
            if normal_dot <= 0:
                continue  # window faces away from the sun
            on_edge = (hit_idx == edge_idx) & np.isfinite(hit_t)
            if not on_edge.any():
                continue
            offsets = hit_u * edge_len
            for win in wins:
                in_span = on_edge & (offsets >= win.offset) & (offsets <= win.offset + win.length)
                contribution = np.where(in_span, sin_alt * win.transmittance, contribution)
        total = total + contribution

    return total / len(site.solar_hours)


def _raw_at_points(
    plan: FloorPlan, site: SiteParams, points: np.ndarray, samples: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sky, direct, raw) arrays at arbitrary plan-space points."""
    obstacles = _obstacle_segments(plan)
    sky = _sky_component(points, plan, obstacles, samples)
    if site.sky is SkyModel.OVERCAST_PLUS_SUN:
        direct = _direct_component(points, plan, site, obstacles)
    else:
        direct = np.zeros(len(points), dtype=np.float64)
    raw = SKY_WEIGHT * sky + DIRECT_WEIGHT * direct
    return sky, direct, raw


@lru_cache(maxsize=32)
def _reference_constant(site_key: tuple, samples: int) -> float:
    """Raw value of the normalization probe: unobstructed 10 x 10 room,
    fully glazed south wall at default transmittance, probe 1 m inside."""
    site = SiteParams(
        latitude=site_key[0],
        longitude=site_key[1],
        day_of_year=site_key[2],
        solar_hours=site_key[3],
        sky=site_key[4],
    )
    from .massing import SectionalProfile

    profile = SectionalProfile(0.0, (RectilinearPolygon.from_rect(0.0, 0.0, 10.0, 10.0),))
    plan = plan_from_profile(profile)
    plan = replace(plan, windows=(WindowSegment(0, 0.0, 10.0),))
    probe = np.array([[5.0, 1.0]], dtype=np.float64)
    _, _, raw = _raw_at_points(plan, site, probe, samples)
    return float(raw[0])


def reference_constant(site: SiteParams, samples: int = DEFAULT_SAMPLES_PER_WINDOW) -> float:
    return _reference_constant(site.cache_key(), samples)


def compute_daylight_map(
    plan: FloorPlan,
    site: SiteParams,
    *,
    grid: AnalysisGrid | None = None,
    samples_per_window: int = DEFAULT_SAMPLES_PER_WINDOW,
    plan_hash: str | None = None,
) -> DaylightMap:
    """Daylight map over the plan's analysis grid; masked-off cells are 0."""
    own_grid = rasterize(plan)
    if grid is None:
        grid = own_grid
    elif not grid.same_shape(own_grid):
        raise GridMismatch("supplied grid does not match the plan's raster domain")

    xs, ys = grid.centers()
    jj, ii = np.nonzero(grid.mask)
    cells = np.column_stack((xs[ii], ys[jj]))

    sky_c, direct_c, raw_c = _raw_at_points(plan, site, cells, samples_per_window)
    constant = reference_constant(site, samples_per_window)

    shape = (grid.height, grid.width)
    sky = np.zeros(shape, dtype=np.float64)
    direct = np.zeros(shape, dtype=np.float64)
    raw = np.zeros(shape, dtype=np.float64)
    sky[jj, ii] = sky_c
    direct[jj, ii] = direct_c
    raw[jj, ii] = raw_c / constant
    values = np.clip(raw, 0.0, 1.0)

    meta = {
        "site": site.to_document(),
        "plan_hash": plan_hash,
        "normalization_constant": constant,
        "samples_per_window": samples_per_window,
        "components": ["sky", "direct"],
    }
    return DaylightMap(grid, values, meta, raw=raw, sky=sky, direct=direct)


# ---------------------------------------------------------------------------
# serialization and rendering


def map_to_pgm(daylight: DaylightMap) -> bytes:
    """16-bit binary PGM; row 0 is the top (maximum y) of the plan."""
    values = np.flipud(daylight.values)
    scaled = np.round(values * 65535.0).astype(">u2")
    header = f"P5\n{daylight.grid.width} {daylight.grid.height}\n65535\n".encode()
    return header + scaled.tobytes()


def map_sidecar(daylight: DaylightMap) -> dict:
    return {
        "site": daylight.meta.get("site"),
        "plan_hash": daylight.meta.get("plan_hash"),
        "normalization_constant": daylight.meta.get("normalization_constant"),
        "cell_size": daylight.grid.cell_size,
        "width": daylight.grid.width,
        "height": daylight.grid.height,
    }


class MapStyle(str, Enum):
    GRAYSCALE = "grayscale"
    THERMAL = "thermal"


@lru_cache(maxsize=1)
def thermal_lut() -> tuple[tuple[int, int, int], ...]:
    """256-entry RGB lookup table shipped as package data."""
    from importlib.resources import files

    raw = json.loads(files("ddf.data").joinpath("thermal_lut.json").read_text())
    return tuple(tuple(rgb) for rgb in raw)


def render_map(daylight: DaylightMap, style: MapStyle = MapStyle.THERMAL, scale: int = 1):
    """Render to a PIL RGBA image, one pixel per cell (nearest-neighbor
    upscaled by `scale`); masked-off cells are transparent."""
    from PIL import Image

    if scale < 1:
        raise InvalidParams("scale must be >= 1")
    h, w = daylight.values.shape
    rgba = np.zeros((h, w, 4), dtype=np.uint8)
    level = np.round(daylight.values * 255.0).astype(np.uint8)
    if style is MapStyle.GRAYSCALE:
        rgba[..., 0] = level
        rgba[..., 1] = level
        rgba[..., 2] = level
    else:
        lut = np.array(thermal_lut(), dtype=np.uint8)
        rgba[..., :3] = lut[level]
    rgba[..., 3] = np.where(daylight.grid.mask, 255, 0)
    rgba = np.flipud(rgba)  # image rows run top-down
    image = Image.fromarray(rgba, "RGBA")
    if scale > 1:
        image = image.resize((w * scale, h * scale), Image.NEAREST)
    return image

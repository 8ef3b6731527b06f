"""Vector floorplans: boundary, walls, windows, and the analysis grid.

A plan is decomposed into three layers (exterior walls, interior walls,
windows) that round-trip through the JSON plan schema. Exterior walls are
exactly the boundary's edges, in canonical ring order (outer ring first,
then courtyard holes — courtyard-facing edges admit daylight and count as
exterior). Windows live on exterior walls, addressed by wall index and
offset along the wall.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import EmptyProfile, ParseError, ValidationError
from .geometry import Point, RectilinearPolygon
from .massing import SectionalProfile

PLAN_SCHEMA_VERSION = "1"

DEFAULT_EXTERIOR_THICKNESS = 0.3
DEFAULT_INTERIOR_THICKNESS = 0.2
DEFAULT_TRANSMITTANCE = 0.7
DEFAULT_GRID_RESOLUTION = 0.5
MIN_WINDOW_LENGTH = 0.4
WINDOW_SNAP_TOL = 1e-3
_GEOM_TOL = 1e-9


class WallKind(str, Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class WallSegment:
    start: Point
    end: Point
    thickness: float
    kind: WallKind

    def __post_init__(self):
        if self.start == self.end:
            raise ValidationError("wall segment has zero length")
        if self.thickness <= 0:
            raise ValidationError("wall thickness must be positive")
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    def direction(self) -> Point:
        l = self.length
        return ((self.end[0] - self.start[0]) / l, (self.end[1] - self.start[1]) / l)

    def point_at(self, offset: float) -> Point:
        d = self.direction()
        return (self.start[0] + d[0] * offset, self.start[1] + d[1] * offset)


@dataclass(frozen=True)
class WindowSegment:
    wall_index: int
    offset: float
    length: float
    transmittance: float = DEFAULT_TRANSMITTANCE

    def __post_init__(self):
        if self.offset < -_GEOM_TOL:
            raise ValidationError("window offset must be non-negative")
        if self.length < MIN_WINDOW_LENGTH - _GEOM_TOL:
            raise ValidationError(f"window length must be >= {MIN_WINDOW_LENGTH} m")
        if not (0 < self.transmittance <= 1):
            raise ValidationError("transmittance must be in (0, 1]")


@dataclass(frozen=True)
class FloorPlan:
    boundary: RectilinearPolygon
    exterior_walls: tuple[WallSegment, ...]
    interior_walls: tuple[WallSegment, ...] = ()
    windows: tuple[WindowSegment, ...] = ()
    grid_resolution: float = DEFAULT_GRID_RESOLUTION

    def __post_init__(self):
        if not (0.1 <= self.grid_resolution <= 2.0):
            raise ValidationError("grid_resolution must be in [0.1, 2.0] m")
        edges = boundary_edges(self.boundary)
        if len(self.exterior_walls) != len(edges):
            raise ValidationError("exterior walls must cover every boundary edge")
        for wall, (a, b) in zip(self.exterior_walls, edges):
            if wall.kind is not WallKind.EXTERIOR:
                raise ValidationError("boundary walls must be exterior")
            if _dist(wall.start, a) > _GEOM_TOL or _dist(wall.end, b) > _GEOM_TOL:
                raise ValidationError("exterior walls must match boundary edges in order")
        for wall in self.interior_walls:
            if wall.kind is not WallKind.INTERIOR:
                raise ValidationError("interior wall list holds a non-interior wall")
            for p in (wall.start, wall.end, wall.point_at(wall.length / 2)):
                if not self.boundary.contains(*p) and not _on_boundary(self.boundary, p):
                    raise ValidationError("interior wall leaves the boundary")
        for win in self.windows:
            if not (0 <= win.wall_index < len(self.exterior_walls)):
                raise ValidationError(f"window references missing wall {win.wall_index}")
            wall = self.exterior_walls[win.wall_index]
            if win.offset + win.length > wall.length + 1e-6:
                raise ValidationError("window extends past its wall")

    def window_endpoints(self, win: WindowSegment) -> tuple[Point, Point]:
        wall = self.exterior_walls[win.wall_index]
        return wall.point_at(win.offset), wall.point_at(win.offset + win.length)

    def bounds(self) -> tuple[float, float, float, float]:
        return self.boundary.bounds()


def boundary_edges(boundary: RectilinearPolygon) -> list[tuple[Point, Point]]:
    """Directed edges in canonical order: outer ring then hole rings."""
    edges = []
    for ring in boundary.rings():
        n = len(ring)
        edges.extend((ring[i], ring[(i + 1) % n]) for i in range(n))
    return edges


def _dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _on_boundary(boundary: RectilinearPolygon, p: Point, tol: float = _GEOM_TOL) -> bool:
    from .geometry import point_on_ring

    return any(point_on_ring(p[0], p[1], ring, tol) for ring in boundary.rings())


def plan_from_profile(
    profile: SectionalProfile,
    wall_thickness: float = DEFAULT_EXTERIOR_THICKNESS,
    grid_resolution: float = DEFAULT_GRID_RESOLUTION,
) -> FloorPlan:
    """Largest-area region of a profile as a plan: exterior walls only."""
    if profile.is_empty:
        raise EmptyProfile("profile has no regions")
    region = max(profile.regions, key=lambda r: r.area())
    walls = tuple(
        WallSegment(a, b, wall_thickness, WallKind.EXTERIOR) for a, b in boundary_edges(region)
    )
    return FloorPlan(region, walls, grid_resolution=grid_resolution)


@dataclass(eq=False)
class AnalysisGrid:
    """Raster domain for daylight maps; mask marks analyzable cells.

    The grid is centered on the boundary's bounding box and cell centers
    are derived from the stored center, so a mirrored plan produces the
    exactly mirrored grid (same cell coordinates with flipped sign).
    """

    center: Point
    cell_size: float
    width: int
    height: int
    mask: np.ndarray  # bool, shape (height, width)

    @property
    def origin(self) -> Point:
        return (
            self.center[0] - self.width * self.cell_size / 2.0,
            self.center[1] - self.height * self.cell_size / 2.0,
        )

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate vectors (xs of width, ys of height)."""
        i = np.arange(self.width, dtype=np.float64)
        j = np.arange(self.height, dtype=np.float64)
        xs = self.center[0] + (i + 0.5 - self.width / 2.0) * self.cell_size
        ys = self.center[1] + (j + 0.5 - self.height / 2.0) * self.cell_size
        return xs, ys

    def masked_count(self) -> int:
        return int(self.mask.sum())

    def same_shape(self, other: "AnalysisGrid") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and self.cell_size == other.cell_size
            and _dist(self.center, other.center) <= _GEOM_TOL
        )


def rasterize(plan: FloorPlan) -> AnalysisGrid:
    """Mask is true where the cell center is inside the boundary and
    farther than thickness/2 from every wall centerline."""
    x0, y0, x1, y1 = plan.bounds()
    res = plan.grid_resolution
    width = max(1, math.ceil((x1 - x0) / res - 1e-9))
    height = max(1, math.ceil((y1 - y0) / res - 1e-9))
    grid = AnalysisGrid(((x0 + x1) / 2.0, (y0 + y1) / 2.0), res, width, height, None)

    xs, ys = grid.centers()
    X, Y = np.meshgrid(xs, ys)  # (height, width)

    inside = np.zeros_like(X, dtype=bool)
    for ring in plan.boundary.rings():
        n = len(ring)
        for k in range(n):
            px, py = ring[k]
            qx, qy = ring[(k + 1) % n]
            if px != qx:
                continue
            inside ^= ((py > Y) != (qy > Y)) & (X < px)

    clear = np.ones_like(inside)
    for wall in (*plan.exterior_walls, *plan.interior_walls):
        d2 = _point_segment_dist2(X, Y, wall.start, wall.end)
        clear &= d2 > (wall.thickness / 2.0) ** 2

    grid.mask = inside & clear
    return grid


def _point_segment_dist2(X: np.ndarray, Y: np.ndarray, a: Point, b: Point) -> np.ndarray:
    ax, ay = a
    bx, by = b
    if ax == bx:  # vertical wall: clamp in y, exact under mirroring
        cy = np.clip(Y, min(ay, by), max(ay, by))
        return (X - ax) ** 2 + (Y - cy) ** 2
    if ay == by:  # horizontal wall
        cx = np.clip(X, min(ax, bx), max(ax, bx))
        return (X - cx) ** 2 + (Y - ay) ** 2
    dx, dy = bx - ax, by - ay
    len2 = dx * dx + dy * dy
    t = ((X - ax) * dx + (Y - ay) * dy) / len2
    t = np.clip(t, 0.0, 1.0)
    px = ax + t * dx
    py = ay + t * dy
    return (X - px) ** 2 + (Y - py) ** 2


# ---------------------------------------------------------------------------
# plan documents (JSON schema) and the three-layer decomposition


def plan_to_document(plan: FloorPlan) -> dict:
    return {
        "schema_version": PLAN_SCHEMA_VERSION,
        "units": "m",
        "grid_resolution": plan.grid_resolution,
        "layers": {
            "exterior": [_segment_entry(w) for w in plan.exterior_walls],
            "interior": [_segment_entry(w) for w in plan.interior_walls],
            "windows": [
                {
                    "wall_ref": w.wall_index,
                    "offset": w.offset,
                    "length": w.length,
                    "transmittance": w.transmittance,
                }
                for w in plan.windows
            ],
        },
    }


def _segment_entry(wall: WallSegment) -> dict:
    return {
        "start": [wall.start[0], wall.start[1]],
        "end": [wall.end[0], wall.end[1]],
        "thickness": wall.thickness,
    }


def parse_plan(document: dict | str) -> FloorPlan:
    """Validate and build a plan from a plan document.

    Exterior segments must chain into closed rectilinear loops; windows
    are accepted either as wall references or as geometric segments that
    snap to the nearest exterior wall within 1 mm.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("plan document must be an object")
    if document.get("schema_version") != PLAN_SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {document.get('schema_version')!r}")
    if document.get("units", "m") != "m":
        raise ParseError("units must be meters")
    layers = document.get("layers")
    if not isinstance(layers, dict):
        raise ParseError("missing layers object")

    exterior_entries = layers.get("exterior", [])
    if not exterior_entries:
        raise ValidationError("plan needs at least one exterior segment")
    segments = [_read_segment(e, DEFAULT_EXTERIOR_THICKNESS) for e in exterior_entries]
    rings = _chain_rings([s[:2] for s in segments])

    outer_idx = max(range(len(rings)), key=lambda i: abs(_ring_area(rings[i])))
    holes = tuple(rings[i] for i in range(len(rings)) if i != outer_idx)
    try:
        boundary = RectilinearPolygon(rings[outer_idx], holes)
    except Exception as exc:
        raise ValidationError(f"exterior layer is not a valid boundary: {exc}") from exc

    walls = []
    for a, b in boundary_edges(boundary):
        thickness = _lookup_thickness(segments, a, b)
        walls.append(WallSegment(a, b, thickness, WallKind.EXTERIOR))
    walls = tuple(walls)

    interior = tuple(
        WallSegment(s[0], s[1], s[2], WallKind.INTERIOR)
        for s in (_read_segment(e, DEFAULT_INTERIOR_THICKNESS) for e in layers.get("interior", []))
    )

    windows = []
    for entry in layers.get("windows", []):
        windows.append(_read_window(entry, walls))

    resolution = float(document.get("grid_resolution", DEFAULT_GRID_RESOLUTION))
    return FloorPlan(boundary, walls, interior, tuple(windows), resolution)


def _read_segment(entry: dict, default_thickness: float) -> tuple[Point, Point, float]:
    try:
        start = (float(entry["start"][0]), float(entry["start"][1]))
        end = (float(entry["end"][0]), float(entry["end"][1]))
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"segment entry malformed: {entry!r}") from exc
    thickness = float(entry.get("thickness", default_thickness))
    return start, end, thickness


def _chain_rings(segments: list[tuple[Point, Point]]) -> list[tuple[Point, ...]]:
    def key(p: Point) -> tuple[int, int]:
        return (round(p[0] / 1e-6), round(p[1] / 1e-6))

    adjacency: dict[tuple[int, int], list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        adjacency.setdefault(key(a), []).append(idx)
        adjacency.setdefault(key(b), []).append(idx)
    for node, incident in adjacency.items():
        if len(incident) != 2:
            raise ValidationError("open boundary loop: endpoint degree != 2")

    used = [False] * len(segments)
    rings = []
    for start_idx in range(len(segments)):
        if used[start_idx]:
            continue
        ring = [segments[start_idx][0]]
        used[start_idx] = True
        cur = segments[start_idx][1]
        while key(cur) != key(ring[0]):
            ring.append(cur)
            candidates = [i for i in adjacency[key(cur)] if not used[i]]
            if not candidates:
                raise ValidationError("open boundary loop: chain breaks")
            nxt = candidates[0]
            used[nxt] = True
            a, b = segments[nxt]
            cur = b if key(a) == key(cur) else a
        if len(ring) < 4:
            raise ValidationError("boundary ring has fewer than 4 corners")
        rings.append(tuple(ring))
    return rings


def _ring_area(ring: tuple[Point, ...]) -> float:
    total = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def _lookup_thickness(segments: list[tuple[Point, Point, float]], a: Point, b: Point) -> float:
    """Thickness for a canonical edge: max over source segments lying on it."""
    best = None
    for s, e, t in segments:
        if _on_edge_line(a, b, s) and _on_edge_line(a, b, e):
            best = t if best is None else max(best, t)
    return best if best is not None else DEFAULT_EXTERIOR_THICKNESS


def _on_edge_line(a: Point, b: Point, p: Point, tol: float = 1e-6) -> bool:
    if a[0] == b[0]:
        return abs(p[0] - a[0]) <= tol and min(a[1], b[1]) - tol <= p[1] <= max(a[1], b[1]) + tol
    return abs(p[1] - a[1]) <= tol and min(a[0], b[0]) - tol <= p[0] <= max(a[0], b[0]) + tol


def _read_window(entry: dict, walls: tuple[WallSegment, ...]) -> WindowSegment:
    transmittance = float(entry.get("transmittance", DEFAULT_TRANSMITTANCE))
    if "wall_ref" in entry:
        idx = int(entry["wall_ref"])
        if not (0 <= idx < len(walls)):
            raise ValidationError(f"window wall_ref {idx} out of range")
        return WindowSegment(idx, float(entry["offset"]), float(entry["length"]), transmittance)
    if "start" not in entry or "end" not in entry:
        raise ParseError(f"window entry needs wall_ref or start/end: {entry!r}")
    start = (float(entry["start"][0]), float(entry["start"][1]))
    end = (float(entry["end"][0]), float(entry["end"][1]))
    return snap_window(start, end, walls, transmittance)


def snap_window(
    start: Point, end: Point, walls: tuple[WallSegment, ...], transmittance: float = DEFAULT_TRANSMITTANCE
) -> WindowSegment:
    """Attach a geometric window segment to the nearest exterior wall.

    Both endpoints must lie within WINDOW_SNAP_TOL of the chosen wall;
    anything farther is rejected rather than silently moved.
    """
    best = None
    for idx, wall in enumerate(walls):
        d = max(_point_to_segment(start, wall), _point_to_segment(end, wall))
        if best is None or d < best[0]:
            best = (d, idx)
    if best is None or best[0] > WINDOW_SNAP_TOL:
        raise ValidationError(
            f"window {start}-{end} lies {best[0] if best else math.inf:.4f} m off any exterior wall"
        )
    wall = walls[best[1]]
    d = wall.direction()
    o1 = (start[0] - wall.start[0]) * d[0] + (start[1] - wall.start[1]) * d[1]
    o2 = (end[0] - wall.start[0]) * d[0] + (end[1] - wall.start[1]) * d[1]
    lo, hi = min(o1, o2), max(o1, o2)
    lo = min(max(lo, 0.0), wall.length)
    hi = min(max(hi, 0.0), wall.length)
    return WindowSegment(best[1], lo, hi - lo, transmittance)


def _point_to_segment(p: Point, wall: WallSegment) -> float:
    ax, ay = wall.start
    bx, by = wall.end
    dx, dy = bx - ax, by - ay
    len2 = dx * dx + dy * dy
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / len2
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def decompose(plan: FloorPlan) -> dict[str, dict]:
    """Three single-layer documents whose recomposition parses back equal."""
    full = plan_to_document(plan)
    out = {}
    for name in ("exterior", "interior", "windows"):
        out[name] = {
            "schema_version": PLAN_SCHEMA_VERSION,
            "units": "m",
            "grid_resolution": plan.grid_resolution,
            "layers": {name: full["layers"][name]},
        }
    return out


def compose(parts: dict[str, dict]) -> dict:
    """Merge decomposed layer documents back into one plan document."""
    layers = {"exterior": [], "interior": [], "windows": []}
    resolution = DEFAULT_GRID_RESOLUTION
    for part in parts.values():
        if part.get("schema_version") != PLAN_SCHEMA_VERSION:
            raise ParseError("layer document has wrong schema_version")
        resolution = float(part.get("grid_resolution", resolution))
        for name, entries in part.get("layers", {}).items():
            if name not in layers:
                raise ParseError(f"unknown layer {name!r}")
            layers[name].extend(entries)
    return {
        "schema_version": PLAN_SCHEMA_VERSION,
        "units": "m",
        "grid_resolution": resolution,
        "layers": layers,
    }


# ---------------------------------------------------------------------------
# SVG import shim: line/rect/polyline on layers named exterior|interior|window


def svg_to_document(svg_text: str) -> dict:
    """Convert a constrained SVG into a plan document.

    Requires a data-scale attribute (meters per user unit) on the root.
    Group elements named exterior/interior/window (by id, data-name, or
    inkscape label) carry the layers; y is flipped to make the plan y-up.
    """
    try:
        root = ET.fromstring(svg_text)
    except ET.ParseError as exc:
        raise ParseError(f"invalid SVG: {exc}") from exc
    scale_attr = root.get("data-scale")
    if scale_attr is None:
        raise ParseError("SVG import requires a data-scale attribute (meters per unit)")
    scale = float(scale_attr)
    if scale <= 0:
        raise ParseError("data-scale must be positive")

    layers: dict[str, list] = {"exterior": [], "interior": [], "windows": []}
    layer_alias = {"exterior": "exterior", "interior": "interior", "window": "windows", "windows": "windows"}

    def group_name(el: ET.Element) -> str | None:
        for attr in ("id", "data-name", "{http://www.inkscape.org/namespaces/inkscape}label"):
            name = el.get(attr)
            if name and name.lower() in layer_alias:
                return layer_alias[name.lower()]
        return None

    def pt(x: float, y: float) -> list[float]:
        return [x * scale, -y * scale]

    for group in root.iter():
        if not group.tag.endswith("g"):
            continue
        layer = group_name(group)
        if layer is None:
            continue
        for el in group:
            tag = el.tag.split("}")[-1]
            if tag == "line":
                entry = {
                    "start": pt(float(el.get("x1", 0)), float(el.get("y1", 0))),
                    "end": pt(float(el.get("x2", 0)), float(el.get("y2", 0))),
                }
            elif tag == "rect":
                x, y = float(el.get("x", 0)), float(el.get("y", 0))
                w, h = float(el.get("width", 0)), float(el.get("height", 0))
                corners = [pt(x, y), pt(x + w, y), pt(x + w, y + h), pt(x, y + h)]
                for a, b in zip(corners, corners[1:] + corners[:1]):
                    layers[layer].append({"start": a, "end": b})
                continue
            elif tag == "polyline":
                raw = (el.get("points") or "").replace(",", " ").split()
                coords = [float(v) for v in raw]
                pts = [pt(coords[i], coords[i + 1]) for i in range(0, len(coords) - 1, 2)]
                for a, b in zip(pts[:-1], pts[1:]):
                    layers[layer].append({"start": a, "end": b})
                continue
            else:
                continue
            layers[layer].append(entry)

    return {
        "schema_version": PLAN_SCHEMA_VERSION,
        "units": "m",
        "grid_resolution": DEFAULT_GRID_RESOLUTION,
        "layers": layers,
    }


def mirror_plan(plan: FloorPlan) -> FloorPlan:
    """Reflect a plan about the y-axis (x -> -x); used by symmetry checks."""

    def flip(p: Point) -> Point:
        return (-p[0], p[1])

    boundary = RectilinearPolygon(
        tuple(flip(p) for p in plan.boundary.outer),
        tuple(tuple(flip(p) for p in h) for h in plan.boundary.holes),
    )
    edges = boundary_edges(boundary)

    walls = []
    window_map: dict[int, int] = {}
    old_edges = boundary_edges(plan.boundary)
    for new_idx, (a, b) in enumerate(edges):
        # find the source edge this mirrored edge came from
        src = None
        for old_idx, (oa, ob) in enumerate(old_edges):
            if (flip(oa), flip(ob)) == (b, a) or (flip(oa), flip(ob)) == (a, b):
                src = old_idx
                break
        if src is None:
            raise ValidationError("mirror failed to match boundary edges")
        window_map[src] = new_idx
        walls.append(WallSegment(a, b, plan.exterior_walls[src].thickness, WallKind.EXTERIOR))

    interior = tuple(
        WallSegment(flip(w.start), flip(w.end), w.thickness, WallKind.INTERIOR)
        for w in plan.interior_walls
    )
    windows = []
    for win in plan.windows:
        old_wall = plan.exterior_walls[win.wall_index]
        new_idx = window_map[win.wall_index]
        new_wall = walls[new_idx]
        # mirrored edge direction reverses, so the offset measures from the far end
        a, b = flip(old_wall.start), flip(old_wall.end)
        if _dist(new_wall.start, b) <= _GEOM_TOL and _dist(new_wall.end, a) <= _GEOM_TOL:
            offset = old_wall.length - win.offset - win.length
        else:
            offset = win.offset
        windows.append(WindowSegment(new_idx, offset, win.length, win.transmittance))

    return FloorPlan(boundary, tuple(walls), interior, tuple(windows), plan.grid_resolution)

"""Exact boolean operations on axis-aligned (rectilinear) polygon sets.

Every edge here is parallel to the x or y axis. Boolean results are
computed on the overlay grid induced by the operands' own coordinates:
each grid cell lies entirely inside or outside each operand, so a single
inside/outside classification at the cell center (which can never touch
an edge) decides the whole cell, and every output edge reuses an input
coordinate verbatim. No floating-point error accumulates.

Result rings are rebuilt by tracing the boundary of the classified cells
with the region kept on the left of the walk direction. At a four-way
corner (two diagonal cells of the same region meeting at a point) the
trace takes the leftmost available turn, which splits the corner into two
simple rings instead of a self-intersecting figure eight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import MalformedPolygon

Point = tuple[float, float]
Ring = tuple[Point, ...]

_COORD_MERGE_TOL = 1e-12


def signed_area(ring: Sequence[Point]) -> float:
    """Shoelace area; positive for counter-clockwise rings."""
    total = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def _merge_collinear(ring: Sequence[Point]) -> Ring:
    # drop duplicate consecutive vertices, then vertices whose incident
    # edges run along the same axis
    pts = [p for i, p in enumerate(ring) if p != ring[(i + 1) % len(ring)]]
    out: list[Point] = []
    n = len(pts)
    for i in range(n):
        prev = pts[(i - 1) % n]
        cur = pts[i]
        nxt = pts[(i + 1) % n]
        horiz_in = prev[1] == cur[1]
        horiz_out = cur[1] == nxt[1]
        if horiz_in != horiz_out:
            out.append(cur)
    return tuple(out)


def _rotate_to_min(ring: Ring) -> Ring:
    k = min(range(len(ring)), key=lambda i: ring[i])
    return ring[k:] + ring[:k]


def _canonical_ring(ring: Sequence[Point], ccw: bool) -> Ring:
    pts = _merge_collinear(tuple((float(x), float(y)) for x, y in ring))
    if len(pts) < 4:
        raise MalformedPolygon(f"ring needs at least 4 corners, got {len(pts)}")
    area = signed_area(pts)
    if area == 0.0:
        raise MalformedPolygon("ring has zero area")
    if (area > 0) != ccw:
        pts = tuple(reversed(pts))
    return _rotate_to_min(pts)


def _check_rectilinear(ring: Ring) -> None:
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        if (x0 != x1) == (y0 != y1):
            raise MalformedPolygon(f"edge {ring[i]}-{ring[(i + 1) % n]} is not axis-parallel")


def _segments_cross(a0: Point, a1: Point, b0: Point, b1: Point) -> bool:
    """True if two axis-aligned segments share more than a common endpoint."""
    ax_lo, ax_hi = min(a0[0], a1[0]), max(a0[0], a1[0])
    ay_lo, ay_hi = min(a0[1], a1[1]), max(a0[1], a1[1])
    bx_lo, bx_hi = min(b0[0], b1[0]), max(b0[0], b1[0])
    by_lo, by_hi = min(b0[1], b1[1]), max(b0[1], b1[1])
    if ax_hi < bx_lo or bx_hi < ax_lo or ay_hi < by_lo or by_hi < ay_lo:
        return False
    # overlapping bounding boxes of axis-aligned segments: they intersect;
    # allow only a shared endpoint
    shared = {a0, a1} & {b0, b1}
    if not shared:
        return True
    # endpoint shared: reject if boxes overlap beyond the single point
    ix_lo, ix_hi = max(ax_lo, bx_lo), min(ax_hi, bx_hi)
    iy_lo, iy_hi = max(ay_lo, by_lo), min(ay_hi, by_hi)
    return not (ix_lo == ix_hi and iy_lo == iy_hi)


def _check_simple(ring: Ring) -> None:
    if len(set(ring)) != len(ring):
        raise MalformedPolygon("ring revisits a vertex")
    n = len(ring)
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share one endpoint by construction
            if _segments_cross(*edges[i], *edges[j]):
                raise MalformedPolygon("ring self-intersects")


def point_in_ring(x: float, y: float, ring: Ring) -> bool:
    """Even-odd test; undefined exactly on the boundary."""
    inside = False
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        if x0 != x1:
            continue  # horizontal edges never cross a horizontal ray
        if (y0 > y) != (y1 > y) and x < x0:
            inside = not inside
    return inside


def point_on_ring(x: float, y: float, ring: Ring, tol: float = 0.0) -> bool:
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        if x0 == x1:
            if abs(x - x0) <= tol and min(y0, y1) - tol <= y <= max(y0, y1) + tol:
                return True
        else:
            if abs(y - y0) <= tol and min(x0, x1) - tol <= x <= max(x0, x1) + tol:
                return True
    return False


@dataclass(frozen=True)
class RectilinearPolygon:
    """One region: counter-clockwise outer ring, clockwise holes.

    Construction canonicalizes: collinear vertices merged, orientation
    fixed, rings rotated to start at their lexicographic minimum vertex,
    holes sorted. Equal regions therefore compare equal structurally.
    """

    outer: Ring
    holes: tuple[Ring, ...] = ()

    def __post_init__(self):
        outer = _canonical_ring(self.outer, ccw=True)
        holes = tuple(sorted(_canonical_ring(h, ccw=False) for h in self.holes))
        _check_rectilinear(outer)
        _check_simple(outer)
        for h in holes:
            _check_rectilinear(h)
            _check_simple(h)
            # hole interiors must stay inside the outer ring; a vertex may
            # touch the outer ring (point pinch), an edge interior may not
            for i, v in enumerate(h):
                if not point_in_ring(*v, outer) and not point_on_ring(*v, outer):
                    raise MalformedPolygon("hole not inside outer ring")
                nxt = h[(i + 1) % len(h)]
                mid = ((v[0] + nxt[0]) / 2.0, (v[1] + nxt[1]) / 2.0)
                if not point_in_ring(*mid, outer) and not point_on_ring(*mid, outer):
                    raise MalformedPolygon("hole edge leaves the outer ring")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)

    @classmethod
    def from_rect(cls, x0: float, y0: float, x1: float, y1: float) -> "RectilinearPolygon":
        if not (x0 < x1 and y0 < y1):
            raise MalformedPolygon("rectangle needs positive extent")
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    def area(self) -> float:
        return math.fsum([signed_area(self.outer)] + [signed_area(h) for h in self.holes])

    def contains(self, x: float, y: float) -> bool:
        if not point_in_ring(x, y, self.outer):
            return False
        return not any(point_in_ring(x, y, h) for h in self.holes)

    def rings(self) -> list[Ring]:
        return [self.outer, *self.holes]

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.outer]
        ys = [p[1] for p in self.outer]
        return min(xs), min(ys), max(xs), max(ys)


PolygonSet = tuple[RectilinearPolygon, ...]


def set_area(polys: Iterable[RectilinearPolygon]) -> float:
    return math.fsum(p.area() for p in polys)


def set_contains(polys: Iterable[RectilinearPolygon], x: float, y: float) -> bool:
    # regions are disjoint, so membership is the even-odd parity over all rings
    return any(p.contains(x, y) for p in polys)


def _merged_coords(values: Iterable[float]) -> np.ndarray:
    arr = np.array(sorted(set(float(v) for v in values)), dtype=np.float64)
    if len(arr) < 2:
        return arr
    keep = [arr[0]]
    for v in arr[1:]:
        if v - keep[-1] > _COORD_MERGE_TOL:
            keep.append(v)
    return np.array(keep, dtype=np.float64)


def _classify_cells(polys: Sequence[RectilinearPolygon], xc: np.ndarray, yc: np.ndarray) -> np.ndarray:
    """Even-odd membership of every (xc[i], yc[j]) center; shape (len(xc), len(yc))."""
    inside = np.zeros((len(xc), len(yc)), dtype=bool)
    for poly in polys:
        for ring in poly.rings():
            n = len(ring)
            for i in range(n):
                x0, y0 = ring[i]
                x1, y1 = ring[(i + 1) % n]
                if x0 != x1:
                    continue
                straddle = (y0 > yc) != (y1 > yc)  # (ny,)
                left_of = xc < x0  # (nx,)
                inside ^= np.outer(left_of, straddle)
    return inside


# directions used by the boundary walk, as (dx, dy) in cell-vertex index space
_LEFT_TURN = {(1, 0): (0, 1), (0, 1): (-1, 0), (-1, 0): (0, -1), (0, -1): (1, 0)}


def _split_revisits(ring: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Split a closed walk at revisited vertices into simple sub-rings.

    A region whose hole touches the outer boundary at a single point is
    traced as one walk passing through the pinch vertex twice; splitting
    there recovers one simple ring per loop.
    """
    seen: dict[tuple[int, int], int] = {}
    for pos, v in enumerate(ring):
        if v in seen:
            p = seen[v]
            inner = ring[p:pos]
            rest = ring[:p] + ring[pos:]
            return _split_revisits(inner) + _split_revisits(rest)
        seen[v] = pos
    return [ring]


def _trace_component(edges: dict[tuple[int, int], list[tuple[int, int]]]) -> list[list[tuple[int, int]]]:
    """Link directed boundary edges (inside on the left) into closed rings."""
    outgoing = {v: sorted(dsts) for v, dsts in edges.items()}
    used: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    rings: list[list[tuple[int, int]]] = []
    for start in sorted(outgoing):
        for first_dst in outgoing[start]:
            if (start, first_dst) in used:
                continue
            ring = [start]
            cur, dst = start, first_dst
            while True:
                used.add((cur, dst))
                ring.append(dst)
                prev_dir = (dst[0] - cur[0], dst[1] - cur[1])
                cur = dst
                options = outgoing.get(cur, [])
                if len(options) == 1:
                    dst = options[0]
                else:
                    # four-way corner: take the leftmost turn so that two
                    # lobes meeting at a point become two separate rings
                    want = _LEFT_TURN[prev_dir]
                    dst = next(
                        (c for c in options if (c[0] - cur[0], c[1] - cur[1]) == want),
                        options[0],
                    )
                if (cur, dst) in used:
                    break
            rings.extend(_split_revisits(ring[:-1]))  # last vertex repeats the start
    return rings


def _extract_polygons(xs: np.ndarray, ys: np.ndarray, inside: np.ndarray) -> PolygonSet:
    """Rebuild canonical regions from per-cell membership on the grid."""
    nx, ny = inside.shape
    labels = np.full((nx, ny), -1, dtype=np.int32)
    n_comp = 0
    for i0 in range(nx):
        for j0 in range(ny):
            if not inside[i0, j0] or labels[i0, j0] >= 0:
                continue
            stack = [(i0, j0)]
            labels[i0, j0] = n_comp
            while stack:
                i, j = stack.pop()
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    a, b = i + di, j + dj
                    if 0 <= a < nx and 0 <= b < ny and inside[a, b] and labels[a, b] < 0:
                        labels[a, b] = n_comp
                        stack.append((a, b))
            n_comp += 1

    regions: list[RectilinearPolygon] = []
    for comp in range(n_comp):
        edges: dict[tuple[int, int], list[tuple[int, int]]] = {}

        def add_edge(a: tuple[int, int], b: tuple[int, int]) -> None:
            edges.setdefault(a, []).append(b)

        cells = [(int(i), int(j)) for i, j in np.argwhere(labels == comp)]
        for i, j in cells:
            if j == 0 or not inside[i, j - 1]:
                add_edge((i, j), (i + 1, j))  # south edge, inside above
            if j == ny - 1 or not inside[i, j + 1]:
                add_edge((i + 1, j + 1), (i, j + 1))  # north edge, inside below
            if i == 0 or not inside[i - 1, j]:
                add_edge((i, j + 1), (i, j))  # west edge, inside to the east
            if i == nx - 1 or not inside[i + 1, j]:
                add_edge((i + 1, j), (i + 1, j + 1))  # east edge, inside to the west

        index_rings = _trace_component(edges)
        outer: Ring | None = None
        holes: list[Ring] = []
        for idx_ring in index_rings:
            coords = tuple((float(xs[i]), float(ys[j])) for i, j in idx_ring)
            coords = _merge_collinear(coords)
            if signed_area(coords) > 0:
                outer = coords
            else:
                holes.append(coords)
        if outer is None:
            raise MalformedPolygon("component traced without an outer ring")
        regions.append(RectilinearPolygon(outer, tuple(holes)))

    return tuple(sorted(regions, key=lambda p: p.outer[0]))


def _overlay(a: Sequence[RectilinearPolygon], b: Sequence[RectilinearPolygon], op: str) -> PolygonSet:
    coords_x: list[float] = []
    coords_y: list[float] = []
    for poly in (*a, *b):
        for ring in poly.rings():
            for x, y in ring:
                coords_x.append(x)
                coords_y.append(y)
    if not coords_x:
        return ()
    xs = _merged_coords(coords_x)
    ys = _merged_coords(coords_y)
    if len(xs) < 2 or len(ys) < 2:
        return ()
    xc = (xs[:-1] + xs[1:]) / 2.0
    yc = (ys[:-1] + ys[1:]) / 2.0
    in_a = _classify_cells(tuple(a), xc, yc)
    in_b = _classify_cells(tuple(b), xc, yc)
    if op == "union":
        inside = in_a | in_b
    elif op == "difference":
        inside = in_a & ~in_b
    elif op == "intersection":
        inside = in_a & in_b
    else:  # pragma: no cover
        raise ValueError(op)
    if not inside.any():
        return ()
    return _extract_polygons(xs, ys, inside)


def rect_union(a: Iterable[RectilinearPolygon], b: Iterable[RectilinearPolygon]) -> PolygonSet:
    """Exact union of two rectilinear polygon sets, canonicalized."""
    return _overlay(tuple(a), tuple(b), "union")


def rect_difference(a: Iterable[RectilinearPolygon], b: Iterable[RectilinearPolygon]) -> PolygonSet:
    """Exact difference a \\ b of two rectilinear polygon sets, canonicalized."""
    return _overlay(tuple(a), tuple(b), "difference")


def rect_intersection(a: Iterable[RectilinearPolygon], b: Iterable[RectilinearPolygon]) -> PolygonSet:
    """Exact intersection of two rectilinear polygon sets, canonicalized."""
    return _overlay(tuple(a), tuple(b), "intersection")

"""Watertight boundary mesh extraction and OBJ serialization.

The distinct x/y/z coordinates of a model's boxes cut space into cells;
each cell is entirely inside or outside the solid, so the boundary is the
set of faces between differing cells. Each emitted quad is one cell face
split into two triangles, wound counter-clockwise seen from outside.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass

from .errors import EmptyModel
from .massing import Box3, MassingModel, OpKind

_DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class TriangleMesh:
    vertices: tuple[tuple[float, float, float], ...]
    triangles: tuple[tuple[int, int, int], ...]


def _grid_coords(model: MassingModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    axes = []
    for axis in range(3):
        vals = sorted({b.min[axis] for b in model.boxes()} | {b.max[axis] for b in model.boxes()})
        merged = [vals[0]]
        for v in vals[1:]:
            if v - merged[-1] > 1e-12:
                merged.append(v)
        axes.append(np.array(merged, dtype=np.float64))
    return tuple(axes)


def _classify_cells(model: MassingModel, xs: np.ndarray, ys: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Inside/outside for every grid cell, by walking the op sequence."""
    xc = (xs[:-1] + xs[1:]) / 2.0
    yc = (ys[:-1] + ys[1:]) / 2.0
    zc = (zs[:-1] + zs[1:]) / 2.0
    X, Y, Z = np.meshgrid(xc, yc, zc, indexing="ij")

    def in_box(b: Box3) -> np.ndarray:
        return (
            (X > b.min[0]) & (X < b.max[0])
            & (Y > b.min[1]) & (Y < b.max[1])
            & (Z > b.min[2]) & (Z < b.max[2])
        )

    inside = in_box(model.base)
    for op in model.ops:
        if op.kind is OpKind.ADD:
            inside |= in_box(op.block)
        else:
            inside &= ~in_box(op.block)
    return inside


def export_mesh(model: MassingModel) -> TriangleMesh:
    """Extract the watertight boundary mesh of the model's solid."""
    xs, ys, zs = _grid_coords(model)
    inside = _classify_cells(model, xs, ys, zs)
    if not inside.any():
        raise EmptyModel("model encloses no volume")

    vertex_index: dict[tuple[int, int, int], int] = {}
    vertices: list[tuple[float, float, float]] = []
    triangles: list[tuple[int, int, int]] = []

    def vid(x: float, y: float, z: float) -> int:
        key = (round(x / _DEDUP_TOL), round(y / _DEDUP_TOL), round(z / _DEDUP_TOL))
        idx = vertex_index.get(key)
        if idx is None:
            idx = len(vertices)
            vertex_index[key] = idx
            vertices.append((x, y, z))
        return idx

    def emit_quad(corners: list[tuple[float, float, float]]) -> None:
        ids = [vid(*c) for c in corners]
        triangles.append((ids[0], ids[1], ids[2]))
        triangles.append((ids[0], ids[2], ids[3]))

    nx, ny, nz = inside.shape
    padded = np.zeros((nx + 2, ny + 2, nz + 2), dtype=bool)
    padded[1:-1, 1:-1, 1:-1] = inside

    # x-faces: between cell (i-1) and (i) in padded space
    for i in range(nx + 1):
        diff = padded[i, 1:-1, 1:-1] != padded[i + 1, 1:-1, 1:-1]
        for j, k in np.argwhere(diff):
            x = float(xs[i])
            y0, y1 = float(ys[j]), float(ys[j + 1])
            z0, z1 = float(zs[k]), float(zs[k + 1])
            if padded[i, j + 1, k + 1]:  # solid on the -x side, normal +x
                emit_quad([(x, y0, z0), (x, y1, z0), (x, y1, z1), (x, y0, z1)])
            else:  # solid on the +x side, normal -x
                emit_quad([(x, y0, z0), (x, y0, z1), (x, y1, z1), (x, y1, z0)])
    # y-faces
    for j in range(ny + 1):
        diff = padded[1:-1, j, 1:-1] != padded[1:-1, j + 1, 1:-1]
        for i, k in np.argwhere(diff):
            y = float(ys[j])
            x0, x1 = float(xs[i]), float(xs[i + 1])
            z0, z1 = float(zs[k]), float(zs[k + 1])
            if padded[i + 1, j, k + 1]:  # normal +y
                emit_quad([(x0, y, z0), (x0, y, z1), (x1, y, z1), (x1, y, z0)])
            else:  # normal -y
                emit_quad([(x0, y, z0), (x1, y, z0), (x1, y, z1), (x0, y, z1)])
    # z-faces
    for k in range(nz + 1):
        diff = padded[1:-1, 1:-1, k] != padded[1:-1, 1:-1, k + 1]
        for i, j in np.argwhere(diff):
            z = float(zs[k])
            x0, x1 = float(xs[i]), float(xs[i + 1])
            y0, y1 = float(ys[j]), float(ys[j + 1])
            if padded[i + 1, j + 1, k]:  # normal +z
                emit_quad([(x0, y0, z), (x1, y0, z), (x1, y1, z), (x0, y1, z)])
            else:  # normal -z
                emit_quad([(x0, y0, z), (x0, y1, z), (x1, y1, z), (x1, y0, z)])

    return TriangleMesh(tuple(vertices), tuple(triangles))


def divergence_volume(mesh: TriangleMesh) -> float:
    """Signed volume of a closed mesh via the divergence theorem."""
    terms = []
    v = mesh.vertices
    for a, b, c in mesh.triangles:
        ax, ay, az = v[a]
        bx, by, bz = v[b]
        cx, cy, cz = v[c]
        det = (
            ax * (by * cz - bz * cy)
            - ay * (bx * cz - bz * cx)
            + az * (bx * cy - by * cx)
        )
        terms.append(det / 6.0)
    return math.fsum(terms)


def euler_characteristic(mesh: TriangleMesh) -> int:
    edges = set()
    for a, b, c in mesh.triangles:
        for p, q in ((a, b), (b, c), (c, a)):
            edges.add((min(p, q), max(p, q)))
    return len(mesh.vertices) - len(edges) + len(mesh.triangles)


def is_watertight(mesh: TriangleMesh) -> bool:
    """Every undirected edge is shared by an even number of faces, twice
    for manifold solids."""
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in mesh.triangles:
        for p, q in ((a, b), (b, c), (c, a)):
            key = (min(p, q), max(p, q))
            counts[key] = counts.get(key, 0) + 1
    return all(n % 2 == 0 for n in counts.values())


def obj_bytes(mesh: TriangleMesh, *, window_quads: list[list[tuple[float, float, float]]] | None = None) -> bytes:
    """Serialize to Wavefront OBJ: Y-up, meters, CCW winding.

    Internal coordinates are z-up; export maps (x, y, z) -> (x, z, -y),
    a rotation, so winding survives. Optional window rectangles are
    emitted as a second object group.
    """
    lines = ["o massing"]
    for x, y, z in mesh.vertices:
        lines.append(f"v {_fmt(x)} {_fmt(z)} {_fmt(-y)}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    if window_quads:
        lines.append("o windows")
        offset = len(mesh.vertices)
        for quad in window_quads:
            for x, y, z in quad:
                lines.append(f"v {_fmt(x)} {_fmt(z)} {_fmt(-y)}")
            lines.append(f"f {offset + 1} {offset + 2} {offset + 3} {offset + 4}")
            offset += 4
    return ("\n".join(lines) + "\n").encode()


def _fmt(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return repr(v)

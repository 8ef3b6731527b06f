"""Line-art conditioning images from facade models.

A face-identifier buffer is rasterized with a depth test: every mesh
quad maps to the plane it lies on (axis, coordinate, normal sign), so
coplanar quads share an identifier and interior grid lines vanish. A
pixel becomes an edge where adjacent identifiers differ — silhouette and
crease lines. Window rectangles are then drawn as closed outlines (not
depth-tested, so every placed window keeps a complete outline). Output
is black-on-white, suitable as an edge-conditioning input for an
external image generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from PIL import Image

from .errors import DegenerateCamera
from .facade import FacadeModel
from .mesh import TriangleMesh, export_mesh


class CameraKind(str, Enum):
    ORTHOGRAPHIC = "orthographic"
    PERSPECTIVE = "perspective"


@dataclass(frozen=True)
class CameraSpec:
    kind: CameraKind = CameraKind.ORTHOGRAPHIC
    azimuth: float = 30.0  # degrees clockwise from north
    elevation: float = 20.0  # degrees above the horizon
    distance: float = 60.0  # used by the perspective projection
    resolution: int = 512
    scale: float | None = None  # meters per pixel; fitted when absent
    pan: tuple[float, float] = (0.0, 0.0)  # image-space offset in pixels

    def to_document(self) -> dict:
        return {
            "kind": self.kind.value,
            "azimuth": self.azimuth,
            "elevation": self.elevation,
            "distance": self.distance,
            "resolution": self.resolution,
            "scale": self.scale,
            "pan": list(self.pan),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "CameraSpec":
        return cls(
            kind=CameraKind(doc.get("kind", "orthographic")),
            azimuth=float(doc.get("azimuth", 30.0)),
            elevation=float(doc.get("elevation", 20.0)),
            distance=float(doc.get("distance", 60.0)),
            resolution=int(doc.get("resolution", 512)),
            scale=doc.get("scale"),
            pan=tuple(doc.get("pan", (0.0, 0.0))),
        )


def _camera_basis(camera: CameraSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(right, up, view) unit vectors; view points from the camera into
    the scene. Internal coordinates are z-up, y north."""
    az = math.radians(camera.azimuth)
    el = math.radians(camera.elevation)
    toward_camera = np.array(
        (math.sin(az) * math.cos(el), math.cos(az) * math.cos(el), math.sin(el))
    )
    view = -toward_camera
    world_up = np.array((0.0, 0.0, 1.0))
    right = np.cross(view, world_up)
    norm = np.linalg.norm(right)
    if norm < 1e-12:  # looking straight down/up: pick north as image up
        right = np.array((1.0, 0.0, 0.0)) * (1.0 if camera.elevation > 0 else -1.0)
    else:
        right = right / norm
    up = np.cross(right, view)
    up = up / np.linalg.norm(up)
    return right, up, view


def _face_plane_ids(mesh: TriangleMesh) -> np.ndarray:
    """Identifier per triangle: coplanar same-facing triangles share one."""
    ids = np.zeros(len(mesh.triangles), dtype=np.int32)
    keymap: dict[tuple, int] = {}
    verts = np.array(mesh.vertices)
    for t, (a, b, c) in enumerate(mesh.triangles):
        pa, pb, pc = verts[a], verts[b], verts[c]
        normal = np.cross(pb - pa, pc - pa)
        axis = int(np.argmax(np.abs(normal)))
        sign = 1 if normal[axis] > 0 else -1
        coord = round(float(pa[axis]) / 1e-9)
        key = (axis, coord, sign)
        if key not in keymap:
            keymap[key] = len(keymap) + 1  # 0 is background
        ids[t] = keymap[key]
    return ids


def _project(points: np.ndarray, camera: CameraSpec, center: np.ndarray, scale: float) -> np.ndarray:
    right, up, view = _camera_basis(camera)
    rel = points - center
    if camera.kind is CameraKind.PERSPECTIVE:
        depth = camera.distance + rel @ view
        if np.any(depth <= 1e-6):
            raise DegenerateCamera("geometry behind the perspective camera")
        f = camera.distance
        sx = (rel @ right) * (f / depth) / scale
        sy = (rel @ up) * (f / depth) / scale
    else:
        sx = (rel @ right) / scale
        sy = (rel @ up) / scale
    res = camera.resolution
    px = res / 2.0 + sx + camera.pan[0]
    py = res / 2.0 - sy - camera.pan[1]
    depth_out = rel @ view
    return np.column_stack((px, py, depth_out))


def _fit_scale(points: np.ndarray, camera: CameraSpec, center: np.ndarray) -> float:
    right, up, _ = _camera_basis(camera)
    rel = points - center
    extent = max(np.abs(rel @ right).max(), np.abs(rel @ up).max())
    if extent <= 0:
        raise DegenerateCamera("model projects to a point")
    return extent / (0.45 * camera.resolution)


def render_conditioning(facade_model: FacadeModel, camera: CameraSpec | None = None) -> Image.Image:
    """Render the facade model to a binary edge image (black on white)."""
    camera = camera or CameraSpec()
    if camera.resolution <= 0:
        raise DegenerateCamera("resolution must be positive")
    if camera.scale is not None and camera.scale <= 0:
        raise DegenerateCamera("scale must be positive")

    mesh = export_mesh(facade_model.model)
    verts = np.array(mesh.vertices, dtype=np.float64)
    center = (verts.min(axis=0) + verts.max(axis=0)) / 2.0
    scale = camera.scale if camera.scale is not None else _fit_scale(verts, camera, center)

    projected = _project(verts, camera, center, scale)
    ids = _face_plane_ids(mesh)
    res = camera.resolution
    id_buffer = np.zeros((res, res), dtype=np.int32)
    depth_buffer = np.full((res, res), np.inf)  # depth grows away from the camera

    for t, (a, b, c) in enumerate(mesh.triangles):
        _rasterize_triangle(projected[a], projected[b], projected[c], ids[t], id_buffer, depth_buffer)

    edges = np.zeros((res, res), dtype=bool)
    edges[:, 1:] |= id_buffer[:, 1:] != id_buffer[:, :-1]
    edges[1:, :] |= id_buffer[1:, :] != id_buffer[:-1, :]

    for quad in facade_model.window_quads():
        pts = _project(np.array(quad, dtype=np.float64), camera, center, scale)
        for k in range(4):
            _draw_line(edges, pts[k], pts[(k + 1) % 4])

    raster = np.where(edges, 0, 255).astype(np.uint8)
    return Image.fromarray(raster, "L")


def _rasterize_triangle(
    p0: np.ndarray, p1: np.ndarray, p2: np.ndarray, face_id: int,
    id_buffer: np.ndarray, depth_buffer: np.ndarray,
) -> None:
    res = id_buffer.shape[0]
    xs = np.array([p0[0], p1[0], p2[0]])
    ys = np.array([p0[1], p1[1], p2[1]])
    x_min = max(0, int(math.floor(xs.min())))
    x_max = min(res - 1, int(math.ceil(xs.max())))
    y_min = max(0, int(math.floor(ys.min())))
    y_max = min(res - 1, int(math.ceil(ys.max())))
    if x_min > x_max or y_min > y_max:
        return
    area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
    if abs(area) < 1e-12:
        return  # edge-on triangle covers no pixels
    gx, gy = np.meshgrid(
        np.arange(x_min, x_max + 1) + 0.5, np.arange(y_min, y_max + 1) + 0.5
    )
    w0 = ((p1[0] - p0[0]) * (gy - p0[1]) - (p1[1] - p0[1]) * (gx - p0[0])) / area
    w1 = ((p2[0] - p1[0]) * (gy - p1[1]) - (p2[1] - p1[1]) * (gx - p1[0])) / area
    w2 = ((p0[0] - p2[0]) * (gy - p2[1]) - (p0[1] - p2[1]) * (gx - p2[0])) / area
    inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0) if area > 0 else (w0 <= 0) & (w1 <= 0) & (w2 <= 0)
    if not inside.any():
        return
    # barycentric coordinates relative to (p2, p0, p1) order of the edge functions
    depth = w0 * p2[2] + w1 * p0[2] + w2 * p1[2]
    window = (slice(y_min, y_max + 1), slice(x_min, x_max + 1))
    closer = inside & (depth < depth_buffer[window])
    depth_buffer[window][closer] = depth[closer]
    id_buffer[window][closer] = face_id


def _draw_line(edges: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    res = edges.shape[0]
    steps = max(1, int(math.ceil(max(abs(b[0] - a[0]), abs(b[1] - a[1])))) * 2)
    ts = np.linspace(0.0, 1.0, steps + 1)
    px = np.round(a[0] + (b[0] - a[0]) * ts - 0.5).astype(int)
    py = np.round(a[1] + (b[1] - a[1]) * ts - 0.5).astype(int)
    keep = (px >= 0) & (px < res) & (py >= 0) & (py < res)
    edges[py[keep], px[keep]] = True

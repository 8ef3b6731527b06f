"""Parametric massing models built from axis-aligned box addition/subtraction.

A model is a base box plus an ordered list of add/subtract box operations:
all additions first (their union with the base forms the initial solid),
then all subtractions carve into it. Evaluation is exact: horizontal
cross-sections are rectilinear polygon booleans, volume is a slab
decomposition over the distinct z-coordinates, both deterministic
functions of the recorded operations.

Generation follows the block-manipulation procedure: addition blocks are
anchored on the base's bottom outline, then translated parallel to their
edge and along its outward normal and scaled about their own anchor;
subtraction blocks are centered on UV-grid points of the base's faces and
nudged inward until a quarter of their volume overlaps the base, so every
cut is visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .errors import DegenerateModel, EmptyModel, InvalidParams
from .geometry import RectilinearPolygon, rect_difference, rect_union, set_area
from .rng import SplitMix64

Vec3 = tuple[float, float, float]

SCHEMA_VERSION = "1"

DEFAULT_FLOOR_HEIGHT = 3.0
SLICE_OFFSET = 0.01  # sample just above each level to dodge coincident faces
_VOLUME_EPS = 1e-9
_MAX_RETRIES = 64


@dataclass(frozen=True)
class Box3:
    """Axis-aligned box with strictly positive extent on all axes."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        lo = tuple(float(v) for v in self.min)
        hi = tuple(float(v) for v in self.max)
        for axis in range(3):
            if not lo[axis] < hi[axis]:
                raise InvalidParams(f"box must have positive extent on axis {axis}: {lo} {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @classmethod
    def from_center(cls, center: Vec3, dims: Vec3) -> "Box3":
        return cls(
            tuple(c - d / 2.0 for c, d in zip(center, dims)),
            tuple(c + d / 2.0 for c, d in zip(center, dims)),
        )

    def dims(self) -> Vec3:
        return tuple(self.max[i] - self.min[i] for i in range(3))

    def volume(self) -> float:
        dx, dy, dz = self.dims()
        return dx * dy * dz

    def footprint(self) -> RectilinearPolygon:
        return RectilinearPolygon.from_rect(self.min[0], self.min[1], self.max[0], self.max[1])

    def spans_z(self, z: float) -> bool:
        return self.min[2] < z < self.max[2]

    def to_document(self) -> dict:
        return {"min": list(self.min), "max": list(self.max)}

    @classmethod
    def from_document(cls, doc: dict) -> "Box3":
        return cls(tuple(doc["min"]), tuple(doc["max"]))


class OpKind(str, Enum):
    ADD = "add"
    SUBTRACT = "subtract"


@dataclass(frozen=True)
class MassingOp:
    kind: OpKind
    block: Box3

    def to_document(self) -> dict:
        return {"kind": self.kind.value, "block": self.block.to_document()}

    @classmethod
    def from_document(cls, doc: dict) -> "MassingOp":
        return cls(OpKind(doc["kind"]), Box3.from_document(doc["block"]))


@dataclass(frozen=True)
class MassingParams:
    """Generation parameters; W/D/H ranges map to block x/y/z extents."""

    base_dims: Vec3 = (16.0, 12.0, 12.0)
    n_add: int = 2
    n_sub: int = 3
    w_range: tuple[float, float] = (2.0, 8.0)
    d_range: tuple[float, float] = (2.0, 8.0)
    h_range: tuple[float, float] = (3.0, 12.0)
    translate_range: tuple[float, float] = (-2.0, 2.0)
    scale_range: tuple[float, float] = (0.6, 1.4)
    uv_grid: tuple[int, int] = (4, 4)
    min_volume_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if any(d <= 0 for d in self.base_dims):
            raise InvalidParams("base_dims must be positive")
        if self.n_add < 0 or self.n_sub < 0:
            raise InvalidParams("op counts must be non-negative")
        for name in ("w_range", "d_range", "h_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise InvalidParams(f"{name} must satisfy 0 < min <= max")
        for name in ("translate_range", "scale_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidParams(f"{name} must satisfy min <= max")
        if self.scale_range[0] <= 0:
            raise InvalidParams("scale_range min must be positive")
        if self.uv_grid[0] < 2 or self.uv_grid[1] < 2:
            raise InvalidParams("uv_grid counts must be >= 2")
        if not (0 < self.min_volume_fraction <= 1):
            raise InvalidParams("min_volume_fraction must be in (0, 1]")
        if not (0 <= self.seed < 2 ** 64):
            raise InvalidParams("seed must be a 64-bit unsigned integer")

    def to_document(self) -> dict:
        return {
            "base_dims": list(self.base_dims),
            "n_add": self.n_add,
            "n_sub": self.n_sub,
            "w_range": list(self.w_range),
            "d_range": list(self.d_range),
            "h_range": list(self.h_range),
            "translate_range": list(self.translate_range),
            "scale_range": list(self.scale_range),
            "uv_grid": list(self.uv_grid),
            "min_volume_fraction": self.min_volume_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "MassingParams":
        return cls(
            base_dims=tuple(doc["base_dims"]),
            n_add=int(doc["n_add"]),
            n_sub=int(doc["n_sub"]),
            w_range=tuple(doc["w_range"]),
            d_range=tuple(doc["d_range"]),
            h_range=tuple(doc["h_range"]),
            translate_range=tuple(doc["translate_range"]),
            scale_range=tuple(doc["scale_range"]),
            uv_grid=tuple(int(v) for v in doc["uv_grid"]),
            min_volume_fraction=float(doc["min_volume_fraction"]),
            seed=int(doc["seed"]),
        )


@dataclass(frozen=True)
class MassingModel:
    """Base box plus ordered add/subtract operations; immutable."""

    base: Box3
    ops: tuple[MassingOp, ...] = ()
    seed: int = 0
    params_echo: MassingParams | None = None

    def boxes(self) -> Iterator[Box3]:
        yield self.base
        for op in self.ops:
            yield op.block

    def z_extent(self) -> tuple[float, float]:
        tops = [self.base.max[2]] + [op.block.max[2] for op in self.ops if op.kind is OpKind.ADD]
        bottoms = [self.base.min[2]] + [op.block.min[2] for op in self.ops if op.kind is OpKind.ADD]
        return min(bottoms), max(tops)

    def to_document(self) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "base": self.base.to_document(),
            "ops": [op.to_document() for op in self.ops],
            "seed": self.seed,
        }
        doc["params"] = self.params_echo.to_document() if self.params_echo else None
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "MassingModel":
        params = doc.get("params")
        return cls(
            base=Box3.from_document(doc["base"]),
            ops=tuple(MassingOp.from_document(d) for d in doc["ops"]),
            seed=int(doc["seed"]),
            params_echo=MassingParams.from_document(params) if params else None,
        )


@dataclass(frozen=True)
class SectionalProfile:
    """Horizontal cross-section at height z: disjoint rectilinear regions."""

    z: float
    regions: tuple[RectilinearPolygon, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(sorted(self.regions, key=lambda p: p.outer[0])))

    @property
    def is_empty(self) -> bool:
        return not self.regions

    def area(self) -> float:
        return set_area(self.regions)


def evaluate_slice(model: MassingModel, z: float) -> SectionalProfile:
    """Exact 2D cross-section of the model at height z.

    Starts from the base footprint when z is strictly inside the base's
    z-interval, then applies each operation in order as a 2D union or
    difference when its block's z-interval strictly contains z.
    """
    regions: tuple[RectilinearPolygon, ...] = ()
    if model.base.spans_z(z):
        regions = (model.base.footprint(),)
    for op in model.ops:
        if not op.block.spans_z(z):
            continue
        block = (op.block.footprint(),)
        if op.kind is OpKind.ADD:
            regions = rect_union(regions, block)
        else:
            regions = rect_difference(regions, block)
    return SectionalProfile(z, regions)


def volume(model: MassingModel) -> float:
    """Exact volume by slab decomposition over the distinct z-coordinates."""
    zs = sorted({b.min[2] for b in model.boxes()} | {b.max[2] for b in model.boxes()})
    slabs = []
    for z0, z1 in zip(zs[:-1], zs[1:]):
        if z1 - z0 <= 0:
            continue
        mid = (z0 + z1) / 2.0
        slabs.append(evaluate_slice(model, mid).area() * (z1 - z0))
    return math.fsum(slabs)


def extract_floor_profiles(
    model: MassingModel, floor_height: float = DEFAULT_FLOOR_HEIGHT
) -> list[tuple[int, SectionalProfile, bool]]:
    """Slice the model at every floor level and flag representative levels.

    Levels are sampled at k * floor_height + SLICE_OFFSET. Consecutive
    levels with identical profiles form a group. With three or more
    groups the representatives are the lowest level, the highest level,
    and the level with the largest footprint-area change from its
    predecessor (ties resolved to the lower level); with fewer groups,
    the first level of each group is the representative.
    """
    if floor_height <= 0:
        raise InvalidParams("floor_height must be positive")
    _, zmax = model.z_extent()
    levels: list[tuple[int, SectionalProfile]] = []
    k = 0
    while k * floor_height + SLICE_OFFSET < zmax:
        profile = evaluate_slice(model, k * floor_height + SLICE_OFFSET)
        if not profile.is_empty:
            levels.append((k, profile))
        k += 1
    if not levels:
        raise EmptyModel("model has no sliceable floor levels")

    groups: list[list[int]] = []
    for idx, (_, profile) in enumerate(levels):
        if groups and levels[groups[-1][-1]][1].regions == profile.regions:
            groups[-1].append(idx)
        else:
            groups.append([idx])

    reps: set[int] = set()
    if len(groups) < 3:
        reps = {levels[g[0]][0] for g in groups}
    else:
        reps.add(levels[0][0])
        reps.add(levels[-1][0])
        best_idx, best_change = None, -1.0
        for idx in range(1, len(levels)):
            change = abs(levels[idx][1].area() - levels[idx - 1][1].area())
            if change > best_change + 1e-12:
                best_idx, best_change = idx, change
        reps.add(levels[best_idx][0])

    return [(k, profile, k in reps) for k, profile in levels]


def _edge_frame(base: Box3, edge: int) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
    """Bottom-outline edge -> (start, direction, outward normal), CCW order."""
    x0, y0 = base.min[0], base.min[1]
    x1, y1 = base.max[0], base.max[1]
    frames = [
        ((x0, y0), (1.0, 0.0), (0.0, -1.0)),   # south
        ((x1, y0), (0.0, 1.0), (1.0, 0.0)),    # east
        ((x1, y1), (-1.0, 0.0), (0.0, 1.0)),   # north
        ((x0, y1), (0.0, -1.0), (-1.0, 0.0)),  # west
    ]
    return frames[edge]


def _sample_add(rng: SplitMix64, params: MassingParams, base: Box3) -> MassingOp:
    # draw order: dims W, D, H; edge index; edge parameter; translation
    # parallel then perpendicular; scale
    w = rng.uniform(*params.w_range)
    d = rng.uniform(*params.d_range)
    h = rng.uniform(*params.h_range)
    edge = rng.randrange(4)
    t = rng.random()
    t_par = rng.uniform(*params.translate_range)
    t_perp = rng.uniform(*params.translate_range)
    s = rng.uniform(*params.scale_range)

    start, direction, normal = _edge_frame(base, edge)
    edge_len = base.max[0] - base.min[0] if direction[0] != 0 else base.max[1] - base.min[1]
    ax = start[0] + direction[0] * (t * edge_len + t_par) + normal[0] * t_perp
    ay = start[1] + direction[1] * (t * edge_len + t_par) + normal[1] * t_perp
    # blocks stay grounded: scaling is about the anchor, which sits at z=0
    block = Box3(
        (ax - w * s / 2.0, ay - d * s / 2.0, 0.0),
        (ax + w * s / 2.0, ay + d * s / 2.0, h * s),
    )
    return MassingOp(OpKind.ADD, block)


def _face_point(base: Box3, face: int, ui: int, vi: int, uv: tuple[int, int]) -> Vec3:
    nu, nv = uv
    fu = ui / (nu - 1)
    fv = vi / (nv - 1)

    def lerp(axis: int, f: float) -> float:
        return base.min[axis] + f * (base.max[axis] - base.min[axis])

    if face == 0:
        return (base.min[0], lerp(1, fu), lerp(2, fv))
    if face == 1:
        return (base.max[0], lerp(1, fu), lerp(2, fv))
    if face == 2:
        return (lerp(0, fu), base.min[1], lerp(2, fv))
    if face == 3:
        return (lerp(0, fu), base.max[1], lerp(2, fv))
    if face == 4:
        return (lerp(0, fu), lerp(1, fv), base.min[2])
    return (lerp(0, fu), lerp(1, fv), base.max[2])


def _overlap_fraction(center: float, size: float, lo: float, hi: float) -> float:
    overlap = min(center + size / 2.0, hi) - max(center - size / 2.0, lo)
    return max(0.0, overlap) / size


def _clamp_inward(center: float, size: float, lo: float, hi: float, needed: float) -> float:
    """Minimal inward move of `center` so the 1D overlap fraction reaches
    `needed`, capped at the best achievable position."""
    if _overlap_fraction(center, size, lo, hi) >= needed:
        return center
    span = hi - lo
    best = (lo + hi) / 2.0 if size >= span else (lo + size / 2.0 if center < (lo + hi) / 2.0 else hi - size / 2.0)
    target_overlap = needed * size
    if center < (lo + hi) / 2.0:
        # overlap grows as center moves right: overlap = center + size/2 - lo
        candidate = lo + target_overlap - size / 2.0
        return min(max(center, candidate), best)
    candidate = hi - target_overlap + size / 2.0
    return max(min(center, candidate), best)


_SUB_MIN_INSIDE = 0.25  # fraction of a subtract block's volume kept inside the base

# face index -> axis of its normal
_FACE_AXIS = (0, 0, 1, 1, 2, 2)


def _sample_sub(rng: SplitMix64, params: MassingParams, base: Box3) -> MassingOp:
    # draw order: face, u, v, then dims W, D, H
    face = rng.randrange(6)
    ui = rng.randrange(params.uv_grid[0])
    vi = rng.randrange(params.uv_grid[1])
    w = rng.uniform(*params.w_range)
    d = rng.uniform(*params.d_range)
    h = rng.uniform(*params.h_range)

    center = list(_face_point(base, face, ui, vi, params.uv_grid))
    dims = (w, d, h)
    axis = _FACE_AXIS[face]
    tangent = [a for a in range(3) if a != axis]
    f_tangent = 1.0
    for a in tangent:
        f_tangent *= _overlap_fraction(center[a], dims[a], base.min[a], base.max[a])
    needed = _SUB_MIN_INSIDE / f_tangent if f_tangent > 0 else 1.0
    center[axis] = _clamp_inward(center[axis], dims[axis], base.min[axis], base.max[axis], min(needed, 1.0))
    return MassingOp(OpKind.SUBTRACT, Box3.from_center(tuple(center), dims))


def generate_massing(params: MassingParams) -> MassingModel:
    """Generate a model from seeded parameters; deterministic per seed.

    Addition blocks are drawn first (in index order), then subtraction
    blocks. Each subtraction must actually remove volume from the solid
    built so far; non-intersecting draws are retried. If the finished
    solid falls below min_volume_fraction of the base volume, the whole
    subtraction set is resampled, up to the retry budget.
    """
    base = Box3((0.0, 0.0, 0.0), params.base_dims)
    rng = SplitMix64(params.seed)

    adds = tuple(_sample_add(rng, params, base) for _ in range(params.n_add))
    floor_volume = params.min_volume_fraction * base.volume()

    for _ in range(_MAX_RETRIES):
        ops = list(adds)
        current = MassingModel(base, tuple(ops), params.seed, params)
        current_volume = volume(current)
        feasible = True
        for _ in range(params.n_sub):
            placed = None
            for _ in range(_MAX_RETRIES):
                op = _sample_sub(rng, params, base)
                trial = MassingModel(base, tuple(ops) + (op,), params.seed, params)
                trial_volume = volume(trial)
                if current_volume - trial_volume > _VOLUME_EPS:
                    placed = (op, trial, trial_volume)
                    break
            if placed is None:
                feasible = False
                break
            op, current, current_volume = placed
            ops.append(op)
        if feasible and current_volume >= floor_volume:
            return MassingModel(base, tuple(ops), params.seed, params)

    raise DegenerateModel(
        f"could not reach volume floor {floor_volume:.3f} within {_MAX_RETRIES} retries"
    )

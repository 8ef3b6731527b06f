"""Daylight-driven window placement and lifting windows onto the massing.

Window layouts are chosen by greedy max-coverage: candidates are window
positions on exterior walls at a fixed pitch; each greedy step adds the
candidate that newly lifts the most grid cells past the daylight
threshold. Because window contributions to the unclamped map are additive
(windows never occlude each other and the normalization constant is plan
independent), the per-candidate fields are computed once and summed
during the search. Search runs on a coarse 1 m evaluation grid; the
reported coverage comes from a final full-resolution map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DanglingWallReference, InfeasibleConstraints, InvalidParams
from .daylight import DaylightMap, SiteParams, compute_daylight_map
from .floorplan import FloorPlan, WindowSegment, boundary_edges, plan_from_profile, rasterize
from .massing import DEFAULT_FLOOR_HEIGHT, SLICE_OFFSET, MassingModel, evaluate_slice

DEFAULT_SILL = 0.9
DEFAULT_HEAD = 2.4
SEARCH_RESOLUTION = 1.0
_EPS = 1e-9


@dataclass(frozen=True)
class DaylightTarget:
    """Coverage goal: fraction of cells whose value reaches the threshold."""

    threshold: float = 0.25
    coverage_goal: float = 0.8

    def __post_init__(self):
        if not (0 < self.threshold <= 1):
            raise InvalidParams("threshold must be in (0, 1]")
        if not (0 <= self.coverage_goal <= 1):
            raise InvalidParams("coverage_goal must be in [0, 1]")

    def to_document(self) -> dict:
        return {"threshold": self.threshold, "coverage_goal": self.coverage_goal}

    @classmethod
    def from_document(cls, doc: dict) -> "DaylightTarget":
        return cls(float(doc.get("threshold", 0.25)), float(doc.get("coverage_goal", 0.8)))


@dataclass(frozen=True)
class PlacementConstraints:
    candidate_pitch: float = 0.5
    window_lengths: tuple[float, ...] = (1.0, 2.0, 3.0)
    max_wwr: float = 0.6  # glazed fraction of each facade edge
    min_gap: float = 0.5
    budget: int | None = None

    def __post_init__(self):
        if self.candidate_pitch <= 0:
            raise InvalidParams("candidate_pitch must be positive")
        if not self.window_lengths or any(l <= 0 for l in self.window_lengths):
            raise InvalidParams("window_lengths must be positive")
        if not (0 <= self.max_wwr <= 1):
            raise InvalidParams("max_wwr must be in [0, 1]")
        if self.min_gap <= 0:
            raise InvalidParams("min_gap must be positive")
        if self.budget is not None and self.budget < 0:
            raise InvalidParams("budget must be non-negative")
        object.__setattr__(self, "window_lengths", tuple(sorted(float(l) for l in self.window_lengths)))

    def to_document(self) -> dict:
        return {
            "candidate_pitch": self.candidate_pitch,
            "window_lengths": list(self.window_lengths),
            "max_wwr": self.max_wwr,
            "min_gap": self.min_gap,
            "budget": self.budget,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "PlacementConstraints":
        return cls(
            candidate_pitch=float(doc.get("candidate_pitch", 0.5)),
            window_lengths=tuple(doc.get("window_lengths", (1.0, 2.0, 3.0))),
            max_wwr=float(doc.get("max_wwr", 0.6)),
            min_gap=float(doc.get("min_gap", 0.5)),
            budget=doc.get("budget"),
        )


@dataclass(frozen=True)
class FacadeSpec:
    level_index: int
    windows: tuple[WindowSegment, ...]
    achieved_coverage: float
    sill: float = DEFAULT_SILL
    head: float = DEFAULT_HEAD

    def __post_init__(self):
        if not (0 <= self.achieved_coverage <= 1):
            raise InvalidParams("achieved_coverage must be in [0, 1]")
        if not (0 <= self.sill < self.head):
            raise InvalidParams("need 0 <= sill < head")

    def to_document(self) -> dict:
        return {
            "level": self.level_index,
            "windows": [
                {
                    "wall_ref": w.wall_index,
                    "offset": w.offset,
                    "length": w.length,
                    "transmittance": w.transmittance,
                }
                for w in self.windows
            ],
            "achieved_coverage": self.achieved_coverage,
            "sill": self.sill,
            "head": self.head,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "FacadeSpec":
        return cls(
            level_index=int(doc["level"]),
            windows=tuple(
                WindowSegment(
                    int(w["wall_ref"]), float(w["offset"]), float(w["length"]),
                    float(w.get("transmittance", 0.7)),
                )
                for w in doc["windows"]
            ),
            achieved_coverage=float(doc["achieved_coverage"]),
            sill=float(doc.get("sill", DEFAULT_SILL)),
            head=float(doc.get("head", DEFAULT_HEAD)),
        )


def coverage(daylight: DaylightMap, target: DaylightTarget) -> float:
    """Fraction of masked cells at or above the threshold; 0 when no cells."""
    mask = daylight.grid.mask
    total = int(mask.sum())
    if total == 0:
        return 0.0
    covered = int((daylight.values[mask] >= target.threshold - _EPS).sum())
    return covered / total


def enumerate_candidates(plan: FloorPlan, constraints: PlacementConstraints) -> list[WindowSegment]:
    """All placeable windows, ordered by (wall index, offset, length).

    Offsets step by the candidate pitch from each wall start; a candidate
    must fit on its wall and respect max_wwr if it were the only window.
    """
    candidates: list[WindowSegment] = []
    for wall_index, wall in enumerate(plan.exterior_walls):
        length_cap = constraints.max_wwr * wall.length
        k = 0
        while True:
            offset = k * constraints.candidate_pitch
            if offset + min(constraints.window_lengths) > wall.length + _EPS:
                break
            for win_len in constraints.window_lengths:
                if offset + win_len > wall.length + _EPS:
                    continue
                if win_len > length_cap + _EPS:
                    continue
                candidates.append(WindowSegment(wall_index, offset, win_len))
            k += 1
    return candidates


def check_constraints(
    windows: tuple[WindowSegment, ...], plan: FloorPlan, constraints: PlacementConstraints
) -> bool:
    """Post-hoc feasibility of a window set: per-wall ratio, gaps, budget."""
    if constraints.budget is not None and len(windows) > constraints.budget:
        return False
    by_wall: dict[int, list[WindowSegment]] = {}
    for win in windows:
        by_wall.setdefault(win.wall_index, []).append(win)
    for wall_index, wins in by_wall.items():
        wall = plan.exterior_walls[wall_index]
        glazed = sum(w.length for w in wins)
        if glazed > constraints.max_wwr * wall.length + _EPS:
            return False
        spans = sorted((w.offset, w.offset + w.length) for w in wins)
        for (_, end0), (start1, _) in zip(spans[:-1], spans[1:]):
            if start1 - end0 < constraints.min_gap - _EPS:
                return False
    return True


class CandidateEvaluator:
    """Precomputed per-candidate unclamped fields on an evaluation grid.

    The unclamped normalized map of a window set equals the sum of the
    single-window maps, so marginal coverage of any set is a vector sum.
    """

    def __init__(
        self,
        plan: FloorPlan,
        candidates: list[WindowSegment],
        site: SiteParams,
        resolution: float = SEARCH_RESOLUTION,
    ):
        self.plan = replace(plan, windows=(), grid_resolution=resolution)
        self.grid = rasterize(self.plan)
        self.mask = self.grid.mask
        self.candidates = candidates
        self.fields = []
        for win in candidates:
            single = replace(self.plan, windows=(win,))
            m = compute_daylight_map(single, site, grid=self.grid)
            self.fields.append(m.raw[self.mask])
        self.cell_count = int(self.mask.sum())

    def covered(self, chosen: list[int], threshold: float) -> int:
        if self.cell_count == 0:
            return 0
        total = np.zeros(self.cell_count, dtype=np.float64)
        for idx in chosen:
            total += self.fields[idx]
        return int((total >= threshold - _EPS).sum())

    def covered_with(self, base_field: np.ndarray, idx: int, threshold: float) -> int:
        return int(((base_field + self.fields[idx]) >= threshold - _EPS).sum())


def optimize_windows(
    plan: FloorPlan,
    target: DaylightTarget,
    constraints: PlacementConstraints,
    site: SiteParams,
    *,
    level_index: int = 0,
    sill: float = DEFAULT_SILL,
    head: float = DEFAULT_HEAD,
    evaluator: CandidateEvaluator | None = None,
) -> FacadeSpec:
    """Greedy max-coverage window selection against the daylight target.

    Each iteration adds the feasible candidate with the largest count of
    newly covered cells; ties prefer smaller glazing area, then lower
    candidate index. Stops when the goal is met on the evaluation grid,
    the budget is exhausted, or no candidate has positive gain. The
    returned coverage is recomputed on the plan's own resolution.
    """
    if plan.windows:
        plan = replace(plan, windows=())
    if constraints.max_wwr <= 0 and target.coverage_goal > 0:
        raise InfeasibleConstraints("max_wwr of 0 cannot reach a positive coverage goal")

    candidates = enumerate_candidates(plan, constraints)

    def finish(windows: tuple[WindowSegment, ...]) -> FacadeSpec:
        final_plan = replace(plan, windows=windows)
        final_map = compute_daylight_map(final_plan, site)
        return FacadeSpec(
            level_index=level_index,
            windows=tuple(sorted(windows, key=lambda w: (w.wall_index, w.offset, w.length))),
            achieved_coverage=coverage(final_map, target),
            sill=sill,
            head=head,
        )

    if not candidates or target.coverage_goal == 0:
        return finish(())

    ev = evaluator or CandidateEvaluator(plan, candidates, site)
    if ev.cell_count == 0:
        return finish(())
    goal_cells = target.coverage_goal * ev.cell_count - _EPS

    chosen: list[int] = []
    base_field = np.zeros(ev.cell_count, dtype=np.float64)
    current_covered = int((base_field >= target.threshold - _EPS).sum())

    while True:
        if constraints.budget is not None and len(chosen) >= constraints.budget:
            break
        if current_covered >= goal_cells:
            break
        best = None  # (gain, length, index)
        chosen_windows = tuple(ev.candidates[i] for i in chosen)
        for idx, win in enumerate(ev.candidates):
            if idx in chosen:
                continue
            if not check_constraints(chosen_windows + (win,), plan, constraints):
                continue
            gain = ev.covered_with(base_field, idx, target.threshold) - current_covered
            if gain <= 0:
                continue
            key = (-gain, win.length, idx)
            if best is None or key < best:
                best = key
        if best is None:
            break
        idx = best[2]
        chosen.append(idx)
        base_field += ev.fields[idx]
        current_covered = int((base_field >= target.threshold - _EPS).sum())

    return finish(tuple(ev.candidates[i] for i in chosen))


# ---------------------------------------------------------------------------
# lifting windows onto the 3D massing


@dataclass(frozen=True)
class WindowRect:
    """A window as a 3D rectangle on a vertical massing face."""

    level_index: int
    wall_index: int
    corners: tuple[tuple[float, float, float], ...]  # 4, CCW seen from outside
    segment: WindowSegment

    def z_extent(self) -> tuple[float, float]:
        zs = [c[2] for c in self.corners]
        return min(zs), max(zs)


@dataclass(frozen=True)
class FacadeModel:
    model: MassingModel
    rectangles: tuple[WindowRect, ...]
    floor_height: float = DEFAULT_FLOOR_HEIGHT

    def window_quads(self) -> list[list[tuple[float, float, float]]]:
        return [list(r.corners) for r in self.rectangles]


def apply_facade(
    model: MassingModel, specs: list[FacadeSpec], floor_height: float = DEFAULT_FLOOR_HEIGHT
) -> FacadeModel:
    """Lift each spec's windows onto the model's faces at its level.

    Wall references resolve against the plan rebuilt from the model's
    profile at the spec's level; a changed profile raises
    DanglingWallReference rather than guessing.
    """
    rects: list[WindowRect] = []
    for spec in specs:
        if spec.head > floor_height + _EPS:
            raise InvalidParams("window head cannot exceed the floor height")
        z_slice = spec.level_index * floor_height + SLICE_OFFSET
        profile = evaluate_slice(model, z_slice)
        if profile.is_empty:
            raise DanglingWallReference(f"no profile at level {spec.level_index}")
        plan = plan_from_profile(profile)
        walls = plan.exterior_walls
        z0 = spec.level_index * floor_height + spec.sill
        z1 = spec.level_index * floor_height + spec.head
        for win in spec.windows:
            if win.wall_index >= len(walls):
                raise DanglingWallReference(
                    f"window references wall {win.wall_index} but the profile has {len(walls)}"
                )
            wall = walls[win.wall_index]
            if win.offset + win.length > wall.length + 1e-6:
                raise DanglingWallReference("window extends past the profile's wall")
            a = wall.point_at(win.offset)
            b = wall.point_at(win.offset + win.length)
            corners = (
                (a[0], a[1], z0),
                (b[0], b[1], z0),
                (b[0], b[1], z1),
                (a[0], a[1], z1),
            )
            rects.append(WindowRect(spec.level_index, win.wall_index, corners, win))

    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if _rects_overlap(rects[i], rects[j]):
                raise InvalidParams("window rectangles overlap")
    return FacadeModel(model, tuple(rects), floor_height)


def _rects_overlap(a: WindowRect, b: WindowRect) -> bool:
    az0, az1 = a.z_extent()
    bz0, bz1 = b.z_extent()
    if az1 <= bz0 + _EPS or bz1 <= az0 + _EPS:
        return False
    (ax0, ay0, _), (ax1, ay1, _) = a.corners[0], a.corners[1]
    (bx0, by0, _), (bx1, by1, _) = b.corners[0], b.corners[1]
    if ay0 == ay1 and by0 == by1:  # both on horizontal walls
        if ay0 != by0:
            return False
        lo = max(min(ax0, ax1), min(bx0, bx1))
        hi = min(max(ax0, ax1), max(bx0, bx1))
        return hi - lo > _EPS
    if ax0 == ax1 and bx0 == bx1:  # both on vertical walls
        if ax0 != bx0:
            return False
        lo = max(min(ay0, ay1), min(by0, by1))
        hi = min(max(ay0, ay1), max(by0, by1))
        return hi - lo > _EPS
    return False

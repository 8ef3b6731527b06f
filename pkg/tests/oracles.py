"""Independent reference computations used to check the library.

These deliberately avoid the library's own evaluation paths: membership
walks the op list pointwise, volumes come from Monte Carlo sampling, and
daylight angles are recomputed with dense window sampling. Keeping them
separate from the code under test is the whole point.
"""

from __future__ import annotations

import math

import numpy as np

from ddf.massing import Box3, MassingModel, OpKind


def point_in_box(x: float, y: float, z: float, box: Box3) -> bool:
    return (
        box.min[0] < x < box.max[0]
        and box.min[1] < y < box.max[1]
        and box.min[2] < z < box.max[2]
    )


def membership(model: MassingModel, x: float, y: float, z: float) -> bool:
    """Walk the op sequence for a single point."""
    inside = point_in_box(x, y, z, model.base)
    for op in model.ops:
        hit = point_in_box(x, y, z, op.block)
        if op.kind is OpKind.ADD:
            inside = inside or hit
        else:
            inside = inside and not hit
    return inside


def membership_many(model: MassingModel, pts: np.ndarray) -> np.ndarray:
    """Vectorized op walk over an (N, 3) array of points."""
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]

    def in_box(b: Box3) -> np.ndarray:
        return (
            (x > b.min[0]) & (x < b.max[0])
            & (y > b.min[1]) & (y < b.max[1])
            & (z > b.min[2]) & (z < b.max[2])
        )

    inside = in_box(model.base)
    for op in model.ops:
        if op.kind is OpKind.ADD:
            inside |= in_box(op.block)
        else:
            inside &= ~in_box(op.block)
    return inside


def model_bounds(model: MassingModel) -> tuple[np.ndarray, np.ndarray]:
    los = np.array([b.min for b in model.boxes()])
    his = np.array([b.max for b in model.boxes()])
    return los.min(axis=0), his.max(axis=0)


def monte_carlo_volume(model: MassingModel, n_samples: int, rng: np.random.Generator) -> float:
    """Uniform sampling in the bounding box, classified by the op walk."""
    lo, hi = model_bounds(model)
    pts = rng.uniform(lo, hi, size=(n_samples, 3))
    frac = membership_many(model, pts).mean()
    box_volume = float(np.prod(hi - lo))
    return frac * box_volume


def profile_membership(profile, x: float, y: float) -> bool:
    """Even-odd membership in a sectional profile's regions."""
    return any(r.contains(x, y) for r in profile.regions)


def dense_sky_component(plan, cell: tuple[float, float], samples: int = 1024) -> float:
    """Sky value at one point by dense per-sample angle integration."""
    from ddf.floorplan import boundary_edges

    obstacles = []
    for a, b in boundary_edges(plan.boundary):
        obstacles.append((a, b))
    for wall in plan.interior_walls:
        obstacles.append((wall.start, wall.end))

    def crosses(p, q, a, b) -> bool:
        def orient(o, s, r):
            return (s[0] - o[0]) * (r[1] - o[1]) - (s[1] - o[1]) * (r[0] - o[0])

        o0 = orient(p, q, a)
        o1 = orient(p, q, b)
        p0 = orient(a, b, p)
        p1 = orient(a, b, q)
        return o0 * o1 < 0 and p0 * p1 < 0

    cx, cy = cell
    total = 0.0
    for win in plan.windows:
        wall = plan.exterior_walls[win.wall_index]
        d = wall.direction()
        w0 = (wall.start[0] + d[0] * win.offset, wall.start[1] + d[1] * win.offset)
        w1 = (wall.start[0] + d[0] * (win.offset + win.length), wall.start[1] + d[1] * (win.offset + win.length))
        for j in range(samples):
            a = (w0[0] + (w1[0] - w0[0]) * j / samples, w0[1] + (w1[1] - w0[1]) * j / samples)
            b = (w0[0] + (w1[0] - w0[0]) * (j + 1) / samples, w0[1] + (w1[1] - w0[1]) * (j + 1) / samples)
            mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
            if any(crosses(cell, mid, oa, ob) for oa, ob in obstacles):
                continue
            ux, uy = a[0] - cx, a[1] - cy
            vx, vy = b[0] - cx, b[1] - cy
            cross = ux * vy - uy * vx
            dot = ux * vx + uy * vy
            total += win.transmittance * math.atan2(abs(cross), dot) / math.pi
    return total


def brute_force_best_coverage(evaluator, constraints, plan, threshold: float, budget: int):
    """Exhaustive search over feasible candidate subsets up to the budget.

    Returns (best covered-cell count, best subset indices).
    """
    from itertools import combinations

    from ddf.facade import check_constraints

    n = len(evaluator.candidates)
    best_count, best_subset = 0, ()
    for size in range(0, budget + 1):
        for subset in combinations(range(n), size):
            windows = tuple(evaluator.candidates[i] for i in subset)
            if not check_constraints(windows, plan, constraints):
                continue
            covered = evaluator.covered(list(subset), threshold)
            if covered > best_count:
                best_count, best_subset = covered, subset
    return best_count, best_subset

"""Paired training data: floorplan drawings and their daylighting maps.

Synthesized plans come from the massing generator (ground-floor profile),
seasoned with random interior walls and daylight-optimized windows. Each
dataset entry writes three files — the plan line-art PNG, the 16-bit map
PGM, and the thermal map PNG — and records the vector plan plus content
hashes in the manifest, so finished entries can be verified and reruns
skip work that already matches.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .daylight import DaylightMap, MapStyle, SiteParams, compute_daylight_map, map_to_pgm, render_map
from .errors import InvalidParams, ValidationError
from .facade import DaylightTarget, PlacementConstraints, optimize_windows
from .floorplan import FloorPlan, WallKind, WallSegment, plan_from_profile, plan_to_document, rasterize
from .massing import MassingParams, extract_floor_profiles, generate_massing
from .rng import SplitMix64, derive
from .serialization import canonical_bytes, document_hash, file_hash, sha256_hex, write_atomic

MANIFEST_NAME = "manifest.jsonl"
MANIFEST_SCHEMA_VERSION = "1"
IMAGE_SIZE = 512  # pair images are letterboxed to this square

# line-art drawing convention: exterior walls black, interior walls gray,
# windows red, white background
_EXTERIOR_COLOR = (0, 0, 0)
_INTERIOR_COLOR = (128, 128, 128)
_WINDOW_COLOR = (255, 0, 0)


@dataclass(frozen=True)
class DatasetEntry:
    plan_path: str  # plan line-art PNG
    map_path: str  # 16-bit PGM
    png_path: str  # thermal PNG
    plan_hash: str
    site: dict
    plan: dict
    file_hashes: dict

    def to_document(self) -> dict:
        return {
            "plan_path": self.plan_path,
            "map_path": self.map_path,
            "png_path": self.png_path,
            "plan_hash": self.plan_hash,
            "site": self.site,
            "plan": self.plan,
            "file_hashes": self.file_hashes,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "DatasetEntry":
        return cls(
            plan_path=doc["plan_path"],
            map_path=doc["map_path"],
            png_path=doc["png_path"],
            plan_hash=doc["plan_hash"],
            site=doc["site"],
            plan=doc["plan"],
            file_hashes=doc["file_hashes"],
        )


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[DatasetEntry, ...]
    site: dict
    schema_version: str = MANIFEST_SCHEMA_VERSION

    def __post_init__(self):
        if not self.entries:
            raise InvalidParams("a dataset manifest needs at least one entry")

    def to_jsonl(self) -> bytes:
        lines = [canonical_bytes(e.to_document()) for e in self.entries]
        summary = {
            "type": "summary",
            "schema_version": self.schema_version,
            "count": len(self.entries),
            "site": self.site,
        }
        lines.append(canonical_bytes(summary))
        return b"\n".join(lines) + b"\n"

    @classmethod
    def from_jsonl(cls, data: bytes) -> "DatasetManifest":
        entries = []
        site = {}
        version = MANIFEST_SCHEMA_VERSION
        for line in data.decode().splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            if doc.get("type") == "summary":
                site = doc["site"]
                version = doc["schema_version"]
            else:
                entries.append(DatasetEntry.from_document(doc))
        return cls(tuple(entries), site, version)


def synthesize_plans(n: int, seed: int) -> list[FloorPlan]:
    """Deterministically generate n distinct floorplans.

    Each plan: a seeded massing model's ground-floor profile, up to four
    random axis-aligned interior walls laid across masked grid spans, and
    one to six windows placed by the daylight optimizer.
    """
    if n < 1:
        raise InvalidParams("n must be >= 1")
    plans: list[FloorPlan] = []
    attempt = 0
    while len(plans) < n:
        sub_seed = derive(seed, len(plans), attempt)
        attempt += 1
        plan = _synthesize_one(sub_seed)
        if plan is not None:
            plans.append(plan)
        if attempt > n * 16 + 64:
            raise InvalidParams("plan synthesis stalled; widen parameters")
    return plans


def _synthesize_one(sub_seed: int) -> FloorPlan | None:
    rng = SplitMix64(sub_seed)
    base = (rng.uniform(9.0, 18.0), rng.uniform(8.0, 15.0), rng.uniform(4.0, 10.0))
    params = MassingParams(
        base_dims=base,
        n_add=rng.randrange(3),
        n_sub=rng.randrange(3),
        h_range=(3.0, max(3.0, base[2])),
        seed=rng.next_u64(),
    )
    try:
        model = generate_massing(params)
        levels = extract_floor_profiles(model)
        plan = plan_from_profile(levels[0][1])
    except Exception:
        return None

    plan = _add_interior_walls(plan, rng, count=rng.randrange(5))

    site = SiteParams()
    target = DaylightTarget(
        threshold=rng.uniform(0.15, 0.35), coverage_goal=rng.uniform(0.5, 0.9)
    )
    constraints = PlacementConstraints(budget=1 + rng.randrange(6))
    try:
        spec = optimize_windows(plan, target, constraints, site)
    except Exception:
        return None
    if not spec.windows:
        return None
    return replace(plan, windows=spec.windows)


def _add_interior_walls(plan: FloorPlan, rng: SplitMix64, count: int) -> FloorPlan:
    """Lay straight walls across contiguous masked grid spans, pulled in
    from the ends so they stay inside the boundary."""
    if count == 0:
        return plan
    grid = rasterize(plan)
    xs, ys = grid.centers()
    walls = list(plan.interior_walls)
    for _ in range(count):
        horizontal = rng.random() < 0.5
        if horizontal:
            j = rng.randrange(grid.height)
            row = grid.mask[j]
            spans = _mask_spans(row)
            if not spans:
                continue
            i0, i1 = rng.choice(spans)
            x0, x1 = xs[i0] + 0.25, xs[i1] - 0.25
            if x1 - x0 < 1.0:
                continue
            walls.append(WallSegment((x0, ys[j]), (x1, ys[j]), 0.2, WallKind.INTERIOR))
        else:
            i = rng.randrange(grid.width)
            column = grid.mask[:, i]
            spans = _mask_spans(column)
            if not spans:
                continue
            j0, j1 = rng.choice(spans)
            y0, y1 = ys[j0] + 0.25, ys[j1] - 0.25
            if y1 - y0 < 1.0:
                continue
            walls.append(WallSegment((xs[i], y0), (xs[i], y1), 0.2, WallKind.INTERIOR))
    try:
        return replace(plan, interior_walls=tuple(walls))
    except ValidationError:
        return plan


def _mask_spans(row: np.ndarray) -> list[tuple[int, int]]:
    spans = []
    start = None
    for idx, val in enumerate(row):
        if val and start is None:
            start = idx
        elif not val and start is not None:
            spans.append((start, idx - 1))
            start = None
    if start is not None:
        spans.append((start, len(row) - 1))
    return [s for s in spans if s[1] - s[0] >= 3]


def render_plan_drawing(plan: FloorPlan, size: int = IMAGE_SIZE) -> Image.Image:
    """Letterboxed line-art drawing of the plan layers."""
    x0, y0, x1, y1 = plan.bounds()
    extent = max(x1 - x0, y1 - y0)
    margin = 0.05 * size
    scale = (size - 2 * margin) / extent
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0

    def to_px(p: tuple[float, float]) -> tuple[float, float]:
        return (
            size / 2.0 + (p[0] - cx) * scale,
            size / 2.0 - (p[1] - cy) * scale,  # image y runs down
        )

    image = Image.new("RGB", (size, size), (255, 255, 255))
    draw = ImageDraw.Draw(image)
    for wall in plan.exterior_walls:
        draw.line([to_px(wall.start), to_px(wall.end)], fill=_EXTERIOR_COLOR,
                  width=max(1, round(wall.thickness * scale)))
    for wall in plan.interior_walls:
        draw.line([to_px(wall.start), to_px(wall.end)], fill=_INTERIOR_COLOR,
                  width=max(1, round(wall.thickness * scale)))
    for win in plan.windows:
        a, b = plan.window_endpoints(win)
        host = plan.exterior_walls[win.wall_index]
        draw.line([to_px(a), to_px(b)], fill=_WINDOW_COLOR,
                  width=max(1, round(host.thickness * scale)) + 2)
    return image


def render_map_image(daylight: DaylightMap, size: int = IMAGE_SIZE) -> Image.Image:
    """Thermal map letterboxed onto a white square canvas."""
    base = render_map(daylight, MapStyle.THERMAL, scale=1)
    w, h = base.size
    scale = max(1, int((size * 0.9) // max(w, h)))
    scaled = base.resize((w * scale, h * scale), Image.NEAREST)
    canvas = Image.new("RGB", (size, size), (255, 255, 255))
    canvas.paste(scaled, ((size - scaled.width) // 2, (size - scaled.height) // 2), scaled)
    return canvas


def _png_bytes(image: Image.Image) -> bytes:
    import io

    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()


def build_pairs(plans: list[FloorPlan], site: SiteParams, out_dir: Path) -> DatasetManifest:
    """Write the pair files for every plan and return the manifest.

    Entries are keyed by the plan's content hash: files whose recorded
    hashes already match on disk are not rewritten, so interrupted runs
    resume where they stopped. Plans that fail validation are skipped.
    Entries are sorted by plan hash for a deterministic manifest.
    """
    out_dir = Path(out_dir)
    (out_dir / "plans").mkdir(parents=True, exist_ok=True)
    (out_dir / "maps").mkdir(parents=True, exist_ok=True)

    entries: list[DatasetEntry] = []
    for plan in plans:
        try:
            doc = plan_to_document(plan)
            plan_hash = document_hash(doc)
            entry = _build_entry(plan, doc, plan_hash, site, out_dir)
        except Exception:
            continue
        entries.append(entry)

    entries.sort(key=lambda e: e.plan_hash)
    manifest = DatasetManifest(tuple(entries), site.to_document())
    write_atomic(out_dir / MANIFEST_NAME, manifest.to_jsonl())
    return manifest


def _build_entry(
    plan: FloorPlan, doc: dict, plan_hash: str, site: SiteParams, out_dir: Path
) -> DatasetEntry:
    short = plan_hash[:16]
    rel = {
        "plan_path": f"plans/{short}.png",
        "map_path": f"maps/{short}.pgm",
        "png_path": f"maps/{short}.png",
    }
    paths = {k: out_dir / v for k, v in rel.items()}

    daylight = None
    outputs: dict[str, bytes] = {}
    if not all(p.exists() for p in paths.values()):
        daylight = compute_daylight_map(plan, site, plan_hash=plan_hash)
        outputs["plan_path"] = _png_bytes(render_plan_drawing(plan))
        outputs["map_path"] = map_to_pgm(daylight)
        outputs["png_path"] = _png_bytes(render_map_image(daylight))
        for key, data in outputs.items():
            write_atomic(paths[key], data)
        hashes = {rel[k]: sha256_hex(data) for k, data in outputs.items()}
    else:
        hashes = {rel[k]: file_hash(paths[k]) for k in rel}

    return DatasetEntry(
        plan_path=rel["plan_path"],
        map_path=rel["map_path"],
        png_path=rel["png_path"],
        plan_hash=plan_hash,
        site=site.to_document(),
        plan=doc,
        file_hashes=hashes,
    )


def verify_manifest(manifest: DatasetManifest, out_dir: Path) -> list[str]:
    """Paths whose files are missing or fail their recorded hash."""
    out_dir = Path(out_dir)
    problems = []
    for entry in manifest.entries:
        for rel, expected in entry.file_hashes.items():
            path = out_dir / rel
            if not path.exists():
                problems.append(f"missing: {rel}")
            elif file_hash(path) != expected:
                problems.append(f"hash mismatch: {rel}")
    return problems

"""End-to-end orchestration: massing to conditioning bundle.

A project records every stage — massing model, floor profiles, per-level
plans, daylight map proposals with accept/reject flags, facade specs,
prompts — and persists as a directory of canonical JSON plus derived
binary artifacts. Timestamps live in their own file so two runs with the
same seeds produce byte-identical archives elsewhere.

Stage order is enforced: plans need the model, maps need plans, facades
need an accepted map proposal or an explicit target.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .conditioning import CameraSpec, render_conditioning
from .daylight import (
    DaylightMap,
    SiteParams,
    compute_daylight_map,
    map_sidecar,
    map_to_pgm,
    render_map,
)
from .errors import StageOrderError
from .facade import (
    DaylightTarget,
    FacadeModel,
    FacadeSpec,
    PlacementConstraints,
    apply_facade,
    optimize_windows,
)
from .floorplan import FloorPlan, parse_plan, plan_from_profile, plan_to_document
from .massing import (
    DEFAULT_FLOOR_HEIGHT,
    MassingModel,
    MassingParams,
    extract_floor_profiles,
    generate_massing,
)
from .mesh import export_mesh, obj_bytes
from .prompts import Prompt, PromptLexicon, adg
from .rng import derive
from .serialization import canonical_bytes, document_hash, pretty_dumps, write_atomic

PROJECT_SCHEMA_VERSION = "1"


@dataclass
class MapProposal:
    """A computed daylight map plus the windows that produced it; the
    accepted flag records the human filtering decision."""

    spec: FacadeSpec
    plan: FloorPlan
    accepted: bool | None = None

    def to_document(self) -> dict:
        return {
            "spec": self.spec.to_document(),
            "plan": plan_to_document(self.plan),
            "accepted": self.accepted,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "MapProposal":
        return cls(
            spec=FacadeSpec.from_document(doc["spec"]),
            plan=parse_plan(doc["plan"]),
            accepted=doc.get("accepted"),
        )


@dataclass
class LevelState:
    index: int
    representative: bool
    plan: FloorPlan | None = None
    proposals: list[MapProposal] = field(default_factory=list)
    facade: FacadeSpec | None = None

    def to_document(self) -> dict:
        return {
            "index": self.index,
            "representative": self.representative,
            "plan": plan_to_document(self.plan) if self.plan else None,
            "proposals": [p.to_document() for p in self.proposals],
            "facade": self.facade.to_document() if self.facade else None,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "LevelState":
        return cls(
            index=int(doc["index"]),
            representative=bool(doc["representative"]),
            plan=parse_plan(doc["plan"]) if doc.get("plan") else None,
            proposals=[MapProposal.from_document(p) for p in doc.get("proposals", [])],
            facade=FacadeSpec.from_document(doc["facade"]) if doc.get("facade") else None,
        )


@dataclass
class Project:
    id: str
    params: MassingParams
    site: SiteParams
    target: DaylightTarget
    constraints: PlacementConstraints = field(default_factory=PlacementConstraints)
    floor_height: float = DEFAULT_FLOOR_HEIGHT
    model: MassingModel | None = None
    levels: list[LevelState] = field(default_factory=list)
    prompts: list[Prompt] = field(default_factory=list)
    created: str = ""
    updated: str = ""

    def to_document(self) -> dict:
        return {
            "schema_version": PROJECT_SCHEMA_VERSION,
            "id": self.id,
            "params": self.params.to_document(),
            "site": self.site.to_document(),
            "target": self.target.to_document(),
            "constraints": self.constraints.to_document(),
            "floor_height": self.floor_height,
            "model": self.model.to_document() if self.model else None,
            "levels": [lv.to_document() for lv in self.levels],
            "prompts": [p.to_document() for p in self.prompts],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Project":
        prompts = [
            Prompt(
                text=p["text"], parts=p["parts"], index=p["index"],
                seed=p["seed"], duplicate=p.get("duplicate", False),
            )
            for p in doc.get("prompts", [])
        ]
        return cls(
            id=doc["id"],
            params=MassingParams.from_document(doc["params"]),
            site=SiteParams.from_document(doc["site"]),
            target=DaylightTarget.from_document(doc["target"]),
            constraints=PlacementConstraints.from_document(doc.get("constraints", {})),
            floor_height=float(doc.get("floor_height", DEFAULT_FLOOR_HEIGHT)),
            model=MassingModel.from_document(doc["model"]) if doc.get("model") else None,
            levels=[LevelState.from_document(lv) for lv in doc.get("levels", [])],
            prompts=prompts,
        )

    # -- stage transitions ---------------------------------------------------

    def run_massing(self) -> None:
        self.model = generate_massing(self.params)
        self.levels = [
            LevelState(index, representative)
            for index, _, representative in extract_floor_profiles(self.model, self.floor_height)
        ]
        self.prompts = []

    def level(self, index: int) -> LevelState:
        for lv in self.levels:
            if lv.index == index:
                return lv
        raise StageOrderError(f"level {index} does not exist")

    def profile(self, index: int):
        if self.model is None:
            raise StageOrderError("massing has not been generated")
        from .massing import SLICE_OFFSET, evaluate_slice

        return evaluate_slice(self.model, index * self.floor_height + SLICE_OFFSET)

    def compute_level_daylight(
        self, index: int, target: DaylightTarget | None = None,
        constraints: PlacementConstraints | None = None, site: SiteParams | None = None,
    ) -> MapProposal:
        """Propose a window layout for the level and compute its map."""
        if self.model is None:
            raise StageOrderError("massing is required before daylight")
        lv = self.level(index)
        if lv.plan is None:
            lv.plan = plan_from_profile(self.profile(index))
        spec = optimize_windows(
            lv.plan,
            target or self.target,
            constraints or self.constraints,
            site or self.site,
            level_index=index,
        )
        proposal = MapProposal(spec=spec, plan=replace(lv.plan, windows=spec.windows))
        lv.proposals.append(proposal)
        return proposal

    def set_map_flag(self, index: int, proposal_index: int, accepted: bool) -> None:
        lv = self.level(index)
        if proposal_index >= len(lv.proposals):
            raise StageOrderError(f"level {index} has no computed map {proposal_index}")
        lv.proposals[proposal_index].accepted = accepted

    def commit_facade(self, index: int, target: DaylightTarget | None = None) -> FacadeSpec:
        """Materialize the accepted proposal, or optimize directly when an
        explicit target overrides the human filtering step."""
        lv = self.level(index)
        if target is not None:
            proposal = self.compute_level_daylight(index, target=target)
            proposal.accepted = True
            lv.facade = proposal.spec
            return lv.facade
        accepted = [p for p in lv.proposals if p.accepted]
        if not accepted:
            raise StageOrderError(
                f"level {index} needs an accepted daylight map or an explicit target"
            )
        lv.facade = accepted[-1].spec
        return lv.facade

    def facade_model(self) -> FacadeModel:
        if self.model is None:
            raise StageOrderError("massing is required")
        specs = [lv.facade for lv in self.levels if lv.facade is not None]
        if not specs:
            raise StageOrderError("no committed facades")
        return apply_facade(self.model, specs, self.floor_height)

    def generate_prompts(self, k: int, seed: int | None = None, lexicon: PromptLexicon | None = None) -> None:
        prompt_seed = derive(self.params.seed, 0x70726F6D) if seed is None else seed
        self.prompts = adg(lexicon or PromptLexicon.bundled(), k, prompt_seed)


def run_pipeline(
    params: MassingParams,
    site: SiteParams,
    target: DaylightTarget,
    k_prompts: int = 5,
    constraints: PlacementConstraints | None = None,
    floor_height: float = DEFAULT_FLOOR_HEIGHT,
    project_id: str | None = None,
) -> Project:
    """Run every stage non-interactively (all proposals auto-accepted)."""
    project = Project(
        id=project_id or f"proj-{document_hash(params.to_document())[:12]}",
        params=params,
        site=site,
        target=target,
        constraints=constraints or PlacementConstraints(),
        floor_height=floor_height,
    )
    project.run_massing()
    for lv in project.levels:
        if not lv.representative:
            continue
        project.compute_level_daylight(lv.index)
        project.set_map_flag(lv.index, 0, True)
        project.commit_facade(lv.index)
    project.generate_prompts(k_prompts)
    return project


# ---------------------------------------------------------------------------
# archive layout


def save_project(project: Project, out_dir: Path, *, write_artifacts: bool = True) -> None:
    """Write the project directory; everything except timestamps.json is a
    pure function of the project state."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_atomic(out_dir / "project.json", pretty_dumps(project.to_document()).encode())

    now = _dt.datetime.now(_dt.timezone.utc).isoformat()
    created = project.created or now
    project.created = created
    project.updated = now
    write_atomic(
        out_dir / "timestamps.json",
        pretty_dumps({"created": created, "updated": now}).encode(),
    )
    if write_artifacts:
        export_artifacts(project, out_dir)


def load_project(path: Path) -> Project:
    path = Path(path)
    doc = json.loads((path / "project.json").read_text())
    project = Project.from_document(doc)
    stamp_file = path / "timestamps.json"
    if stamp_file.exists():
        stamps = json.loads(stamp_file.read_text())
        project.created = stamps.get("created", "")
        project.updated = stamps.get("updated", "")
    return project


def export_artifacts(project: Project, out_dir: Path) -> list[Path]:
    """Derived artifacts: model, mesh, per-level plans and maps, facade,
    prompts, conditioning image, and the bundle metadata."""
    out_dir = Path(out_dir)
    written: list[Path] = []

    def emit(rel: str, data: bytes) -> None:
        path = out_dir / rel
        write_atomic(path, data)
        written.append(path)

    if project.model is not None:
        emit("model.json", canonical_bytes(project.model.to_document()))
        emit("mesh.obj", obj_bytes(export_mesh(project.model)))

    maps_meta = {}
    for lv in project.levels:
        if lv.plan is None:
            continue
        plan = replace(lv.plan, windows=lv.facade.windows) if lv.facade else lv.plan
        emit(f"levels/{lv.index}/plan.json", canonical_bytes(plan_to_document(plan)))
        daylight = compute_daylight_map(plan, project.site, plan_hash=document_hash(plan_to_document(plan)))
        emit(f"levels/{lv.index}/map.pgm", map_to_pgm(daylight))
        emit(f"levels/{lv.index}/map.json", canonical_bytes(map_sidecar(daylight)))
        png = render_map(daylight, scale=8)
        import io

        buf = io.BytesIO()
        png.save(buf, format="PNG")
        emit(f"levels/{lv.index}/map.png", buf.getvalue())
        maps_meta[str(lv.index)] = map_sidecar(daylight)

    facades = [lv.facade.to_document() for lv in project.levels if lv.facade]
    if facades:
        emit("facade.json", canonical_bytes({"specs": facades}))
        fm = project.facade_model()
        emit("facade.obj", obj_bytes(export_mesh(fm.model), window_quads=fm.window_quads()))
        import io

        buf = io.BytesIO()
        render_conditioning(fm).save(buf, format="PNG")
        emit("conditioning.png", buf.getvalue())

    if project.prompts:
        emit("prompts.json", canonical_bytes([p.to_document() for p in project.prompts]))
        emit("prompts.txt", ("\n".join(p.text for p in project.prompts) + "\n").encode())

    meta = {
        "schema_version": PROJECT_SCHEMA_VERSION,
        "id": project.id,
        "maps": maps_meta,
        "artifacts": sorted(str(p.relative_to(out_dir)) for p in written),
    }
    emit("meta.json", canonical_bytes(meta))
    return written

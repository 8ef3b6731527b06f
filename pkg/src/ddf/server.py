"""HTTP JSON API over the project pipeline, plus static UI hosting.

All project mutations funnel through a per-project lock (single writer);
reads load the last fully written snapshot from disk, so long-running
generations never block or corrupt readers. Errors carry
{code, stage, message} with 404 for unknown resources, 409 for stage
order violations, and 422 for invalid parameters.
"""

from __future__ import annotations

import io
import os
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .conditioning import CameraSpec, render_conditioning
from .daylight import SiteParams, compute_daylight_map, render_map
from .errors import DdfError, InvalidParams, StageOrderError
from .facade import DaylightTarget, PlacementConstraints
from .massing import MassingParams
from .mesh import export_mesh, obj_bytes
from .pipeline import Project, load_project, save_project

STATE_DIR_ENV = "DDF_STATE_DIR"
API = "/api/v1"


class ProjectStore:
    """Directory-backed store; one subdirectory per project id."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def path(self, project_id: str) -> Path:
        return self.root / project_id

    def exists(self, project_id: str) -> bool:
        return (self.path(project_id) / "project.json").exists()

    def load(self, project_id: str) -> Project:
        if not self.exists(project_id):
            raise KeyError(project_id)
        return load_project(self.path(project_id))

    def save(self, project: Project) -> None:
        save_project(project, self.path(project.id), write_artifacts=False)

    def ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "project.json").exists())


def _error(status: int, code: str, stage: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "stage": stage, "message": message},
    )


def create_app(state_dir: Path | None = None, static_dir: Path | None = None) -> FastAPI:
    root = Path(state_dir or os.environ.get(STATE_DIR_ENV, "./ddf-state"))
    store = ProjectStore(root)
    app = FastAPI(title="daylight-driven facade service")
    app.state.store = store

    @app.exception_handler(StageOrderError)
    async def stage_error(_req: Request, exc: StageOrderError):
        return _error(409, "stage_order", "pipeline", str(exc))

    @app.exception_handler(InvalidParams)
    async def params_error(_req: Request, exc: InvalidParams):
        return _error(422, "invalid_params", "validation", str(exc))

    @app.exception_handler(DdfError)
    async def ddf_error(_req: Request, exc: DdfError):
        return _error(422, exc.__class__.__name__, "pipeline", str(exc))

    @app.exception_handler(KeyError)
    async def missing(_req: Request, exc: KeyError):
        return _error(404, "not_found", "store", f"unknown resource {exc}")

    def mutate(project_id: str, fn):
        with store.lock(project_id):
            project = store.load(project_id)
            result = fn(project)
            store.save(project)
            return project, result

    @app.post(f"{API}/projects")
    async def create_project(body: dict | None = None):
        body = body or {}
        params = MassingParams.from_document(body["params"]) if body.get("params") else MassingParams()
        site = SiteParams.from_document(body["site"]) if body.get("site") else SiteParams()
        target = DaylightTarget.from_document(body["target"]) if body.get("target") else DaylightTarget()
        constraints = (
            PlacementConstraints.from_document(body["constraints"])
            if body.get("constraints")
            else PlacementConstraints()
        )
        project = Project(
            id=uuid.uuid4().hex[:12], params=params, site=site,
            target=target, constraints=constraints,
        )
        store.save(project)
        return project.to_document()

    @app.get(f"{API}/projects")
    async def list_projects():
        return {"projects": store.ids()}

    @app.get(f"{API}/projects/{{project_id}}")
    async def get_project(project_id: str):
        return store.load(project_id).to_document()

    @app.post(f"{API}/projects/{{project_id}}/massing")
    async def post_massing(project_id: str, body: dict | None = None):
        body = body or {}

        def fn(project: Project):
            if body.get("params"):
                project.params = MassingParams.from_document(body["params"])
            project.run_massing()

        project, _ = mutate(project_id, fn)
        return project.to_document()

    @app.get(f"{API}/projects/{{project_id}}/profiles")
    async def get_profiles(project_id: str):
        project = store.load(project_id)
        if project.model is None:
            raise StageOrderError("massing has not been generated")
        levels = []
        for lv in project.levels:
            profile = project.profile(lv.index)
            levels.append(
                {
                    "index": lv.index,
                    "representative": lv.representative,
                    "area": profile.area(),
                    "regions": [
                        {"outer": [list(p) for p in r.outer],
                         "holes": [[list(p) for p in h] for h in r.holes]}
                        for r in profile.regions
                    ],
                    "proposals": len(lv.proposals),
                    "accepted": [p.accepted for p in lv.proposals],
                    "has_facade": lv.facade is not None,
                }
            )
        return {"levels": levels}

    @app.post(f"{API}/projects/{{project_id}}/levels/{{level}}/daylight")
    async def post_daylight(project_id: str, level: int, body: dict | None = None):
        body = body or {}

        def fn(project: Project):
            target = DaylightTarget.from_document(body["target"]) if body.get("target") else None
            site = SiteParams.from_document(body["site"]) if body.get("site") else None
            constraints = (
                PlacementConstraints.from_document(body["constraints"])
                if body.get("constraints")
                else None
            )
            proposal = project.compute_level_daylight(level, target, constraints, site)
            return {
                "proposal_index": len(project.level(level).proposals) - 1,
                "achieved_coverage": proposal.spec.achieved_coverage,
                "windows": len(proposal.spec.windows),
            }

        _, result = mutate(project_id, fn)
        return result

    @app.post(f"{API}/projects/{{project_id}}/levels/{{level}}/maps/{{map_index}}/accept")
    async def accept_map(project_id: str, level: int, map_index: int):
        mutate(project_id, lambda p: p.set_map_flag(level, map_index, True))
        return {"level": level, "map": map_index, "accepted": True}

    @app.post(f"{API}/projects/{{project_id}}/levels/{{level}}/maps/{{map_index}}/reject")
    async def reject_map(project_id: str, level: int, map_index: int):
        mutate(project_id, lambda p: p.set_map_flag(level, map_index, False))
        return {"level": level, "map": map_index, "accepted": False}

    @app.post(f"{API}/projects/{{project_id}}/levels/{{level}}/facade")
    async def post_facade(project_id: str, level: int, body: dict | None = None):
        body = body or {}

        def fn(project: Project):
            target = DaylightTarget.from_document(body["target"]) if body.get("target") else None
            spec = project.commit_facade(level, target)
            return spec.to_document()

        _, result = mutate(project_id, fn)
        return result

    @app.post(f"{API}/projects/{{project_id}}/prompts")
    async def post_prompts(project_id: str, body: dict | None = None):
        body = body or {}
        k = int(body.get("k", 5))
        seed = body.get("seed")

        def fn(project: Project):
            project.generate_prompts(k, int(seed) if seed is not None else None)
            return [p.to_document() for p in project.prompts]

        _, result = mutate(project_id, fn)
        return {"prompts": result}

    @app.get(f"{API}/projects/{{project_id}}/export/mesh.obj")
    async def get_mesh(project_id: str):
        project = store.load(project_id)
        if project.model is None:
            raise StageOrderError("massing has not been generated")
        specs = [lv.facade for lv in project.levels if lv.facade]
        if specs:
            fm = project.facade_model()
            data = obj_bytes(export_mesh(fm.model), window_quads=fm.window_quads())
        else:
            data = obj_bytes(export_mesh(project.model))
        return Response(content=data, media_type="model/obj")

    @app.get(f"{API}/projects/{{project_id}}/levels/{{level}}/map.png")
    async def get_map_png(project_id: str, level: int, proposal: int = -1):
        project = store.load(project_id)
        lv = project.level(level)
        if not lv.proposals:
            raise StageOrderError(f"level {level} has no computed maps")
        if not (-len(lv.proposals) <= proposal < len(lv.proposals)):
            raise KeyError(f"map {proposal}")
        chosen = lv.proposals[proposal]
        daylight = compute_daylight_map(chosen.plan, project.site)
        image = render_map(daylight, scale=8)
        buf = io.BytesIO()
        image.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get(f"{API}/projects/{{project_id}}/conditioning.png")
    async def get_conditioning(project_id: str, azimuth: float = 30.0, elevation: float = 20.0):
        project = store.load(project_id)
        fm = project.facade_model()
        camera = CameraSpec(azimuth=azimuth, elevation=elevation)
        buf = io.BytesIO()
        render_conditioning(fm, camera).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get(f"{API}/projects/{{project_id}}/prompts.txt")
    async def get_prompts_txt(project_id: str):
        project = store.load(project_id)
        text = "\n".join(p.text for p in project.prompts) + ("\n" if project.prompts else "")
        return Response(content=text.encode(), media_type="text/plain")

    @app.get(f"{API}/projects/{{project_id}}/bundle/meta.json")
    async def get_bundle_meta(project_id: str):
        project = store.load(project_id)
        facades = [lv.facade.to_document() for lv in project.levels if lv.facade]
        return {
            "id": project.id,
            "site": project.site.to_document(),
            "target": project.target.to_document(),
            "facades": facades,
            "prompt_count": len(project.prompts),
        }

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(
    host: str = "127.0.0.1",
    port: int = 8000,
    state_dir: Path | None = None,
    static_dir: Path | None = None,
) -> None:
    import uvicorn

    app = create_app(state_dir, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")

"""Command-line interface.

Subcommands mirror the pipeline stages: massing, daylight, facade,
prompts, dataset, run (full pipeline), export, serve.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .serialization import canonical_dumps, pretty_dumps


def _load_json(path: str | None) -> dict | None:
    if not path:
        return None
    return json.loads(Path(path).read_text())


def _write_output(path: str | None, data: bytes) -> None:
    if path and path != "-":
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("massing", help="generate, slice, or mesh massing models")
    msub = p.add_subparsers(dest="action", required=True)
    g = msub.add_parser("generate")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--params", help="JSON file of generation parameters")
    g.add_argument("--out", help="output model JSON (default stdout)")
    s = msub.add_parser("slice")
    s.add_argument("--model", required=True)
    s.add_argument("--z", type=float, required=True)
    s.add_argument("--out")
    m = msub.add_parser("mesh")
    m.add_argument("--model", required=True)
    m.add_argument("--out")

    d = sub.add_parser("daylight", help="compute daylighting maps")
    dsub = d.add_subparsers(dest="action", required=True)
    dc = dsub.add_parser("compute")
    dc.add_argument("--plan", required=True)
    dc.add_argument("--site")
    dc.add_argument("--out", help="output PGM path")
    dc.add_argument("--png", help="optional thermal PNG path")

    f = sub.add_parser("facade", help="optimize window placement")
    fsub = f.add_subparsers(dest="action", required=True)
    fo = fsub.add_parser("optimize")
    fo.add_argument("--plan", required=True)
    fo.add_argument("--target")
    fo.add_argument("--constraints")
    fo.add_argument("--site")
    fo.add_argument("--out")

    pr = sub.add_parser("prompts", help="generate or expand prompt lexicons")
    psub = pr.add_subparsers(dest="action", required=True)
    pg = psub.add_parser("generate")
    pg.add_argument("-k", type=int, default=10)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--lexicon", help="lexicon JSON (default: bundled)")
    pg.add_argument("--out")
    pe = psub.add_parser("expand")
    pe.add_argument("-n", type=int, default=20)
    pe.add_argument("--lexicon")
    pe.add_argument("--out")

    ds = sub.add_parser("dataset", help="build paired training data")
    dssub = ds.add_subparsers(dest="action", required=True)
    db = dssub.add_parser("build")
    db.add_argument("-n", type=int, default=100)
    db.add_argument("--seed", type=int, default=1)
    db.add_argument("--site")
    db.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run the full pipeline")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--params")
    r.add_argument("--site")
    r.add_argument("--target")
    r.add_argument("--constraints")
    r.add_argument("-k", "--prompts", type=int, default=5)
    r.add_argument("--out", required=True)

    e = sub.add_parser("export", help="export a conditioning image")
    e.add_argument("--project", required=True, help="project directory from `ddf run`")
    e.add_argument("--azimuth", type=float, default=30.0)
    e.add_argument("--elevation", type=float, default=20.0)
    e.add_argument("--out", required=True)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--state-dir")
    sv.add_argument("--static-dir", help="built frontend assets to serve at /")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "massing": _cmd_massing,
        "daylight": _cmd_daylight,
        "facade": _cmd_facade,
        "prompts": _cmd_prompts,
        "dataset": _cmd_dataset,
        "run": _cmd_run,
        "export": _cmd_export,
        "serve": _cmd_serve,
    }[args.command]
    return handler(args)


def _cmd_massing(args) -> int:
    from .massing import MassingModel, MassingParams, evaluate_slice, generate_massing
    from .mesh import export_mesh, obj_bytes

    if args.action == "generate":
        doc = _load_json(args.params) or {}
        if args.seed is not None:
            doc["seed"] = args.seed
        params = MassingParams.from_document({**MassingParams().to_document(), **doc})
        model = generate_massing(params)
        _write_output(args.out, (canonical_dumps(model.to_document()) + "\n").encode())
    elif args.action == "slice":
        model = MassingModel.from_document(_load_json(args.model))
        profile = evaluate_slice(model, args.z)
        doc = {
            "z": profile.z,
            "area": profile.area(),
            "regions": [
                {"outer": [list(p) for p in r.outer],
                 "holes": [[list(p) for p in h] for h in r.holes]}
                for r in profile.regions
            ],
        }
        _write_output(args.out, (canonical_dumps(doc) + "\n").encode())
    else:  # mesh
        model = MassingModel.from_document(_load_json(args.model))
        _write_output(args.out, obj_bytes(export_mesh(model)))
    return 0


def _cmd_daylight(args) -> int:
    from .daylight import SiteParams, compute_daylight_map, map_sidecar, map_to_pgm, render_map
    from .floorplan import parse_plan
    from .serialization import document_hash

    plan_doc = _load_json(args.plan)
    plan = parse_plan(plan_doc)
    site = SiteParams.from_document(_load_json(args.site) or {})
    daylight = compute_daylight_map(plan, site, plan_hash=document_hash(plan_doc))
    _write_output(args.out, map_to_pgm(daylight))
    if args.out and args.out != "-":
        sidecar = Path(args.out).with_suffix(".json")
        sidecar.write_text(pretty_dumps(map_sidecar(daylight)))
    if args.png:
        render_map(daylight, scale=8).save(args.png)
    return 0


def _cmd_facade(args) -> int:
    from .daylight import SiteParams
    from .facade import DaylightTarget, PlacementConstraints, optimize_windows
    from .floorplan import parse_plan

    plan = parse_plan(_load_json(args.plan))
    target = DaylightTarget.from_document(_load_json(args.target) or {})
    constraints = PlacementConstraints.from_document(_load_json(args.constraints) or {})
    site = SiteParams.from_document(_load_json(args.site) or {})
    spec = optimize_windows(plan, target, constraints, site)
    _write_output(args.out, (canonical_dumps(spec.to_document()) + "\n").encode())
    return 0


def _cmd_prompts(args) -> int:
    from .prompts import HttpLanguageModelClient, PromptLexicon, adg, expand_lexicon

    if args.action == "generate":
        lex_doc = _load_json(args.lexicon)
        lexicon = PromptLexicon.from_document(lex_doc) if lex_doc else PromptLexicon.bundled()
        prompts = adg(lexicon, args.k, args.seed)
        lines = [canonical_dumps(p.to_document()) for p in prompts]
        _write_output(args.out, ("\n".join(lines) + "\n").encode() if lines else b"")
    else:  # expand
        lex_doc = _load_json(args.lexicon)
        lexicon = PromptLexicon.from_document(lex_doc) if lex_doc else PromptLexicon.bundled()
        delta = expand_lexicon(HttpLanguageModelClient(), args.n)
        merged = lexicon.merged(delta)
        _write_output(args.out, (pretty_dumps(merged.to_document())).encode())
    return 0


def _cmd_dataset(args) -> int:
    from .daylight import SiteParams
    from .dataset import build_pairs, synthesize_plans

    site = SiteParams.from_document(_load_json(args.site) or {})
    plans = synthesize_plans(args.n, args.seed)
    manifest = build_pairs(plans, site, Path(args.out))
    print(f"wrote {len(manifest.entries)} pairs to {args.out}", file=sys.stderr)
    return 0


def _cmd_run(args) -> int:
    from .daylight import SiteParams
    from .facade import DaylightTarget, PlacementConstraints
    from .massing import MassingParams
    from .pipeline import run_pipeline, save_project

    params_doc = _load_json(args.params) or {}
    params_doc.setdefault("seed", args.seed)
    params = MassingParams.from_document({**MassingParams().to_document(), **params_doc})
    site = SiteParams.from_document(_load_json(args.site) or {})
    target = DaylightTarget.from_document(_load_json(args.target) or {})
    constraints = PlacementConstraints.from_document(_load_json(args.constraints) or {})
    project = run_pipeline(params, site, target, k_prompts=args.prompts, constraints=constraints)
    save_project(project, Path(args.out))
    print(f"project {project.id} written to {args.out}", file=sys.stderr)
    return 0


def _cmd_export(args) -> int:
    from .conditioning import CameraSpec, render_conditioning
    from .pipeline import load_project

    project = load_project(Path(args.project))
    camera = CameraSpec(azimuth=args.azimuth, elevation=args.elevation)
    image = render_conditioning(project.facade_model(), camera)
    image.save(args.out)
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    serve(
        host=args.host,
        port=args.port,
        state_dir=Path(args.state_dir) if args.state_dir else None,
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())

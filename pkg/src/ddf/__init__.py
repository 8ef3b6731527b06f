"""Daylight-driven facade design toolkit.

Parametric massing models, exact slice geometry, grid daylight maps,
max-coverage window placement, prompt assembly, paired-dataset builds,
and the pipeline CLI/service tying them together.
"""

from .errors import (
    ClientUnavailable,
    DanglingWallReference,
    DdfError,
    DegenerateCamera,
    DegenerateModel,
    EmptyLexiconCategory,
    EmptyModel,
    EmptyProfile,
    GridMismatch,
    InfeasibleConstraints,
    InvalidParams,
    MalformedPolygon,
    MalformedReply,
    ParseError,
    StageOrderError,
    ValidationError,
)
from .geometry import RectilinearPolygon, rect_difference, rect_intersection, rect_union
from .massing import (
    Box3,
    MassingModel,
    MassingOp,
    MassingParams,
    OpKind,
    SectionalProfile,
    evaluate_slice,
    extract_floor_profiles,
    generate_massing,
    volume,
)
from .mesh import TriangleMesh, divergence_volume, euler_characteristic, export_mesh, obj_bytes
from .floorplan import (
    AnalysisGrid,
    FloorPlan,
    WallKind,
    WallSegment,
    WindowSegment,
    compose,
    decompose,
    parse_plan,
    plan_from_profile,
    plan_to_document,
    rasterize,
)
from .daylight import (
    DaylightMap,
    MapStyle,
    SiteParams,
    SkyModel,
    SunPosition,
    compute_daylight_map,
    map_to_pgm,
    render_map,
    sun_position,
)
from .facade import (
    DaylightTarget,
    FacadeModel,
    FacadeSpec,
    PlacementConstraints,
    apply_facade,
    coverage,
    enumerate_candidates,
    optimize_windows,
)
from .prompts import Prompt, PromptLexicon, adg, expand_lexicon
from .dataset import DatasetManifest, build_pairs, synthesize_plans
from .pipeline import Project, load_project, run_pipeline, save_project
from .conditioning import CameraKind, CameraSpec, render_conditioning

__version__ = "0.1.0"

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ddf.geometry import RectilinearPolygon
from ddf.massing import Box3, MassingModel, MassingOp, MassingParams, OpKind, SectionalProfile


@pytest.fixture
def unit_cube() -> MassingModel:
    return MassingModel(Box3((0.0, 0.0, 0.0), (10.0, 10.0, 10.0)))


@pytest.fixture
def square_profile() -> SectionalProfile:
    return SectionalProfile(0.0, (RectilinearPolygon.from_rect(0.0, 0.0, 10.0, 10.0),))


@pytest.fixture
def staircase_model() -> MassingModel:
    """Three tiers, two floors each, shrinking footprints (areas 100/64/36)."""
    base = Box3((0.0, 0.0, 0.0), (10.0, 10.0, 6.0))
    ops = (
        MassingOp(OpKind.ADD, Box3((1.0, 1.0, 0.0), (9.0, 9.0, 12.0))),
        MassingOp(OpKind.ADD, Box3((2.0, 2.0, 0.0), (8.0, 8.0, 18.0))),
    )
    return MassingModel(base, ops)


def random_params(seed: int) -> MassingParams:
    """Varied generation parameters keyed by seed, for oracle sweeps."""
    from ddf.rng import SplitMix64

    rng = SplitMix64(seed)
    return MassingParams(
        base_dims=(rng.uniform(8, 20), rng.uniform(8, 18), rng.uniform(6, 15)),
        n_add=rng.randrange(4),
        n_sub=rng.randrange(4),
        w_range=(1.5, 7.0),
        d_range=(1.5, 7.0),
        h_range=(2.0, 12.0),
        translate_range=(-2.0, 2.0),
        scale_range=(0.6, 1.4),
        uv_grid=(3 + rng.randrange(3), 3 + rng.randrange(3)),
        seed=seed,
    )

from __future__ import annotations

import math

import numpy as np
import pytest

from ddf.errors import DegenerateModel, EmptyModel, InvalidParams
from ddf.massing import (
    Box3,
    MassingModel,
    MassingOp,
    MassingParams,
    OpKind,
    evaluate_slice,
    extract_floor_profiles,
    generate_massing,
    volume,
)
from ddf.serialization import canonical_bytes

from conftest import random_params
from oracles import membership, membership_many, monte_carlo_volume


class TestTypes:
    def test_box_requires_positive_extent(self):
        with pytest.raises(InvalidParams):
            Box3((0, 0, 0), (1, 0, 1))

    def test_params_validation(self):
        with pytest.raises(InvalidParams):
            MassingParams(uv_grid=(1, 4))
        with pytest.raises(InvalidParams):
            MassingParams(w_range=(0.0, 2.0))
        with pytest.raises(InvalidParams):
            MassingParams(min_volume_fraction=0.0)
        with pytest.raises(InvalidParams):
            MassingParams(scale_range=(-0.1, 1.0))


class TestVolume:
    def test_base_cube(self, unit_cube):
        assert volume(unit_cube) == 1000.0

    def test_nested_subtraction(self, unit_cube):
        model = MassingModel(
            unit_cube.base, (MassingOp(OpKind.SUBTRACT, Box3((4, 4, 4), (6, 6, 6))),)
        )
        assert volume(model) == 992.0

    def test_face_sharing_addition(self, unit_cube):
        model = MassingModel(
            unit_cube.base, (MassingOp(OpKind.ADD, Box3((10, 0, 0), (14, 4, 4))),)
        )
        assert volume(model) == 1064.0

    def test_monotonicity_under_ops(self):
        rng = np.random.default_rng(3)
        for seed in range(20):
            model = generate_massing(random_params(seed))
            vol = volume(model)
            lo = model.base.min
            hi = model.base.max
            block = Box3(
                tuple(rng.uniform(l, (l + h) / 2) for l, h in zip(lo, hi)),
                tuple(rng.uniform((l + h) / 2 + 0.1, h + 2) for l, h in zip(lo, hi)),
            )
            more = MassingModel(model.base, model.ops + (MassingOp(OpKind.ADD, block),))
            less = MassingModel(model.base, model.ops + (MassingOp(OpKind.SUBTRACT, block),))
            assert volume(more) >= vol - 1e-9
            assert volume(less) <= vol + 1e-9

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(42)
        for seed in range(10):
            model = generate_massing(random_params(seed))
            vol = volume(model)
            mc = monte_carlo_volume(model, 100_000, rng)
            assert vol == pytest.approx(mc, rel=0.015)


class TestSlices:
    def test_base_square(self, unit_cube):
        profile = evaluate_slice(unit_cube, 5.0)
        assert len(profile.regions) == 1
        assert profile.area() == 100.0

    def test_above_solid_is_empty(self, unit_cube):
        assert evaluate_slice(unit_cube, 11.0).is_empty
        assert evaluate_slice(unit_cube, -1.0).is_empty

    def test_central_subtraction_leaves_hole(self, unit_cube):
        model = MassingModel(
            unit_cube.base,
            (MassingOp(OpKind.SUBTRACT, Box3((3, 3, -1), (7, 7, 11))),),
        )
        profile = evaluate_slice(model, 5.0)
        assert profile.area() == pytest.approx(84.0, abs=1e-12)
        assert len(profile.regions) == 1
        assert len(profile.regions[0].holes) == 1
        # rasterized: classify a 400-point-per-axis subsample against the op walk
        xs = np.linspace(-0.5, 10.5, 60)
        for x in xs:
            for y in xs[::7]:
                from oracles import profile_membership

                assert profile_membership(profile, x, y) == membership(model, x, y, 5.0)

    def test_slice_membership_oracle_random_models(self):
        rng = np.random.default_rng(1234)
        agreements = 0
        total = 0
        for seed in range(10):
            model = generate_massing(random_params(100 + seed))
            lo = np.array([b.min for b in model.boxes()]).min(axis=0) - 1.0
            hi = np.array([b.max for b in model.boxes()]).max(axis=0) + 1.0
            for _ in range(20):
                z = rng.uniform(lo[2], hi[2])
                profile = evaluate_slice(model, z)
                pts = rng.uniform(lo[:2], hi[:2], size=(50, 2))
                for x, y in pts:
                    from oracles import profile_membership

                    total += 1
                    if profile_membership(profile, x, y) == membership(model, x, y, z):
                        agreements += 1
        assert agreements == total


class TestFloorProfiles:
    def test_uniform_tower_single_representative(self):
        tower = MassingModel(Box3((0, 0, 0), (8.0, 6.0, 15.0)))
        levels = extract_floor_profiles(tower, 3.0)
        assert len(levels) == 5
        assert [rep for _, _, rep in levels] == [True, False, False, False, False]

    def test_staircase_three_representatives(self, staircase_model):
        levels = extract_floor_profiles(staircase_model, 3.0)
        reps = [k for k, _, rep in levels if rep]
        assert len(levels) == 6
        assert len(reps) == 3
        # lowest, largest area change (tier boundary at level 2), highest
        assert reps == [0, 2, 5]

    def test_levels_stop_at_model_top(self):
        model = MassingModel(Box3((0, 0, 0), (5, 5, 9.0)))
        levels = extract_floor_profiles(model, 3.0)
        assert [k for k, _, _ in levels] == [0, 1, 2]

    def test_empty_model_raises(self):
        squat = MassingModel(Box3((0, 0, 0), (5, 5, 0.005)))
        with pytest.raises(EmptyModel):
            extract_floor_profiles(squat, 3.0)

    def test_mid_model_gap_skipped(self):
        base = Box3((0, 0, 0), (10, 10, 3.0))
        ops = (MassingOp(OpKind.ADD, Box3((2, 2, 6.0), (8, 8, 9.0))),)
        levels = extract_floor_profiles(MassingModel(base, ops), 3.0)
        assert [k for k, _, _ in levels] == [0, 2]


class TestGeneration:
    def test_base_only(self):
        params = MassingParams(base_dims=(10.0, 10.0, 10.0), n_add=0, n_sub=0, seed=5)
        model = generate_massing(params)
        assert volume(model) == 1000.0
        assert model.ops == ()

    def test_determinism_byte_identical(self):
        params = MassingParams(seed=42, n_add=2, n_sub=3)
        a = generate_massing(params)
        b = generate_massing(params)
        assert canonical_bytes(a.to_document()) == canonical_bytes(b.to_document())

    def test_different_seeds_differ(self):
        a = generate_massing(MassingParams(seed=1))
        b = generate_massing(MassingParams(seed=2))
        assert a.to_document() != b.to_document()

    def test_op_order_adds_then_subs(self):
        model = generate_massing(MassingParams(seed=9, n_add=2, n_sub=2))
        kinds = [op.kind for op in model.ops]
        assert kinds == [OpKind.ADD, OpKind.ADD, OpKind.SUBTRACT, OpKind.SUBTRACT]

    def test_subtractions_remove_volume(self):
        model = generate_massing(MassingParams(seed=11, n_add=1, n_sub=3))
        partial = MassingModel(model.base, model.ops[:1])
        vol = volume(partial)
        for op in model.ops[1:]:
            partial = MassingModel(model.base, partial.ops + (op,))
            new_vol = volume(partial)
            assert new_vol < vol - 1e-9
            vol = new_vol

    def test_volume_floor_respected(self):
        for seed in range(30):
            params = random_params(seed)
            model = generate_massing(params)
            base_volume = math.prod(params.base_dims)
            assert volume(model) >= params.min_volume_fraction * base_volume - 1e-9

    def test_degenerate_raises(self):
        # subtract blocks as large as the base with a full-volume floor
        params = MassingParams(
            base_dims=(4.0, 4.0, 4.0),
            n_add=0,
            n_sub=6,
            w_range=(8.0, 8.0),
            d_range=(8.0, 8.0),
            h_range=(8.0, 8.0),
            min_volume_fraction=1.0,
            seed=3,
        )
        with pytest.raises(DegenerateModel):
            generate_massing(params)

    def test_adds_grounded(self):
        model = generate_massing(MassingParams(seed=21, n_add=3, n_sub=0))
        for op in model.ops:
            assert op.block.min[2] == 0.0

    def test_serialization_roundtrip(self):
        model = generate_massing(MassingParams(seed=33))
        doc = model.to_document()
        back = MassingModel.from_document(doc)
        assert back == model

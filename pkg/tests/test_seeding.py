import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from helpers import box
from lobewalker.errors import EmptyLung, LungPartitionError, MetaMismatch, SeedCountNeverFive
from lobewalker.seeding import (
    LobeId,
    SeedingConfig,
    SeedSet,
    boundary_mask,
    compute_seeds,
    generate_seeds,
    identify_lobes,
    interior_mask,
)
from lobewalker.volume import GridMeta, LabelVolume, MaskVolume, ScalarVolume


def two_blocks():
    """Two 8^3 blocks joined by a one-voxel boundary plane at x = 8."""
    meta = GridMeta((17, 8, 8))
    p = np.zeros(meta.shape)
    p[:, :, 8] = 1.0
    return ScalarVolume(meta, p), box((17, 8, 8))


def two_lungs(meta, split_x):
    arr = np.zeros(meta.shape, dtype=bool)
    arr[:, :, 1:split_x] = True
    arr[:, :, split_x + 1 : meta.dims[0] - 1] = True
    return MaskVolume(meta, arr)


def block(meta, x0, x1, z0, z1):
    z, y, x = np.indices(meta.shape)
    return np.flatnonzero((x >= x0) & (x < x1) & (z >= z0) & (z < z1) & (y == 1))


class TestMasks:
    def test_boundary_threshold_is_inclusive(self):
        meta = GridMeta((4, 1, 1))
        prob = ScalarVolume(meta, [0.2, 0.5, 0.8, 0.9])
        lung = MaskVolume(meta, [True, True, True, False])
        assert boundary_mask(prob, lung).flat.tolist() == [False, True, True, False]
        b = boundary_mask(prob, lung, 0.85)
        assert b.flat.tolist() == [False] * 4
        assert interior_mask(boundary_mask(prob, lung), lung).flat.tolist() == [True, False, False, False]

    def test_meta_mismatch(self):
        with pytest.raises(MetaMismatch):
            boundary_mask(ScalarVolume(GridMeta((2, 1, 1)), [0, 0]), box((3, 1, 1)))


class TestGenerateSeeds:
    def test_separated_blocks_need_no_erosion(self):
        prob, lung = two_blocks()
        interior = interior_mask(boundary_mask(prob, lung), lung)
        seeds = generate_seeds(interior, lung, n_regions=2)
        assert seeds.erosion_iterations == 0
        assert seeds.sizes == {1: 512, 2: 512}

    def test_thin_sheet_never_splits(self):
        lung = box((20, 20, 2))
        with pytest.raises(SeedCountNeverFive) as err:
            generate_seeds(lung, lung)
        assert err.value.iterations == 1 and err.value.best_count == 1

    def test_iteration_limit(self):
        lung = box((30, 30, 30))
        with pytest.raises(SeedCountNeverFive) as err:
            generate_seeds(lung, lung, SeedingConfig(max_erosions=3))
        assert err.value.iterations == 3

    def test_empty_lung(self):
        lung = box((4, 4, 4), False)
        with pytest.raises(EmptyLung):
            generate_seeds(lung, lung)
        with pytest.raises(EmptyLung):
            compute_seeds(ScalarVolume(lung.meta, np.zeros(lung.meta.shape)), lung)

    def test_interior_outside_lung_rejected(self):
        meta = GridMeta((4, 1, 1))
        with pytest.raises(ValueError):
            generate_seeds(MaskVolume(meta, [1, 1, 0, 0]), MaskVolume(meta, [0, 1, 1, 0]))

    def test_small_components_are_ignored(self):
        meta = GridMeta((30, 3, 3))
        arr = np.zeros(meta.shape, dtype=bool)
        arr[:, :, 0:10] = True
        arr[:, :, 12:13] = True  # 9 voxels, below the minimum
        arr[:, :, 15:30] = True
        lung = MaskVolume(meta, arr)
        seeds = generate_seeds(lung, lung, SeedingConfig(min_seed_voxels=20), n_regions=2)
        assert seeds.sizes == {1: 135, 2: 90}

    def test_clean_phantom_gives_five_pure_seeds(self, clean_phantom):
        seeds = compute_seeds(clean_phantom.prob, clean_phantom.lung)
        assert seeds.labels == list(LobeId)
        gt = clean_phantom.gt.flat
        for lobe, idx in seeds.regions.items():
            assert np.all(gt[idx] == lobe)
            assert idx.size >= 50

    def test_deterministic(self, degraded_phantom):
        a = compute_seeds(degraded_phantom.prob, degraded_phantom.lung)
        b = compute_seeds(degraded_phantom.prob, degraded_phantom.lung)
        assert a.label_volume() == b.label_volume()
        assert a.erosion_iterations == b.erosion_iterations

    @settings(max_examples=60, deadline=None)
    @given(
        st.tuples(st.integers(3, 9), st.integers(3, 9), st.integers(3, 9)).flatmap(
            lambda s: st.tuples(arrays(np.bool_, s), arrays(np.float64, s, elements=st.floats(0, 1)))
        ),
        st.integers(1, 3),
        st.integers(1, 6),
        st.floats(0.05, 0.95),
    )
    def test_first_depth_with_target_count(self, data, n_regions, min_size, theta):
        lung_arr, p = data
        assume(lung_arr.any())
        nz, ny, nx = lung_arr.shape
        meta = GridMeta((nx, ny, nz))
        lung = MaskVolume(meta, lung_arr)
        prob = ScalarVolume(meta, p)
        cfg = SeedingConfig(theta=theta, max_erosions=5, min_seed_voxels=min_size)
        boundary = boundary_mask(prob, lung, theta)
        interior = interior_mask(boundary, lung)

        current = interior.data
        depth, expected = None, None
        for n in range(cfg.max_erosions + 1):
            if n:
                current = oracles.erode(current)
            comps = [c for c in oracles.flood_components(current) if len(c) >= min_size]
            if not current.any():
                break
            if len(comps) == n_regions:
                depth, expected = n, sorted(comps, key=lambda c: (-len(c), c[0]))
                break

        if depth is None:
            with pytest.raises(SeedCountNeverFive):
                generate_seeds(interior, lung, cfg, n_regions)
            return
        seeds = generate_seeds(interior, lung, cfg, n_regions)
        assert seeds.erosion_iterations == depth
        assert [seeds.regions[k].tolist() for k in range(1, n_regions + 1)] == expected
        for idx in seeds.regions.values():
            assert not boundary.flat[idx].any()
            assert interior.flat[idx].all()


class TestIdentifyLobes:
    meta = GridMeta((21, 3, 12))

    def regions(self):
        m = self.meta
        # right lung is x in 1..9, left lung x in 11..19
        return [
            block(m, 12, 18, 8, 11),  # LU
            block(m, 12, 18, 1, 4),  # LL
            block(m, 2, 8, 9, 11),  # RU
            block(m, 2, 8, 5, 7),  # RM
            block(m, 2, 8, 1, 3),  # RL
        ]

    def test_names_by_side_and_height(self):
        lung = two_lungs(self.meta, 10)
        regs = self.regions()
        shuffled = [regs[i] for i in (3, 0, 4, 2, 1)]
        named = identify_lobes(shuffled, lung)
        for lobe, want in zip(LobeId, regs):
            assert named[lobe].tolist() == want.tolist()

    def test_wrong_side_split(self):
        lung = two_lungs(self.meta, 10)
        regs = self.regions()
        regs[3] = block(self.meta, 12, 18, 5, 7)
        with pytest.raises(LungPartitionError):
            identify_lobes(regs, lung)

    def test_straddling_region(self):
        lung = two_lungs(self.meta, 10)
        regs = self.regions()
        regs[3] = np.concatenate([block(self.meta, 7, 9, 5, 6), block(self.meta, 11, 13, 5, 6)])
        with pytest.raises(LungPartitionError):
            identify_lobes(regs, lung)

    def test_single_lung(self):
        with pytest.raises(LungPartitionError):
            identify_lobes(self.regions(), box(self.meta.dims))

    def test_requires_five(self):
        with pytest.raises(ValueError):
            identify_lobes(self.regions()[:4], two_lungs(self.meta, 10))


class TestSeedSet:
    def test_validation(self):
        meta = GridMeta((4, 1, 1))
        with pytest.raises(ValueError):
            SeedSet(meta, {1: []})
        with pytest.raises(ValueError):
            SeedSet(meta, {1: [0, 1], 2: [1]})
        with pytest.raises(ValueError):
            SeedSet(meta, {1: [4]})

    def test_label_volume_roundtrip(self):
        meta = GridMeta((5, 1, 1))
        s = SeedSet(meta, {k: [k - 1] for k in range(1, 6)}, erosion_iterations=2)
        lab = s.label_volume()
        assert lab.flat.tolist() == [1, 2, 3, 4, 5]
        back = SeedSet.from_labels(lab, 2)
        assert back.labels == list(LobeId) and all(isinstance(k, LobeId) for k in back.labels)
        assert SeedSet.from_labels(LabelVolume(meta, [0, 2, 0, 0, 7])).labels == [2, 7]

    def test_split(self):
        s = SeedSet(GridMeta((5, 1, 1)), {1: [3], 2: [0], 3: [4, 1]})
        fg, bg = s.split(3)
        assert fg.tolist() == [1, 4] and bg.tolist() == [0, 3]

import math

import numpy as np
import pytest

from speckledge.simulate import (
    ClassModel,
    LabelMap,
    SimulationSpec,
    default_saturation,
    derive_seed,
    generate_phantom,
    ground_truth_edges,
    simulate_channel,
)


def single_class_spec(mu=1.0, looks=4.0, size=128, count=1, seed=1, saturation=None):
    labelmap = LabelMap(np.zeros((size, size), dtype=np.int32))
    classes = (ClassModel(0, {"HH": mu}, looks),)
    if saturation is None:
        # generous ceiling so clipping cannot bias the sample moments
        saturation = math.sqrt(mu) * 6.0
    return SimulationSpec(labelmap, classes, ("HH",), count, seed, saturation)


class TestPhantoms:
    def test_strips_band_structure(self):
        lm = generate_phantom("strips", 64, 4)
        assert lm.data.shape == (64, 64)
        # each row is constant, ids ascend top to bottom
        assert all(len(set(row)) == 1 for row in lm.data.tolist())
        ids = [row[0] for row in lm.data.tolist()]
        assert ids == sorted(ids)
        assert set(ids) == {0, 1, 2, 3}

    def test_strips_equal_band_heights(self):
        lm = generate_phantom("strips", 64, 4)
        counts = np.bincount(lm.data.ravel())
        assert counts.tolist() == [64 * 16] * 4

    def test_checkerboard_tiles(self):
        lm = generate_phantom("checkerboard", 64, 3)
        tile = 64 // 8
        for ti in range(8):
            for tj in range(8):
                block = lm.data[ti * tile : (ti + 1) * tile, tj * tile : (tj + 1) * tile]
                assert (block == (ti + tj) % 3).all()

    def test_nested_squares_rings(self):
        lm = generate_phantom("nested-squares", 65, 4)
        center = (65 - 1) / 2
        # the center pixel belongs to the innermost ring, corners to the last
        assert lm.data[32, 32] == 0
        assert lm.data[0, 0] == 3
        # ring ids depend only on Chebyshev distance from the center
        rows, cols = np.indices(lm.data.shape)
        cheb = np.maximum(np.abs(rows - center), np.abs(cols - center))
        for d in np.unique(cheb):
            assert len(np.unique(lm.data[cheb == d])) == 1

    def test_all_classes_present(self):
        for kind in ("strips", "checkerboard", "nested-squares"):
            for n in (2, 5, 8):
                lm = generate_phantom(kind, 64, n)
                assert set(np.unique(lm.data)) == set(range(n))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            generate_phantom("blobs", 64, 4)
        with pytest.raises(ValueError):
            generate_phantom("strips", 8, 4)
        with pytest.raises(ValueError):
            generate_phantom("strips", 64, 1)
        with pytest.raises(ValueError):
            generate_phantom("strips", 64, 9)


class TestGroundTruth:
    def test_half_and_half(self):
        lm = LabelMap(np.repeat(np.array([[0, 0, 1, 1]], dtype=np.int32), 4, axis=0))
        gt = ground_truth_edges(lm).data
        # boundary on the left side of the class change, all rows
        expected = np.zeros((4, 4), dtype=bool)
        expected[:, 1] = True
        assert np.array_equal(gt, expected)

    def test_unit_checkerboard(self):
        lm = LabelMap(np.indices((4, 4)).sum(axis=0).astype(np.int32) % 2)
        gt = ground_truth_edges(lm).data
        # every pixel differs from its right or down neighbour except the
        # bottom-right corner
        expected = np.ones((4, 4), dtype=bool)
        expected[-1, -1] = False
        assert np.array_equal(gt, expected)

    def test_constant_map_has_no_edges(self):
        lm = LabelMap(np.zeros((8, 8), dtype=np.int32))
        assert not ground_truth_edges(lm).data.any()

    def test_matches_naive_loop(self):
        rng = np.random.default_rng(0)
        lm = LabelMap(rng.integers(0, 3, (17, 13)).astype(np.int32))
        gt = ground_truth_edges(lm).data
        h, w = lm.data.shape
        for r in range(h):
            for c in range(w):
                right = c + 1 < w and lm.data[r, c] != lm.data[r, c + 1]
                down = r + 1 < h and lm.data[r, c] != lm.data[r + 1, c]
                assert gt[r, c] == (right or down)


class TestSeeding:
    def test_distinct_streams(self):
        seeds = {
            derive_seed(7, s, ch)
            for s in range(10)
            for ch in ("HH", "HV", "VV")
        }
        assert len(seeds) == 30

    def test_master_seed_changes_streams(self):
        assert derive_seed(1, 0, "HH") != derive_seed(2, 0, "HH")

    def test_seed_is_stable(self):
        assert derive_seed(42, 3, "HV") == derive_seed(42, 3, "HV")


class TestSimulateChannel:
    def test_determinism(self):
        spec = single_class_spec(seed=99)
        a = simulate_channel(spec, "HH", 0)
        b = simulate_channel(spec, "HH", 0)
        assert np.array_equal(a.data, b.data)

    def test_simulations_differ_by_index(self):
        spec = single_class_spec(count=2, seed=99)
        a = simulate_channel(spec, "HH", 0)
        b = simulate_channel(spec, "HH", 1)
        assert not np.array_equal(a.data, b.data)

    def test_large_looks_collapse_to_mean(self):
        spec = single_class_spec(mu=1.0, looks=1e6, saturation=2.0)
        img = simulate_channel(spec, "HH", 0)
        assert np.allclose(img.data, 0.5, atol=1e-2)

    def test_intensity_mean_within_clt_bound(self):
        mu, looks, size = 1.0, 4.0, 128
        spec = single_class_spec(mu=mu, looks=looks, size=size)
        img = simulate_channel(spec, "HH", 0)
        amplitude = img.data * spec.saturation
        intensity = amplitude * amplitude
        bound = 4.0 * mu / math.sqrt(looks * size * size)
        assert abs(intensity.mean() - mu) < bound

    def test_intensity_cv_matches_gamma_law(self):
        looks = 4.0
        spec = single_class_spec(mu=0.5, looks=looks, size=256, seed=5)
        intensity = (simulate_channel(spec, "HH", 0).data * spec.saturation) ** 2
        cv = intensity.std() / intensity.mean()
        assert abs(cv - 1.0 / math.sqrt(looks)) < 0.01

    def test_channels_are_independent(self):
        labelmap = LabelMap(np.zeros((256, 256), dtype=np.int32))
        classes = (ClassModel(0, {"HH": 1.0, "HV": 1.0}, 4.0),)
        spec = SimulationSpec(labelmap, classes, ("HH", "HV"), 1, 11, 6.0)
        a = simulate_channel(spec, "HH", 0).data.ravel()
        b = simulate_channel(spec, "HV", 0).data.ravel()
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.02

    def test_class_means_respected_per_region(self):
        lm = generate_phantom("strips", 128, 2)
        classes = (
            ClassModel(0, {"HH": 0.2}, 4.0),
            ClassModel(1, {"HH": 0.8}, 4.0),
        )
        spec = SimulationSpec(lm, classes, ("HH",), 1, 3, 6.0)
        img = simulate_channel(spec, "HH", 0)
        intensity = (img.data * spec.saturation) ** 2
        for cid, mu in ((0, 0.2), (1, 0.8)):
            region = intensity[lm.data == cid]
            bound = 4.0 * mu / math.sqrt(4.0 * region.size)
            assert abs(region.mean() - mu) < bound

    def test_saturation_clips_to_one(self):
        spec = single_class_spec(mu=1.0, looks=4.0, saturation=0.2, seed=8)
        img = simulate_channel(spec, "HH", 0)
        assert img.data.max() == 1.0

    def test_unknown_channel_rejected(self):
        spec = single_class_spec()
        with pytest.raises(ValueError):
            simulate_channel(spec, "HV", 0)

    def test_bad_sim_index_rejected(self):
        spec = single_class_spec(count=2)
        with pytest.raises(ValueError):
            simulate_channel(spec, "HH", 2)


class TestSpecValidation:
    def test_labelmap_class_coverage(self):
        lm = LabelMap(np.ones((16, 16), dtype=np.int32))
        with pytest.raises(ValueError):
            SimulationSpec(lm, (ClassModel(0, {"HH": 1.0}, 4.0),), ("HH",), 1, 0, 1.0)

    def test_channel_coverage(self):
        lm = LabelMap(np.zeros((16, 16), dtype=np.int32))
        with pytest.raises(ValueError):
            SimulationSpec(lm, (ClassModel(0, {"HH": 1.0}, 4.0),), ("HH", "HV"), 1, 0, 1.0)

    def test_default_saturation_formula(self):
        classes = (ClassModel(0, {"HH": 0.5}, 4.0), ClassModel(1, {"HH": 2.0}, 4.0))
        expected = math.sqrt(2.0 * (1.0 + 3.0 / 2.0))
        assert default_saturation(classes, ("HH",)) == pytest.approx(expected, rel=1e-12)

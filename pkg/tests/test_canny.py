import math
from collections import deque

import numpy as np
import pytest

from speckledge.detectors import CannyConfig, canny_edges
from speckledge.raster import GrayImage


def ref_gaussian_kernel(sigma):
    radius = math.ceil(3.0 * sigma)
    xs = range(-radius, radius + 1)
    vals = [math.exp(-(x * x) / (2.0 * sigma * sigma)) for x in xs]
    s = sum(vals)
    return [v / s for v in vals], radius


def ref_smooth(img, sigma):
    kernel, radius = ref_gaussian_kernel(sigma)
    h, w = img.shape

    def clamp(v, lo, hi):
        return max(lo, min(hi, v))

    rows = np.zeros_like(img, dtype=float)
    for r in range(h):
        for c in range(w):
            rows[r, c] = sum(
                kernel[k + radius] * img[r, clamp(c + k, 0, w - 1)]
                for k in range(-radius, radius + 1)
            )
    out = np.zeros_like(img, dtype=float)
    for r in range(h):
        for c in range(w):
            out[r, c] = sum(
                kernel[k + radius] * rows[clamp(r + k, 0, h - 1), c]
                for k in range(-radius, radius + 1)
            )
    return out


SOBEL_X = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
SOBEL_Y = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]


def ref_gradients(img):
    h, w = img.shape
    gx = np.zeros_like(img, dtype=float)
    gy = np.zeros_like(img, dtype=float)
    for r in range(h):
        for c in range(w):
            sx = sy = 0.0
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr = max(0, min(h - 1, r + dr))
                    cc = max(0, min(w - 1, c + dc))
                    sx += SOBEL_X[dr + 1][dc + 1] * img[rr, cc]
                    sy += SOBEL_Y[dr + 1][dc + 1] * img[rr, cc]
            gx[r, c] = sx
            gy[r, c] = sy
    return gx, gy


SECTOR_OFFSETS = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}


def ref_nms(mag, gx, gy):
    h, w = mag.shape
    out = np.zeros_like(mag)
    for r in range(h):
        for c in range(w):
            m = mag[r, c]
            if m <= 0:
                continue
            theta = math.atan2(gy[r, c], gx[r, c]) % math.pi
            sector = int((theta + math.pi / 8) // (math.pi / 4)) % 4
            dr, dc = SECTOR_OFFSETS[sector]

            def sample(rr, cc):
                rr = max(0, min(h - 1, rr))
                cc = max(0, min(w - 1, cc))
                return mag[rr, cc]

            plus = sample(r + dr, c + dc)
            minus = sample(r - dr, c - dc)
            if m > minus and m >= plus:
                out[r, c] = m
    return out


def ref_hysteresis(nms, high, low):
    h, w = nms.shape
    strong = nms >= high
    weak = nms >= low
    out = np.zeros((h, w), dtype=bool)
    queue = deque(map(tuple, np.argwhere(strong)))
    out[strong] = True
    while queue:
        r, c = queue.popleft()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and weak[rr, cc] and not out[rr, cc]:
                    out[rr, cc] = True
                    queue.append((rr, cc))
    return out


def ref_canny(img, sigma=1.0, high_percentile=70.0, low_ratio=0.4):
    smoothed = ref_smooth(img.astype(float), sigma)
    gx, gy = ref_gradients(smoothed)
    mag = np.hypot(gx, gy)
    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return np.zeros(img.shape, dtype=bool)
    high = np.percentile(nonzero, high_percentile)
    low = low_ratio * high
    nms = ref_nms(mag, gx, gy)
    return ref_hysteresis(nms, high, low)


def step_image(size=32, col=16, lo=0.2, hi=0.8):
    img = np.full((size, size), lo)
    img[:, col:] = hi
    return img


class TestCannyAgainstReference:
    def test_random_images_match_exactly(self):
        rng = np.random.default_rng(10)
        cfg = CannyConfig(sigma=1.0, high_percentile=70.0, low_ratio=0.4)
        for _ in range(10):
            img = rng.random((24, 24))
            got = canny_edges(GrayImage(img), cfg).data
            want = ref_canny(img, 1.0, 70.0, 0.4)
            assert np.array_equal(got, want)

    def test_parameter_variants_match(self):
        rng = np.random.default_rng(11)
        img = rng.random((20, 20))
        for sigma in (0.6, 1.0, 1.7):
            for hp in (55.0, 80.0):
                for lr in (0.3, 0.6):
                    cfg = CannyConfig(sigma=sigma, high_percentile=hp, low_ratio=lr)
                    got = canny_edges(GrayImage(img), cfg).data
                    assert np.array_equal(got, ref_canny(img, sigma, hp, lr))

    def test_structured_scene_matches(self):
        img = step_image()
        img[8:12, 8:12] = 0.95
        got = canny_edges(GrayImage(img), CannyConfig()).data
        assert np.array_equal(got, ref_canny(img))


class TestCannyBehaviour:
    def test_constant_image_yields_no_edges(self):
        img = GrayImage(np.full((16, 16), 0.5))
        assert not canny_edges(img, CannyConfig()).data.any()

    def test_clean_step_gives_single_column_line(self):
        edges = canny_edges(GrayImage(step_image()), CannyConfig(sigma=1.0)).data
        interior = edges[4:-4, :]
        cols = np.flatnonzero(interior.any(axis=0))
        assert len(cols) == 1
        assert abs(cols[0] - 15.5) <= 1.0
        assert interior[:, cols[0]].all()

    def test_sigma_sweep_keeps_step_located(self):
        img = step_image()
        for sigma in (0.5, 1.0, 1.5, 2.0):
            edges = canny_edges(GrayImage(img), CannyConfig(sigma=sigma)).data
            interior = edges[6:-6, :]
            cols = np.flatnonzero(interior.any(axis=0))
            assert len(cols) >= 1
            assert np.all(np.abs(cols - 15.5) <= 1.5)

    def test_positive_affine_rescaling_invariant(self):
        # Percentile thresholds scale with the data, so a*img + b with a > 0
        # changes nothing.
        rng = np.random.default_rng(12)
        img = rng.random((24, 24))
        cfg = CannyConfig()
        base = canny_edges(GrayImage(img), cfg).data
        scaled = canny_edges(GrayImage(0.5 * img + 0.2), cfg).data
        assert np.array_equal(base, scaled)

    def test_weak_segment_kept_only_with_strong_seed(self):
        rng = np.random.default_rng(13)
        img = rng.random((30, 30)) * 0.05
        img[:, 15:] += 0.8
        edges = canny_edges(GrayImage(img), CannyConfig()).data
        assert edges[10:-10, 14:17].any()

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CannyConfig(sigma=0.0)
        with pytest.raises(ValueError):
            CannyConfig(high_percentile=101.0)
        with pytest.raises(ValueError):
            CannyConfig(high_percentile=-1.0)
        with pytest.raises(ValueError):
            CannyConfig(low_ratio=1.5)
        with pytest.raises(ValueError):
            CannyConfig(low_ratio=-0.1)

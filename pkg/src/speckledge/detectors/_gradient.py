"""Shared gradient machinery: Gaussian smoothing, Sobel, non-maximum suppression.

Borders are always edge-replicated.  Non-maximum suppression quantizes the
gradient direction into four sectors and breaks exact ties asymmetrically
(strictly greater on the negative-offset side, greater-or-equal on the
positive side) so an ideal symmetric step keeps a single-pixel line.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Sampled Gaussian of radius ceil(3*sigma), normalized to unit sum."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_smooth(arr: np.ndarray, sigma: float) -> np.ndarray:
    kernel = gaussian_kernel1d(sigma)
    out = ndimage.correlate1d(arr, kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(out, kernel, axis=1, mode="nearest")


def sobel_gradients(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(gx, gy): the column-direction and row-direction Sobel derivatives."""
    gx = ndimage.correlate(arr, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(arr, _SOBEL_Y, mode="nearest")
    return gx, gy


# Canonical neighbour offset (dr, dc) per direction sector.
_SECTOR_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


def nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that are local maxima of |gradient| along the gradient
    direction; returns a boolean mask.  Zero-magnitude pixels never survive."""
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    sector = np.floor_divide(theta + np.pi / 8.0, np.pi / 4.0).astype(np.int64) % 4

    padded = np.pad(mag, 1, mode="edge")
    h, w = mag.shape
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dr, dc) in enumerate(_SECTOR_OFFSETS):
        plus = padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        minus = padded[1 - dr : 1 - dr + h, 1 - dc : 1 - dc + w]
        keep |= (sector == s) & (mag > minus) & (mag >= plus)
    keep &= mag > 0
    return keep


def hysteresis(mag: np.ndarray, nms: np.ndarray, low: float, high: float) -> np.ndarray:
    """8-connected tracing: keep weak ridge pixels whose component touches a
    strong seed."""
    weak = nms & (mag >= low)
    strong = nms & (mag >= high)
    if not strong.any():
        return np.zeros(mag.shape, dtype=bool)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    keep_ids = np.unique(labels[strong])
    return np.isin(labels, keep_ids[keep_ids > 0])

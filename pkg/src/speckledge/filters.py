"""Speckle-reduction filters applied before edge detection.

All windowed operations replicate the border row/column outward, so no
spurious dark frame is introduced.  Filters are pure functions on
GrayImage values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import GrayImage


@dataclass(frozen=True)
class LeeParams:
    """Enhanced Lee configuration: look count, odd window size, damping."""

    looks: float
    window: int = 7
    damping: float = 1.0

    def __post_init__(self) -> None:
        if self.looks <= 0:
            raise ValueError("looks must be positive")
        _check_window(self.window)
        if self.damping <= 0:
            raise ValueError("damping must be positive")


def _check_window(k: int, img: GrayImage | None = None) -> None:
    if k < 3 or k % 2 == 0:
        raise ValueError(f"window size must be odd and >= 3, got {k}")
    if img is not None and k > min(img.width, img.height):
        raise ValueError(f"window {k} exceeds image size {img.height}x{img.width}")


def boxcar(img: GrayImage, k: int) -> GrayImage:
    """k x k moving average with edge replication."""
    _check_window(k, img)
    out = ndimage.uniform_filter(img.data, size=k, mode="nearest")
    return GrayImage(np.clip(out, 0.0, 1.0))


def median_filter(img: GrayImage, k: int) -> GrayImage:
    """k x k moving median with edge replication."""
    _check_window(k, img)
    return GrayImage(ndimage.median_filter(img.data, size=k, mode="nearest"))


def enhanced_lee(img: GrayImage, params: LeeParams) -> GrayImage:
    """Adaptive Lee filter driven by the local coefficient of variation.

    With local mean m and local standard deviation s over the window,
    Ci = s/m is compared against the homogeneous-speckle bound Cu = 1/sqrt(L)
    and the point-target bound Cmax = sqrt(1 + 2/L):

      Ci <= Cu          fully homogeneous, output the local mean
      Cu < Ci < Cmax    blend m*W + center*(1-W),
                        W = exp(-damping * (Ci - Cu) / (Cmax - Ci))
      Ci >= Cmax        isolated point target, keep the center untouched

    The blend is continuous at both thresholds and the result always lies in
    the convex hull of {local mean, center value}.
    """
    k = params.window
    _check_window(k, img)
    data = img.data
    m = ndimage.uniform_filter(data, size=k, mode="nearest")
    m2 = ndimage.uniform_filter(data * data, size=k, mode="nearest")
    s = np.sqrt(np.clip(m2 - m * m, 0.0, None))
    ci = np.divide(s, m, out=np.zeros_like(s), where=m > 0)

    cu = 1.0 / np.sqrt(params.looks)
    cmax = np.sqrt(1.0 + 2.0 / params.looks)
    with np.errstate(divide="ignore", over="ignore"):
        w = np.exp(-params.damping * (ci - cu) / np.maximum(cmax - ci, 1e-300))
    blended = m * w + data * (1.0 - w)

    out = np.where(ci <= cu, m, np.where(ci >= cmax, data, blended))
    return GrayImage(np.clip(out, 0.0, 1.0))

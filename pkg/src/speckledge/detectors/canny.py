"""Classic smooth / differentiate / thin / track edge detector.

Thresholds are data-driven: the high threshold is a percentile of the nonzero
gradient magnitudes (taken before thinning), the low threshold a fixed
fraction of the high one.  This keeps one sweepable parameter (sigma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..raster import BinaryImage, GrayImage
from ._gradient import gaussian_smooth, hysteresis, nonmax_suppress, sobel_gradients


@dataclass(frozen=True)
class CannyConfig:
    sigma: float = 1.0
    high_percentile: float = 90.0
    low_ratio: float = 0.4

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.high_percentile < 100.0:
            raise ValueError("high_percentile must be in (0, 100)")
        if not 0.0 < self.low_ratio <= 1.0:
            raise ValueError("low_ratio must be in (0, 1]")


def canny_edges(img: GrayImage, config: CannyConfig | None = None) -> BinaryImage:
    if config is None:
        config = CannyConfig()
    smoothed = gaussian_smooth(img.data, config.sigma)
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)

    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return BinaryImage(np.zeros(mag.shape, dtype=bool))
    high = float(np.percentile(nonzero, config.high_percentile))
    low = config.low_ratio * high

    nms = nonmax_suppress(mag, gx, gy)
    return BinaryImage(hysteresis(mag, nms, low, high))

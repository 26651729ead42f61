"""Scale-space Sobel detector with coarse-to-fine edge tracking.

Edges are extracted independently at every smoothing scale (Sobel magnitude,
thinning, rank-based binarization), then chained from the coarsest scale down:
a pixel survives at a scale only if a survivor at the next coarser scale lies
within the tracking radius.  Edges that vanish under heavy smoothing, such as
speckle impulses, are discarded; persistent structure is kept at the finest
scale's localization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..raster import BinaryImage, GrayImage
from ._gradient import gaussian_smooth, nonmax_suppress, sobel_gradients

DEFAULT_SCALES = tuple(0.25 * k for k in range(2, 17))


@dataclass(frozen=True)
class MultiscaleConfig:
    scales: tuple[float, ...] = DEFAULT_SCALES
    delta_sigma: float = 0.25
    percentile: float = 90.0
    tracking_radius: int | None = None

    def __post_init__(self) -> None:
        if len(self.scales) == 0:
            raise ValueError("scales must be non-empty")
        if any(s <= 0 for s in self.scales):
            raise ValueError("scales must be positive")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly increasing")
        if self.delta_sigma <= 0:
            raise ValueError("delta_sigma must be positive")
        if not 0.0 < self.percentile < 100.0:
            raise ValueError("percentile must be in (0, 100)")
        if self.tracking_radius is not None and self.tracking_radius < 0:
            raise ValueError("tracking_radius must be non-negative")

    @property
    def effective_radius(self) -> int:
        if self.tracking_radius is not None:
            return self.tracking_radius
        return math.ceil(2.0 * self.delta_sigma / 0.25)


def _disk_footprint(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    dr, dc = np.meshgrid(span, span, indexing="ij")
    return dr * dr + dc * dc <= radius * radius


def _edges_at_scale(data: np.ndarray, sigma: float, percentile: float) -> np.ndarray:
    smoothed = gaussian_smooth(data, sigma)
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)
    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return np.zeros(data.shape, dtype=bool)
    cut = float(np.percentile(nonzero, percentile))
    return nonmax_suppress(mag, gx, gy) & (mag >= cut)


def multiscale_edges(
    img: GrayImage, config: MultiscaleConfig | None = None
) -> BinaryImage:
    if config is None:
        config = MultiscaleConfig()
    per_scale = [
        _edges_at_scale(img.data, sigma, config.percentile) for sigma in config.scales
    ]

    footprint = _disk_footprint(config.effective_radius)
    survivors = per_scale[-1]
    for edges in reversed(per_scale[:-1]):
        reachable = ndimage.binary_dilation(survivors, structure=footprint)
        survivors = edges & reachable
    return BinaryImage(survivors)

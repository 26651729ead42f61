"""Gravity-style edge strength from pairwise pixel attraction.

Each pixel attracts its 8 neighbours with a force proportional to a T-norm of
the two (normalized) gray masses and inversely proportional to squared
distance.  The magnitude of the vector sum, scaled into [0, 1], is the edge
strength: uniform regions cancel, boundaries leave a net pull.

The ``fu9x9`` variant replaces each 3x3 window value with the mean of the
corresponding 3x3 block of the surrounding 9x9 region, trading a little
localization for strong speckle suppression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from ..raster import EdgeStrengthMap, GrayImage

# Reference force magnitude: unit masses along one straight boundary (a side
# neighbour plus its two diagonal flanks).  A few asymmetric corner
# configurations exceed this slightly, so the scaled strength is clamped.
MAX_RESULTANT = 1.0 + math.sqrt(2.0) / 2.0


def tnorm_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a * b


def tnorm_minimum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.minimum(a, b)


def tnorm_lukasiewicz(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(a + b - 1.0, 0.0)


T_NORMS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "product": tnorm_product,
    "minimum": tnorm_minimum,
    "lukasiewicz": tnorm_lukasiewicz,
}


@dataclass(frozen=True)
class GravitationalConfig:
    """Knobs for the force-map computation.

    tnorm: mass-combination rule, one of T_NORMS.
    neighbourhood: "3x3" (direct neighbours) or "9x9" (block means).
    """

    tnorm: str = "product"
    neighbourhood: str = "3x3"

    def __post_init__(self) -> None:
        if self.tnorm not in T_NORMS:
            raise ValueError(f"unknown tnorm {self.tnorm!r}")
        if self.neighbourhood not in ("3x3", "9x9"):
            raise ValueError(f"unknown neighbourhood {self.neighbourhood!r}")


# (dr, dc, inverse squared distance) for the 8 neighbours.
_NEIGHBOURS = tuple(
    (dr, dc, 1.0 / float(dr * dr + dc * dc))
    for dr in (-1, 0, 1)
    for dc in (-1, 0, 1)
    if (dr, dc) != (0, 0)
)


def fu_window(arr: np.ndarray) -> list[np.ndarray]:
    """Nine 3x3 block means of the 9x9 neighbourhood, ordered row-major over
    block offsets (dr, dc) in {-1, 0, 1}; index 4 is the central block.

    The 9x9 patch is taken with edge replication first, then averaged per
    block, so border blocks average replicated pixels."""
    padded = np.pad(arr, 4, mode="edge")
    # Every block center lies at least one cell inside the padded array, so
    # the 3x3 means are plain averages of (replicated) patch values.
    means = ndimage.uniform_filter(padded, size=3, mode="nearest")
    h, w = arr.shape
    blocks = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            r0 = 4 + 3 * dr
            c0 = 4 + 3 * dc
            blocks.append(means[r0 : r0 + h, c0 : c0 + w])
    return blocks


def gravitational_force_map(
    img: GrayImage, config: GravitationalConfig | None = None
) -> EdgeStrengthMap:
    """Edge-strength map in [0, 1]; same shape as the input."""
    if config is None:
        config = GravitationalConfig()
    tnorm = T_NORMS[config.tnorm]
    data = img.data
    if not (data > 0).all():
        raise ValueError("gravitational detector requires strictly positive pixels")

    if config.neighbourhood == "9x9":
        blocks = fu_window(data)
        center = blocks[4]
        neighbour = {
            (dr, dc): blocks[(dr + 1) * 3 + (dc + 1)]
            for dr in (-1, 0, 1)
            for dc in (-1, 0, 1)
            if (dr, dc) != (0, 0)
        }
    else:
        padded = np.pad(data, 1, mode="edge")
        h, w = data.shape
        center = data
        neighbour = {
            (dr, dc): padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
            for dr, dc, _ in _NEIGHBOURS
        }

    fx = np.zeros_like(center)
    fy = np.zeros_like(center)
    for dr, dc, inv_d2 in _NEIGHBOURS:
        t = tnorm(center, neighbour[(dr, dc)])
        norm = math.sqrt(dr * dr + dc * dc)
        fx += t * inv_d2 * (dc / norm)
        fy += t * inv_d2 * (dr / norm)

    strength = np.hypot(fx, fy) / MAX_RESULTANT
    return EdgeStrengthMap(np.minimum(strength, 1.0))

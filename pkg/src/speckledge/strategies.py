"""Experiment typology for multi-channel edge detection.

Three strategies order the detection (D), cross-channel aggregation (A), and
binarization (B) steps:

  DB(channel): detect on one named channel, binarize.
  ADB: aggregate the channels by arithmetic mean, detect, binarize.
  DAB: detect per channel, aggregate the strength maps, binarize.  Only
       meaningful for detectors that emit strength maps; detectors whose
       output is already binary are rejected.

Speckle filters run per channel on squared values (intensity domain) and the
result is mapped back through a square root before detection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .detectors import (
    CannyConfig,
    GravitationalConfig,
    MultiscaleConfig,
    canny_edges,
    gravitational_force_map,
    multiscale_edges,
)
from .filters import LeeParams, boxcar, enhanced_lee, median_filter
from .metrics import BdmConfig, baddeley_delta
from .raster import BinaryImage, EdgeStrengthMap, GrayImage, MultiChannelImage

STRENGTH_DETECTORS = ("gravitational", "gravitational-fu")
BINARY_DETECTORS = ("canny", "multiscale")
DETECTOR_KINDS = STRENGTH_DETECTORS + BINARY_DETECTORS

FILTER_KINDS = ("none", "boxcar", "median", "enhanced-lee")


@dataclass(frozen=True)
class Strategy:
    kind: str
    channel: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("DB", "DAB", "ADB"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "DB" and not self.channel:
            raise ValueError("DB strategy requires a channel name")
        if self.kind != "DB" and self.channel is not None:
            raise ValueError(f"{self.kind} strategy takes no channel")

    def __str__(self) -> str:
        if self.kind == "DB":
            return f"DB({self.channel})"
        return self.kind


@dataclass(frozen=True)
class FilterSpec:
    """kind "none" passes channels through untouched.  window and looks and
    damping only apply to the kinds that use them."""

    kind: str = "none"
    window: int = 7
    looks: float = 4.0
    damping: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Inclusive arithmetic grid low, low+step, ..., high."""

    low: float
    high: float
    step: float

    def __post_init__(self) -> None:
        if self.low > self.high:
            raise ValueError("sweep low exceeds high")
        if self.step <= 0:
            raise ValueError("sweep step must be positive")

    def values(self) -> tuple[float, ...]:
        count = int(round((self.high - self.low) / self.step)) + 1
        grid = tuple(round(self.low + i * self.step, 12) for i in range(count))
        return tuple(v for v in grid if v <= self.high + 1e-12)


THRESHOLD_SWEEP = SweepSpec(0.05, 0.15, 0.01)
SIGMA_SWEEP = SweepSpec(0.3, 1.5, 0.1)


def aggregate_mean(images: list[GrayImage]) -> GrayImage:
    if not images:
        raise ValueError("nothing to aggregate")
    shape = images[0].data.shape
    if any(img.data.shape != shape for img in images):
        raise ValueError("image dimensions differ")
    stacked = np.stack([img.data for img in images])
    return GrayImage(stacked.mean(axis=0))


def threshold(esm: EdgeStrengthMap, t: float) -> BinaryImage:
    if not 0.0 <= t <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    return BinaryImage(esm.data >= t)


def apply_filter(img: GrayImage, spec: FilterSpec) -> GrayImage:
    if spec.kind == "none":
        return img
    intensity = GrayImage(img.data * img.data)
    if spec.kind == "boxcar":
        filtered = boxcar(intensity, spec.window)
    elif spec.kind == "median":
        filtered = median_filter(intensity, spec.window)
    else:
        params = LeeParams(looks=spec.looks, window=spec.window, damping=spec.damping)
        filtered = enhanced_lee(intensity, params)
    return GrayImage(np.sqrt(filtered.data))


def _gravitational_config(detector: str, config: object | None) -> GravitationalConfig:
    if config is None:
        neighbourhood = "9x9" if detector == "gravitational-fu" else "3x3"
        return GravitationalConfig(neighbourhood=neighbourhood)
    if not isinstance(config, GravitationalConfig):
        raise TypeError("expected GravitationalConfig")
    return config


def detect_strength(
    img: GrayImage, detector: str, config: object | None = None
) -> EdgeStrengthMap:
    if detector not in STRENGTH_DETECTORS:
        raise ValueError(f"{detector!r} does not produce strength maps")
    return gravitational_force_map(img, _gravitational_config(detector, config))


def detect_binary(
    img: GrayImage, detector: str, config: object | None = None
) -> BinaryImage:
    if detector == "canny":
        if config is not None and not isinstance(config, CannyConfig):
            raise TypeError("expected CannyConfig")
        return canny_edges(img, config)
    if detector == "multiscale":
        if config is not None and not isinstance(config, MultiscaleConfig):
            raise TypeError("expected MultiscaleConfig")
        return multiscale_edges(img, config)
    raise ValueError(f"{detector!r} does not produce binary maps directly")


def _check_strategy(mci: MultiChannelImage, strategy: Strategy, detector: str) -> None:
    if detector not in DETECTOR_KINDS:
        raise ValueError(f"unknown detector {detector!r}")
    if strategy.kind == "DB" and strategy.channel not in mci.tags:
        raise ValueError(f"channel {strategy.channel!r} not present")
    if strategy.kind == "DAB" and detector in BINARY_DETECTORS:
        raise ValueError(f"DAB is undefined for {detector!r}: its output is already binary")


def strength_map(
    mci: MultiChannelImage,
    strategy: Strategy,
    detector: str,
    detector_config: object | None = None,
    filter_spec: FilterSpec | None = None,
) -> EdgeStrengthMap:
    """Detection and aggregation steps only, for detectors that emit strength
    maps; binarization is left to the caller (it is the swept step)."""
    _check_strategy(mci, strategy, detector)
    if detector not in STRENGTH_DETECTORS:
        raise ValueError(f"{detector!r} does not produce strength maps")
    if filter_spec is None:
        filter_spec = FilterSpec()
    filtered = {tag: apply_filter(mci[tag], filter_spec) for tag in mci.tags}

    if strategy.kind == "DB":
        return detect_strength(filtered[strategy.channel], detector, detector_config)
    if strategy.kind == "ADB":
        merged = aggregate_mean([filtered[tag] for tag in mci.tags])
        return detect_strength(merged, detector, detector_config)
    maps = [
        detect_strength(filtered[tag], detector, detector_config) for tag in mci.tags
    ]
    return EdgeStrengthMap(aggregate_mean(maps).data)


def run_strategy(
    mci: MultiChannelImage,
    strategy: Strategy,
    detector: str,
    detector_config: object | None = None,
    filter_spec: FilterSpec | None = None,
    threshold_value: float | None = None,
) -> BinaryImage:
    _check_strategy(mci, strategy, detector)
    if detector in STRENGTH_DETECTORS:
        if threshold_value is None:
            raise ValueError("strength detectors need a threshold")
        esm = strength_map(mci, strategy, detector, detector_config, filter_spec)
        return threshold(esm, threshold_value)

    if filter_spec is None:
        filter_spec = FilterSpec()
    filtered = {tag: apply_filter(mci[tag], filter_spec) for tag in mci.tags}
    if strategy.kind == "DB":
        return detect_binary(filtered[strategy.channel], detector, detector_config)
    merged = aggregate_mean([filtered[tag] for tag in mci.tags])
    return detect_binary(merged, detector, detector_config)


def sweep_best(
    objective: Callable[[float], BinaryImage],
    gt: BinaryImage,
    grid: Iterable[float],
    metric_config: BdmConfig | None = None,
) -> tuple[float, float]:
    """Exhaustive scan; the smaller parameter wins ties."""
    params = sorted(grid)
    if not params:
        raise ValueError("empty sweep grid")
    best_param = None
    best_score = float("inf")
    for param in params:
        score = baddeley_delta(objective(param), gt, metric_config)
        if score < best_score:
            best_param = param
            best_score = score
    return best_param, best_score

"""Phantom mosaics and Monte-Carlo multi-look amplitude simulation.

Each pixel of class c draws an intensity from Gamma(shape=L, mean=mu_c),
the standard multi-look speckle model for a homogeneous area; the stored
gray value is the amplitude sqrt(I) divided by a fixed saturation amplitude
and clipped to 1, so every simulation in a batch shares one radiometric
scale.  Channels are simulated independently.

Seeding: each (sim_index, channel) pair gets its own generator whose seed
is derived from the master seed by a splitmix64-style multiply-xor-shift
avalanche over the tuple, so any subset of simulations is reproducible in
isolation and parallel execution order cannot change results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .raster import CHANNEL_TAGS, BinaryImage, GrayImage, _frozen

PHANTOM_KINDS = ("strips", "checkerboard", "nested-squares")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Integer class-id raster defining the mosaic geometry."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("LabelMap requires a non-empty 2-D array")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("LabelMap requires integer class ids")
        if arr.min() < 0:
            raise ValueError("LabelMap class ids must be non-negative")
        object.__setattr__(self, "data", _frozen(arr.astype(np.int32)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def class_ids(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.unique(self.data))


@dataclass(frozen=True)
class ClassModel:
    """Per-class radiometry: mean intensity per channel and look count."""

    class_id: int
    mean_intensity: dict[str, float]
    looks: float

    def __post_init__(self) -> None:
        if self.looks <= 0:
            raise ValueError(f"class {self.class_id}: looks must be positive")
        for tag, mu in self.mean_intensity.items():
            if tag not in CHANNEL_TAGS:
                raise ValueError(f"class {self.class_id}: unknown channel {tag!r}")
            if mu <= 0:
                raise ValueError(f"class {self.class_id}: mean intensity for {tag} must be positive")


@dataclass(frozen=True)
class SimulationSpec:
    """A full Monte-Carlo batch: geometry, radiometry, count and seed."""

    labelmap: LabelMap
    classes: tuple[ClassModel, ...]
    channels: tuple[str, ...]
    count: int
    master_seed: int
    saturation: float

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.saturation <= 0:
            raise ValueError("saturation must be positive")
        by_id = {c.class_id: c for c in self.classes}
        if len(by_id) != len(self.classes):
            raise ValueError("duplicate class ids")
        for tag in self.channels:
            if tag not in CHANNEL_TAGS:
                raise ValueError(f"unknown channel {tag!r}")
        for cid in self.labelmap.class_ids:
            model = by_id.get(cid)
            if model is None:
                raise ValueError(f"labelmap references class {cid} with no ClassModel")
            missing = [t for t in self.channels if t not in model.mean_intensity]
            if missing:
                raise ValueError(f"class {cid} lacks mean intensity for {missing}")

    def class_model(self, class_id: int) -> ClassModel:
        for c in self.classes:
            if c.class_id == class_id:
                return c
        raise KeyError(class_id)


def default_saturation(classes: Sequence[ClassModel], channels: Sequence[str]) -> float:
    """Amplitude mapped to gray 255: the 3-sigma intensity point of the
    brightest class, expressed in amplitude units sqrt(mu_max * (1 + 3/sqrt(L)))."""
    mu_max = max(c.mean_intensity[t] for c in classes for t in channels if t in c.mean_intensity)
    l_min = min(c.looks for c in classes)
    return float(np.sqrt(mu_max * (1.0 + 3.0 / np.sqrt(l_min))))


def generate_phantom(kind: str, size: int, n_classes: int) -> LabelMap:
    """Deterministic class mosaics for edge experiments.

    strips          horizontal bands of equal height, class id top to bottom
    checkerboard    an 8x8 board of square tiles, class (ti + tj) mod n
    nested-squares  concentric square rings by Chebyshev distance from center
    """
    if size < 16:
        raise ValueError(f"phantom size must be >= 16, got {size}")
    if not 2 <= n_classes <= 8:
        raise ValueError(f"n_classes must be in [2, 8], got {n_classes}")
    rows, cols = np.indices((size, size))
    if kind == "strips":
        labels = np.minimum(rows * n_classes // size, n_classes - 1)
    elif kind == "checkerboard":
        tile = max(size // 8, 1)
        labels = ((rows // tile) + (cols // tile)) % n_classes
    elif kind == "nested-squares":
        center = (size - 1) / 2.0
        ring = np.maximum(np.abs(rows - center), np.abs(cols - center))
        labels = np.minimum((ring * n_classes / (center + 0.5)).astype(np.int64), n_classes - 1)
    else:
        raise ValueError(f"unknown phantom kind {kind!r}, expected one of {PHANTOM_KINDS}")
    return LabelMap(labels.astype(np.int32))


def ground_truth_edges(labelmap: LabelMap) -> BinaryImage:
    """Thin one-sided class boundary: a pixel is an edge iff its label differs
    from its right or down neighbour."""
    lab = labelmap.data
    edges = np.zeros(lab.shape, dtype=bool)
    edges[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    edges[:-1, :] |= lab[:-1, :] != lab[1:, :]
    return BinaryImage(edges)


def _mix64(z: int) -> int:
    """splitmix64 finalizer: multiply-xor-shift avalanche on 64 bits."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, sim_index: int, channel: str) -> int:
    """Per-(sim_index, channel) generator seed, avalanched from the master seed."""
    h = _mix64(master_seed & _MASK64)
    h = _mix64(h ^ (sim_index + 1))
    h = _mix64(h ^ (CHANNEL_TAGS.index(channel) + 1))
    return h


def simulate_channel(spec: SimulationSpec, channel: str, sim_index: int) -> GrayImage:
    """One Monte-Carlo amplitude image for one channel of one simulation.

    Deterministic given (master_seed, sim_index, channel); simulations for
    distinct pairs are independent.
    """
    if channel not in spec.channels:
        raise ValueError(f"channel {channel!r} not in spec channels {spec.channels}")
    if not 0 <= sim_index < spec.count:
        raise ValueError(f"sim_index {sim_index} outside [0, {spec.count})")
    rng = np.random.Generator(np.random.PCG64(derive_seed(spec.master_seed, sim_index, channel)))
    lab = spec.labelmap.data
    intensity = np.empty(lab.shape, dtype=np.float64)
    for cid in spec.labelmap.class_ids:
        model = spec.class_model(cid)
        mask = lab == cid
        mu = model.mean_intensity[channel]
        intensity[mask] = rng.gamma(shape=model.looks, scale=mu / model.looks, size=int(mask.sum()))
    amplitude = np.sqrt(intensity)
    return GrayImage(np.minimum(amplitude / spec.saturation, 1.0))

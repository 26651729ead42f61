"""Edge detectors: gravitational force maps (plain and block-mean variants),
the classic smooth/threshold/track detector, and scale-space Sobel."""

from .canny import CannyConfig, canny_edges
from .gravitational import (
    MAX_RESULTANT,
    T_NORMS,
    GravitationalConfig,
    fu_window,
    gravitational_force_map,
    tnorm_lukasiewicz,
    tnorm_minimum,
    tnorm_product,
)
from .multiscale import DEFAULT_SCALES, MultiscaleConfig, multiscale_edges

__all__ = [
    "CannyConfig",
    "canny_edges",
    "MAX_RESULTANT",
    "T_NORMS",
    "GravitationalConfig",
    "fu_window",
    "gravitational_force_map",
    "tnorm_lukasiewicz",
    "tnorm_minimum",
    "tnorm_product",
    "DEFAULT_SCALES",
    "MultiscaleConfig",
    "multiscale_edges",
]

"""Exact Strebel-ray computations on half-translation surfaces."""

from .numeric import LogRatio, Scalar, parse_scalar, scalar_cmp
from .surface import Surface, SurfaceError, geodesic_flow, load_surface, origami, validate

__all__ = [
    "LogRatio",
    "Scalar",
    "parse_scalar",
    "scalar_cmp",
    "Surface",
    "SurfaceError",
    "geodesic_flow",
    "load_surface",
    "origami",
    "validate",
]
__version__ = "0.1.0"

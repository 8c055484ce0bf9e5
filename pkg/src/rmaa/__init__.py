"""Curvilinear software rasterization with analytic edge anti-aliasing.

Rectilinear, STMap and Perspective Map rasterizers share the edge-matrix
math in :mod:`rmaa.geometry`; :mod:`rmaa.maps` generates the lookup maps and
:mod:`rmaa.compositor` merges fractional coverage front to back.
"""
from ._validation import OddResolutionError, ValidationError
from .compositor import Framebuffer, clip_mask, merge_data, merge_mask, sort_front_to_back
from .estimators import LensDistortion, UniversalPerspective
from .geometry import (
    DegenerateFragmentError,
    DegenerateTriangleError,
    Triangle,
    barycentric_matrix_planar,
    barycentric_matrix_spherical,
    coverage,
    edge_matrix,
    edge_weights,
    normalize_edge_matrix,
    perspective_correct,
)
from .map_raster import (
    build_min_max_pyramid,
    distance_triangle,
    map_jacobian,
    rasterize_perspective_map,
    rasterize_stmap,
    render_region,
)
from .raster import BoundingBox, GradientSample, StepVariant, bounding_box_expanded, pix_step, rasterize_rectilinear
from .render import render
from .scene import Scene, load_scene

__all__ = [
    "BoundingBox",
    "DegenerateFragmentError",
    "DegenerateTriangleError",
    "Framebuffer",
    "GradientSample",
    "LensDistortion",
    "OddResolutionError",
    "Scene",
    "StepVariant",
    "Triangle",
    "UniversalPerspective",
    "ValidationError",
    "barycentric_matrix_planar",
    "barycentric_matrix_spherical",
    "bounding_box_expanded",
    "build_min_max_pyramid",
    "clip_mask",
    "coverage",
    "distance_triangle",
    "edge_matrix",
    "edge_weights",
    "load_scene",
    "map_jacobian",
    "merge_data",
    "merge_mask",
    "normalize_edge_matrix",
    "perspective_correct",
    "pix_step",
    "rasterize_perspective_map",
    "rasterize_rectilinear",
    "rasterize_stmap",
    "render",
    "render_region",
    "sort_front_to_back",
]

__version__ = "0.1.0"

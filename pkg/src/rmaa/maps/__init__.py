"""Rasterization map generators and conversions."""
from .convert import invert_stmap, perspective_map_to_stmap
from .lens import lens_distort, lens_distort_stmap, lens_stages
from .screens import screen_array_perspective_map
from .types import LensParams, PerspectiveMap, STMap, UniversalParams, texel_centers, texel_grid
from .universal import (
    FieldOfViewError,
    mapping_vector,
    universal_direction,
    universal_perspective_map,
    universal_project,
    universal_st,
    universal_stmap,
    universal_view_coord,
    vignette,
)

__all__ = [
    "FieldOfViewError",
    "LensParams",
    "PerspectiveMap",
    "STMap",
    "UniversalParams",
    "invert_stmap",
    "lens_distort",
    "lens_distort_stmap",
    "lens_stages",
    "mapping_vector",
    "perspective_map_to_stmap",
    "screen_array_perspective_map",
    "texel_centers",
    "texel_grid",
    "universal_direction",
    "universal_perspective_map",
    "universal_project",
    "universal_st",
    "universal_stmap",
    "universal_view_coord",
    "vignette",
]

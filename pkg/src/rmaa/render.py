"""Scene rendering through the rectilinear, STMap and Perspective Map paths."""
from __future__ import annotations

import math
import warnings

import numpy as np

from ._validation import ValidationError, check_even_size, check_fov_type
from .compositor import Framebuffer, sort_front_to_back
from .geometry import DegenerateTriangleError, Triangle
from .map_raster import distance_triangle, prepare_map, rasterize_perspective_map, rasterize_stmap
from .maps.types import PerspectiveMap, STMap
from .maps.universal import FieldOfViewError, mapping_vector
from .raster import StepVariant, rasterize_rectilinear
from .scene import checker

MODES = ("rect", "stmap", "pmap")


def project_rectilinear(points, fov, fov_type, aspect):
    """STMap-space position of view-space points under a pinhole camera.

    The camera looks down +z; the AOV ``fov`` (radians, below 180 deg) spans
    the frame axis selected by ``fov_type``.
    """
    if not 0.0 < fov < math.pi:
        raise FieldOfViewError(f"rectilinear projection needs an angle of view in (0, 180) deg, got {math.degrees(fov):g}")
    p = np.asarray(points, dtype=np.float64)
    u = mapping_vector(aspect, fov_type)
    return p[..., :2] / p[..., 2:3] / math.tan(fov / 2) / (2.0 * u) + 0.5


def _shade(attrs, checker_n):
    rgba = attrs[:, :4].copy()
    if checker_n:
        rgba[:, :3] *= checker(attrs[:, 4:6], checker_n)[:, None]
    return rgba


def render(
    scene,
    size,
    mode="rect",
    rmap=None,
    fov=math.pi / 2,
    fov_type="h",
    aa=True,
    variant=StepVariant.LENGTH,
    apply_vignette=True,
):
    """Rasterize a scene front to back into a framebuffer.

    Parameters
    ----------
    scene : Scene
    size : (int, int)
        Framebuffer ``(width, height)``; must match the map size.
    mode : {"rect", "stmap", "pmap"}
        Rectilinear pixel-space rasterization, a distort STMap, or a
        Perspective Map.
    rmap : STMap or PerspectiveMap, optional
        Required for the map modes.
    fov, fov_type
        Camera angle of view for ``rect`` and ``stmap`` (the STMap space).
    aa : bool
        Analytic anti-aliasing with front-to-back merging; otherwise binary
        coverage with a depth test.
    apply_vignette : bool
        Multiply the finished image by the map's vignette channel if present.

    Returns
    -------
    Framebuffer
        Background-filled, with the depth (or distance) pass resolved before
        filling in ``fb.depth``.
    """
    width, height = check_even_size(*size, what="framebuffer")
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
    fov_type = check_fov_type(fov_type)
    prep = None
    if mode != "rect":
        kind = STMap if mode == "stmap" else PerspectiveMap
        if not isinstance(rmap, kind):
            raise ValidationError(f"mode {mode} needs a {kind.__name__}")
        if rmap.size != (width, height):
            raise ValidationError(f"map size {rmap.width}x{rmap.height} does not match framebuffer {width}x{height}")
        if isinstance(rmap, STMap) and rmap.kind != "distort":
            raise ValidationError("rasterization needs a distort STMap")
        prep = prepare_map(rmap)

    fb = Framebuffer(width, height)
    triangles = sort_front_to_back(
        [Triangle(t.positions, None, t.attributes, n) for n, t in enumerate(scene.triangles)]
    )
    for tri in triangles:
        try:
            frags = _rasterize(tri, mode, prep, fov, fov_type, (width, height), aa, variant)
        except DegenerateTriangleError as exc:
            warnings.warn(f"triangle {tri.index} skipped: {exc}", stacklevel=2)
            continue
        if len(frags) == 0:
            continue
        rgba = _shade(frags.attributes, scene.checker)
        data = np.concatenate([rgba[:, :3], np.ones((len(rgba), 1))], axis=1)
        if aa:
            fb.merge(frags, data, alpha=np.clip(rgba[:, 3], 0.0, 1.0))
        else:
            keep = rgba[:, 3] >= 0.5
            frags.coverage = frags.coverage * keep
            fb.depth_test(frags, data)
    if aa:
        fb.depth = fb.resolved_depth()
    fb.fill_background(scene.background)
    if apply_vignette and rmap is not None and rmap.vignette is not None:
        fb.data[..., :3] *= rmap.vignette[..., None]
    return fb


def _rasterize(tri, mode, prep, fov, fov_type, size, aa, variant):
    v = tri.vertices
    if mode == "pmap":
        return rasterize_perspective_map(distance_triangle(v, tri.attributes, tri.index), prep, aa, variant)
    if np.any(v[:, 2] <= 0):
        raise DegenerateTriangleError("vertex at or behind the camera plane (scenes are not clipped)")
    width, height = size
    st = project_rectilinear(v, fov, fov_type, width / height)
    inv_z = 1.0 / v[:, 2]
    if mode == "stmap":
        return rasterize_stmap(Triangle(st, inv_z, tri.attributes, tri.index), prep, aa, variant)
    pix = st * [width, height]
    return rasterize_rectilinear(
        Triangle(pix, inv_z, tri.attributes, tri.index), size, aa, variant, cull_backfaces=False
    )

"""Rasterization through lookup maps.

Screen pixel ``(i, j)`` reads map texel ``[j, i]``; the map and the target
framebuffer share their resolution.  Screen-space derivatives are replaced by
central differences of the map texels, chained through the (linear) edge
rows: ``grad(lambda_i) = chi_i @ J``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import EPS
from .geometry import (
    DegenerateTriangleError,
    Triangle,
    barycentric_matrix_planar,
    barycentric_matrix_spherical,
)
from .maps._diff import central_differences
from .maps.types import PerspectiveMap, STMap
from .raster import Fragments, GradientSample, StepVariant, emit, offset_triangle, pix_step

LEAF_TILE = 8


def map_jacobian(m):
    """Per-texel derivatives of the map values w.r.t. screen pixels.

    Returns an array of shape ``(H, W, C, 2)`` whose last axis is
    ``(d/dx, d/dy)``.  Differences are central where both neighbours are
    valid, one-sided next to masked texels and zero on masked or isolated
    texels.
    """
    valid = m.valid
    ddx, ddy = central_differences(m.texels, valid)
    jac = np.stack([ddx, ddy], axis=-1)
    jac[~valid] = 0.0
    return jac


@dataclass
class MinMaxPyramid:
    """Min/max bounds of ``f +- |grad f| / 2`` over square power-of-two tiles.

    ``levels[0]`` has one ``(min_s, min_t, max_s, max_t)`` texel per pixel,
    padded to a power of two with empty intervals; each further level halves
    the resolution.  Masked texels hold empty intervals and never overlap.
    """

    levels: list
    width: int
    height: int

    @property
    def n_levels(self):
        return len(self.levels)

    @property
    def empty(self):
        root = self.levels[-1][0, 0]
        return not (root[0] <= root[2] and root[1] <= root[3])


def footprint(stmap, jac=None):
    """Per-texel ``(s - h_s, t - h_t, s + h_s, t + h_t)`` with ``h = |grad| / 2``."""
    if jac is None:
        jac = map_jacobian(stmap)
    half = 0.5 * np.hypot(jac[..., 0], jac[..., 1])
    f = stmap.texels.astype(np.float64)
    box = np.concatenate([f - half, f + half], axis=-1)
    box[~stmap.valid] = [np.inf, np.inf, -np.inf, -np.inf]
    return box


def build_min_max_pyramid(stmap, jac=None):
    h, w = stmap.height, stmap.width
    size = 1 << max(0, math.ceil(math.log2(max(w, h))))
    base = np.empty((size, size, 4))
    base[...] = [np.inf, np.inf, -np.inf, -np.inf]
    base[:h, :w] = footprint(stmap, jac)
    levels = [base]
    while levels[-1].shape[0] > 1:
        cur = levels[-1]
        n = cur.shape[0] // 2
        quad = cur.reshape(n, 2, n, 2, 4)
        lo = quad[..., :2].min(axis=(1, 3))
        hi = quad[..., 2:].max(axis=(1, 3))
        levels.append(np.concatenate([lo, hi], axis=-1))
    return MinMaxPyramid(levels, w, h)


def _overlaps(box, bb):
    return (box[..., 0] <= bb[2]) & (box[..., 2] >= bb[0]) & (box[..., 1] <= bb[3]) & (box[..., 3] >= bb[1])


def test_bb(stmap, bb, jac=None):
    """Per-pixel containment test: the footprint lies inside ``bb``.

    ``bb = (s_min, t_min, s_max, t_max)``; lower bounds inclusive, upper
    bounds exclusive.
    """
    box = footprint(stmap, jac)
    return (box[..., 0] >= bb[0]) & (box[..., 1] >= bb[1]) & (box[..., 2] < bb[2]) & (box[..., 3] < bb[3])


test_bb.__test__ = False  # not a pytest test


def render_region(pyr, bb):
    """Boolean ``(H, W)`` mask of pixels whose footprint overlaps ``bb``.

    Overlapping nodes are refined from the root down to ``8 x 8`` tiles, then
    each pixel of a surviving tile is tested individually.  Every pixel that
    passes :func:`test_bb` is included.
    """
    bb = np.asarray(bb, dtype=np.float64)
    region = np.zeros((pyr.height, pyr.width), dtype=bool)
    if pyr.empty or not np.all(np.isfinite(bb)):
        return region
    leaf_level = min(int(math.log2(LEAF_TILE)), pyr.n_levels - 1)
    nodes = np.zeros((1, 2), dtype=int)  # (row, col) at the current level
    for level in range(pyr.n_levels - 1, leaf_level - 1, -1):
        data = pyr.levels[level]
        nodes = nodes[_overlaps(data[nodes[:, 0], nodes[:, 1]], bb)]
        if len(nodes) == 0:
            return region
        if level > leaf_level:
            nodes = (2 * nodes[:, None, :] + np.array([[0, 0], [0, 1], [1, 0], [1, 1]])).reshape(-1, 2)
    tile = 1 << leaf_level
    base = pyr.levels[0]
    for r, c in nodes:
        r0, c0 = r * tile, c * tile
        if r0 >= pyr.height or c0 >= pyr.width:
            continue
        block = base[r0 : r0 + tile, c0 : c0 + tile]
        hit = _overlaps(block, bb)
        region[r0 : r0 + tile, c0 : c0 + tile] |= hit[: pyr.height - r0, : pyr.width - c0]
    return region


@dataclass
class PreparedMap:
    """A map with its cached Jacobian (and pyramid for STMaps)."""

    map: STMap | PerspectiveMap
    jacobian: np.ndarray
    pyramid: MinMaxPyramid | None = None

    @property
    def size(self):
        return self.map.width, self.map.height


def prepare_map(m):
    """Precompute derivatives (and the min/max pyramid for STMaps)."""
    if isinstance(m, PreparedMap):
        return m
    jac = map_jacobian(m)
    if isinstance(m, STMap):
        return PreparedMap(m, jac, build_min_max_pyramid(m, jac))
    return PreparedMap(m, jac)


def _coverage(lam, grad, aa, variant):
    if not aa:
        return np.all(lam >= 0.0, axis=1).astype(np.float64)
    xi = pix_step(GradientSample(lam, grad[..., 0], grad[..., 1]), variant)
    return xi.prod(axis=1)


def _empty(tri):
    return Fragments.empty(None if tri.attributes is None else tri.attributes.shape[1])


def rasterize_stmap(tri, stmap, aa=True, variant=StepVariant.LENGTH):
    """Rasterize a triangle given in STMap space through a distort STMap.

    Coverage is the product of pixel-stepped linear barycentrics; the
    winding is irrelevant.  Soft bounds masks scale the coverage and masked
    texels emit nothing.  ``inv_w`` carries inverse vertex depth.
    """
    prep = prepare_map(stmap)
    m = prep.map
    verts = tri.vertices[:, :2]
    chi = barycentric_matrix_planar(*verts)

    # widest possible anti-aliasing reach of each edge over the map
    grad_len = np.hypot(*np.einsum("ik,hwkd->dhwi", chi[:, :2], prep.jacobian))
    reach = 0.5 * grad_len.reshape(-1, 3).max(axis=0)
    try:
        support = offset_triangle(chi, reach)
    except DegenerateTriangleError:
        support = verts
    bb = np.concatenate([support.min(axis=0), support.max(axis=0)])
    region = render_region(prep.pyramid, bb) & m.valid
    ys, xs = np.nonzero(region)
    if len(xs) == 0:
        return _empty(tri)

    f = m.texels[ys, xs].astype(np.float64)
    lam = np.column_stack([f, np.ones(len(f))]) @ chi.T
    grad = np.einsum("ik,nkd->nid", chi[:, :2], prep.jacobian[ys, xs])
    cov = _coverage(lam, grad, aa, variant) * m.mask[ys, xs]
    return emit(xs, ys, cov, lam, tri)


def rasterize_perspective_map(tri, pm, aa=True, variant=StepVariant.LENGTH):
    """Rasterize a view-space triangle through a Perspective Map.

    Spherical barycentrics ``lambda = G . chi`` drive coverage; with ``aa``
    off the mask is the conjunction ``lambda_i >= 0``.  The distance pass
    replaces depth: ``inv_w`` must hold inverse vertex distances, see
    :func:`distance_triangle`.
    """
    prep = prepare_map(pm)
    m = prep.map
    verts = tri.vertices
    if verts.shape[1] != 3:
        raise ValueError("Perspective Map rasterization needs view-space 3D vertices")
    chi = barycentric_matrix_spherical(*verts)
    ys, xs = np.nonzero(m.valid)
    g = m.texels[ys, xs].astype(np.float64)
    lam = g @ chi.T
    grad = np.einsum("ik,nkd->nid", chi, prep.jacobian[ys, xs])
    if aa:
        # drop pixels that are out of reach of every edge blur before stepping
        near = np.all(lam > -0.5 * np.hypot(grad[..., 0], grad[..., 1]) - EPS, axis=1)
        ys, xs, lam, grad = ys[near], xs[near], lam[near], grad[near]
    cov = _coverage(lam, grad, aa, variant) * m.mask[ys, xs]
    return emit(xs, ys, cov, lam, tri)


def distance_triangle(vertices, attributes=None, index=0):
    """View-space triangle carrying inverse vertex distances for the spherical path."""
    v = np.asarray(vertices, dtype=np.float64)
    return Triangle(v, 1.0 / np.linalg.norm(v, axis=1), attributes, index)


__all__ = [
    "MinMaxPyramid",
    "PreparedMap",
    "build_min_max_pyramid",
    "distance_triangle",
    "footprint",
    "map_jacobian",
    "prepare_map",
    "rasterize_perspective_map",
    "rasterize_stmap",
    "render_region",
    "test_bb",
]

"""Rectilinear half-space rasterization with RMAA edge anti-aliasing.

Pixel ``(i, j)`` covers ``[i, i+1] x [j, j+1]`` and is sampled at its center
``(i + 0.5, j + 0.5)``; ``i`` runs along columns (x) and ``j`` along rows (y).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import EPS
from .geometry import (
    DegenerateTriangleError,
    edge_matrix,
    edge_weights,
    normalize_edge_matrix,
    perspective_correct,
)


class StepVariant(str, enum.Enum):
    """Edge-slope estimate used by the pixel step."""

    LENGTH = "length"  # |grad|
    FWIDTH = "fwidth"  # |ddx| + |ddy|
    TWICE_LENGTH = "twice_length"  # 2 |grad|


class GradientSample(NamedTuple):
    value: np.ndarray | float
    ddx: np.ndarray | float
    ddy: np.ndarray | float


class BoundingBox(NamedTuple):
    """Inclusive pixel-index box; empty when ``xmin > xmax`` or ``ymin > ymax``."""

    xmin: int
    ymin: int
    xmax: int
    ymax: int

    @property
    def empty(self):
        return self.xmin > self.xmax or self.ymin > self.ymax

    def union(self, other):
        if self.empty:
            return other
        if other.empty:
            return self
        return BoundingBox(
            min(self.xmin, other.xmin),
            min(self.ymin, other.ymin),
            max(self.xmax, other.xmax),
            max(self.ymax, other.ymax),
        )

    def clamp(self, width, height):
        return BoundingBox(
            max(self.xmin, 0), max(self.ymin, 0), min(self.xmax, width - 1), min(self.ymax, height - 1)
        )


EMPTY_BOX = BoundingBox(0, 0, -1, -1)


def slope(ddx, ddy, variant=StepVariant.LENGTH):
    variant = StepVariant(variant)
    ddx = np.asarray(ddx, dtype=np.float64)
    ddy = np.asarray(ddy, dtype=np.float64)
    if variant is StepVariant.LENGTH:
        return np.hypot(ddx, ddy)
    if variant is StepVariant.FWIDTH:
        return np.abs(ddx) + np.abs(ddy)
    return 2.0 * np.hypot(ddx, ddy)


def pix_step(g, variant=StepVariant.LENGTH):
    """Anti-aliased step of an edge gradient: ``clamp(value / slope + 1/2, 0, 1)``.

    Where the slope collapses below ``EPS`` a hard step is returned instead.
    Works elementwise on array-valued samples.
    """
    value = np.asarray(g.value, dtype=np.float64)
    k = slope(g.ddx, g.ddy, variant)
    hard = k < EPS
    safe = np.where(hard, 1.0, k)
    soft = np.clip(value / safe + 0.5, 0.0, 1.0)
    out = np.where(hard, (value >= 0).astype(np.float64), soft)
    return out if out.ndim else float(out)


def bounding_box_expanded(a, b, c, size=None):
    """Pixel box of a triangle grown by half a pixel on each side.

    ``min = ceil(min(v) - 1/2)``, ``max = floor(max(v) + 1/2)`` per axis; clamped
    to ``size = (width, height)`` when given (the result may then be empty).
    """
    v = np.array([a, b, c], dtype=np.float64)
    lo = np.ceil(v.min(axis=0) - 0.5).astype(int)
    hi = np.floor(v.max(axis=0) + 0.5).astype(int)
    box = BoundingBox(int(lo[0]), int(lo[1]), int(hi[0]), int(hi[1]))
    if size is not None:
        box = box.clamp(*size)
    return box


def offset_triangle(rows, offsets):
    """Vertices of the triangle bounded by ``rows @ [p, 1] = -offsets``.

    The rows are edge functions (any positive scale); the returned triangle
    encloses every point where all three rows exceed ``-offsets``.
    """
    rows = np.asarray(rows, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.float64)
    out = np.empty((3, 2))
    for k in range(3):
        i, j = [r for r in range(3) if r != k]
        m = rows[[i, j], :2]
        rhs = -(rows[[i, j], 2] + offsets[[i, j]])
        det = np.linalg.det(m)
        if abs(det) < EPS * max(1.0, np.abs(m).max() ** 2):
            raise DegenerateTriangleError("parallel edges")
        out[k] = np.linalg.solve(m, rhs)
    return out


def centers_box(points, pad=0.0):
    """Inclusive pixel box of all pixel centers inside the bbox of ``points``."""
    p = np.asarray(points, dtype=np.float64)
    lo = p.min(axis=0) - pad
    hi = p.max(axis=0) + pad
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return None
    lo = np.ceil(lo - 0.5).astype(int)
    hi = np.floor(hi - 0.5).astype(int)
    return BoundingBox(int(lo[0]), int(lo[1]), int(hi[0]), int(hi[1]))


class Fragment(NamedTuple):
    x: int
    y: int
    coverage: float
    depth: float
    bary: np.ndarray
    attributes: np.ndarray | None


@dataclass
class Fragments:
    """Batch of fragments emitted for a single primitive.

    ``bary`` is the perspective-correct barycentric triple and ``depth`` the
    interpolated depth (or view distance on the spherical path).
    """

    x: np.ndarray
    y: np.ndarray
    coverage: np.ndarray
    depth: np.ndarray
    bary: np.ndarray
    attributes: np.ndarray | None = None

    def __len__(self):
        return len(self.x)

    def __iter__(self):
        for n in range(len(self.x)):
            attrs = None if self.attributes is None else self.attributes[n]
            yield Fragment(
                int(self.x[n]), int(self.y[n]), float(self.coverage[n]), float(self.depth[n]), self.bary[n], attrs
            )

    @classmethod
    def empty(cls, n_attributes=None):
        attrs = None if n_attributes is None else np.zeros((0, n_attributes))
        return cls(
            np.zeros(0, int), np.zeros(0, int), np.zeros(0), np.zeros(0), np.zeros((0, 3)), attrs
        )

    def to_grid(self, size, field="coverage"):
        """Scatter one per-fragment field into a ``(height, width, ...)`` grid."""
        width, height = size
        values = getattr(self, field)
        grid = np.zeros((height, width) + values.shape[1:])
        grid[self.y, self.x] = values
        return grid


def emit(x, y, cov, bary, tri):
    """Drop empty/behind-eye samples and perspective-correct the rest."""
    denom = bary @ tri.inv_w
    keep = (cov > 0) & (denom > 0)
    x, y, cov, bary = x[keep], y[keep], cov[keep], bary[keep]
    w, corrected = perspective_correct(bary, tri.inv_w)
    attrs = None if tri.attributes is None else corrected @ tri.attributes
    return Fragments(x, y, cov, w, corrected, attrs)


def signed_area(a, b, c):
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))


def rasterize_rectilinear(tri, size, aa=True, variant=StepVariant.LENGTH, cull_backfaces=True):
    """Rasterize a pixel-space triangle into a batch of fragments.

    Parameters
    ----------
    tri : Triangle
        Vertices in pixel coordinates with sub-pixel precision; ``inv_w`` is the
        inverse view depth of each vertex.
    size : (int, int)
        Framebuffer ``(width, height)``.
    aa : bool
        Analytic anti-aliasing; when off, coverage is the binary sign test with
        on-edge samples counted as covered.
    variant : StepVariant
        Edge-slope estimate for the anti-aliased step.
    cull_backfaces : bool
        Discard clockwise triangles; otherwise they are re-wound and drawn.

    Raises
    ------
    DegenerateTriangleError
        For zero-area triangles.
    """
    width, height = size
    n_attr = None if tri.attributes is None else tri.attributes.shape[1]
    a, b, c = tri.vertices[:, :2]
    area = signed_area(a, b, c)
    if abs(area) < EPS:
        raise DegenerateTriangleError("zero-area triangle")
    if area < 0:
        if cull_backfaces:
            return Fragments.empty(n_attr)
        tri = tri.reversed()
        a, b, c = tri.vertices[:, :2]

    box = bounding_box_expanded(a, b, c)
    # edge functions are evaluated relative to an integer origin, so integer
    # translations reproduce the coverage bit for bit
    origin = np.floor(tri.vertices[:, :2].min(axis=0))
    a, b, c = a - origin, b - origin, c - origin
    chi = edge_matrix(a, b, c)
    chi_n = normalize_edge_matrix(chi)
    omega = edge_weights(chi_n, a, b, c, offset=0.5)

    if aa:
        # acute corners spread the half-pixel blur beyond the vertex box
        support = offset_triangle(chi_n - [0, 0, 0.5], 0.5 * slope(chi_n[:, 0], chi_n[:, 1], variant))
        reach = centers_box(support + origin)
        if reach is not None:
            box = box.union(reach)
    box = box.clamp(width, height)
    if box.empty:
        return Fragments.empty(n_attr)

    ys, xs = np.mgrid[box.ymin : box.ymax + 1, box.xmin : box.xmax + 1]
    xs, ys = xs.ravel(), ys.ravel()
    f = np.stack([xs - origin[0] + 0.5, ys - origin[1] + 0.5, np.ones(xs.size)], axis=1)

    half_space = f @ chi_n.T
    g = half_space - 0.5
    if aa:
        variant = StepVariant(variant)
        if variant is StepVariant.LENGTH:
            xi = np.clip(half_space, 0.0, 1.0)
        else:
            xi = pix_step(GradientSample(g, chi_n[:, 0], chi_n[:, 1]), variant)
        cov = xi.prod(axis=1)
    else:
        raw = f @ chi.T
        cov = np.all(raw >= 0, axis=1).astype(np.float64)
    return emit(xs, ys, cov, g * omega, tri)


def rasterize_edge_field(gamma, variant=StepVariant.LENGTH):
    """Pixel-step an arbitrary sampled edge gradient field.

    Derivatives are estimated per pixel by central differences (one-sided on
    the border), standing in for screen-space derivative instructions.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    ddy, ddx = np.gradient(gamma)
    return pix_step(GradientSample(gamma, ddx, ddy), variant)


__all__ = [
    "BoundingBox",
    "Fragment",
    "Fragments",
    "GradientSample",
    "StepVariant",
    "bounding_box_expanded",
    "pix_step",
    "rasterize_edge_field",
    "rasterize_rectilinear",
]

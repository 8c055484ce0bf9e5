"""Triangle edge functions, barycentric matrices and perspective correction.

All matrices are ``(3, 3)`` arrays whose rows are edge functions, ordered by the
opposite vertex (row 0 is edge ``BC`` opposite ``A``).  Evaluating a matrix at a
homogeneous point ``[x, y, 1]`` (or a unit direction for the spherical case) is
``points @ M.T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import EPS, check_vertices


class DegenerateTriangleError(ValueError):
    """Zero-area triangle, zero-length edge or a triangle plane through the eye."""


class DegenerateFragmentError(ValueError):
    """Barycentric/inverse-depth dot product is not positive."""


@dataclass
class Triangle:
    """A rasterizable triangle.

    ``vertices`` are ``(3, 2)`` projected positions (pixel or STMap space) or
    ``(3, 3)`` view-space positions.  ``inv_w`` holds the inverse vertex depth
    (or inverse distance for the spherical path) used for perspective
    correction.  ``attributes`` is an optional ``(3, C)`` per-vertex payload.
    """

    vertices: np.ndarray
    inv_w: np.ndarray | None = None
    attributes: np.ndarray | None = None
    index: int = field(default=0, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        self.vertices = check_vertices(v, v.shape[-1] if v.ndim == 2 else 2)
        if self.vertices.shape[1] not in (2, 3):
            raise ValueError("vertices must be 2D or 3D")
        if self.inv_w is None:
            self.inv_w = np.ones(3)
        self.inv_w = np.asarray(self.inv_w, dtype=np.float64).reshape(3)
        if not np.all(self.inv_w > 0):
            raise ValueError("inverse depth/distance must be strictly positive")
        if self.attributes is not None:
            self.attributes = np.asarray(self.attributes, dtype=np.float64)
            if self.attributes.ndim == 1:
                self.attributes = self.attributes[:, None]
            if self.attributes.shape[0] != 3:
                raise ValueError("attributes must have one row per vertex")

    def reversed(self):
        """Same triangle with the winding flipped (A, C, B)."""
        order = [0, 2, 1]
        attrs = None if self.attributes is None else self.attributes[order]
        return Triangle(self.vertices[order], self.inv_w[order], attrs, self.index)


def homogeneous(points):
    """Lift ``(..., 2)`` points to ``(..., 3)`` by appending ones."""
    p = np.asarray(points, dtype=np.float64)
    return np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)


def _rows_from_cross(a, b, c):
    return np.stack([np.cross(b, c), np.cross(c, a), np.cross(a, b)])


def edge_matrix(a, b, c):
    """Raw rasterization matrix of triangle ``abc`` given in 2D.

    Row ``i`` is the cross product of the two homogeneous vertices that span
    edge ``i``.  For a counter-clockwise triangle each row is positive toward
    the interior and zero on its edge.

    Raises
    ------
    DegenerateTriangleError
        If the vertices are collinear.
    """
    verts = check_vertices([a, b, c], 2)
    h = homogeneous(verts)
    chi = _rows_from_cross(*h)
    if abs(h[0] @ chi[0]) < EPS:
        raise DegenerateTriangleError("collinear vertices: zero-area triangle")
    return chi


def normalize_edge_matrix(chi):
    """Scale each row to unit 2D gradient and add the half-pixel offset.

    The result evaluates to exactly 0.5 on each edge and changes by 1 per pixel
    along the edge normal.
    """
    chi = np.asarray(chi, dtype=np.float64)
    length = np.hypot(chi[:, 0], chi[:, 1])
    if np.any(length < EPS):
        raise DegenerateTriangleError("zero-length edge: row gradient vanishes")
    out = chi / length[:, None]
    out[:, 2] += 0.5
    return out


def barycentric_matrix_planar(a, b, c):
    """Edge matrix whose rows are scaled to give linear barycentric coordinates.

    Dividing each cross product by the dot product with its opposite vertex
    cancels the winding sign, so both windings yield the same coordinates.
    """
    h = homogeneous(check_vertices([a, b, c], 2))
    return _barycentric_rows(h, h)


def barycentric_matrix_spherical(a, b, c):
    """Spherical barycentric matrix of a view-space triangle.

    Rows are ``(B x C) / (A_hat . (B x C))`` and cyclic permutations.  Applied to
    a unit incident direction it returns barycentric weights that, after the
    distance correction of :func:`perspective_correct`, interpolate vertex data
    on the triangle's plane.
    """
    v = check_vertices([a, b, c], 3)
    length = np.linalg.norm(v, axis=1)
    if np.any(length < EPS):
        raise DegenerateTriangleError("vertex at the eye position")
    return _barycentric_rows(v, v / length[:, None])


def _barycentric_rows(verts, denom_verts):
    rows = _rows_from_cross(*verts)
    dots = np.einsum("ij,ij->i", denom_verts, rows)
    if np.any(np.abs(dots) < EPS):
        raise DegenerateTriangleError("degenerate triangle: barycentric denominator vanishes")
    return rows / dots[:, None]


def edge_weights(chi, a, b, c, offset=0.0):
    """Per-edge weights converting edge-function values into barycentrics.

    ``offset`` is subtracted from the third column before evaluation, so passing
    a normalized matrix with ``offset=0.5`` weights its un-offset rows.
    """
    rows = np.array(chi, dtype=np.float64)
    rows[:, 2] -= offset
    h = homogeneous(check_vertices([a, b, c], 2))
    dots = np.einsum("ij,ij->i", h, rows)
    if np.any(np.abs(dots) < EPS):
        raise DegenerateTriangleError("edge weight denominator vanishes")
    return 1.0 / dots


def evaluate(matrix, points):
    """Evaluate the three rows at ``(..., 2)`` points or ``(..., 3)`` vectors."""
    p = np.asarray(points, dtype=np.float64)
    if p.shape[-1] == 2:
        p = homogeneous(p)
    return p @ np.asarray(matrix).T


def coverage(xi):
    """Coverage mask as the product of clamped half-space components."""
    return np.prod(np.asarray(xi, dtype=np.float64), axis=-1)


def perspective_correct(bary, inv_w):
    """Perspective-correct barycentric weights.

    Parameters
    ----------
    bary : array_like, shape (..., 3)
        Linear (planar) or spherical barycentric coordinates.
    inv_w : array_like, shape (3,)
        Inverse vertex depth, or inverse vertex distance for the spherical path.

    Returns
    -------
    w : ndarray, shape (...)
        Interpolated depth or distance, ``1 / (bary . inv_w)``.
    corrected : ndarray, shape (..., 3)
        ``w * bary * inv_w``; sums to one.
    """
    bary = np.asarray(bary, dtype=np.float64)
    inv_w = np.asarray(inv_w, dtype=np.float64)
    weighted = bary * inv_w
    denom = weighted.sum(axis=-1)
    if np.any(denom <= 0):
        raise DegenerateFragmentError("fragment behind the eye or degenerate")
    w = 1.0 / denom
    return w, weighted * w[..., None]

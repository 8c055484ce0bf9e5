"""Universal Perspective projection: STMaps, Perspective Maps and natural vignetting."""
from __future__ import annotations

import math

import numpy as np

from .._validation import ValidationError, check_even_size, check_fov_type
from .types import PerspectiveMap, PolarSample, STMap, VignetteSample, texel_grid

CENTER_EPS = 1e-8
DEFAULT_GAMMA = 2.2


class FieldOfViewError(ValidationError):
    """Angle of view outside the range a planar STMap can represent."""


def mapping_vector(aspect, fov_type="h"):
    """Scale from ``[0, 1]`` texture coordinates to view coordinates.

    The chosen frame axis (horizontal, vertical, diagonal or a centered 4x3 /
    16x9 crop width) is scaled to unit half-extent, which preserves its angle
    of view.
    """
    a = float(aspect)
    if not a > 0:
        raise ValidationError(f"aspect ratio must be positive, got {aspect}")
    fov_type = check_fov_type(fov_type)
    if fov_type == "d":
        return np.array([a, 1.0]) / math.hypot(a, 1.0)
    if fov_type == "h":
        return np.array([1.0, 1.0 / a])
    if fov_type == "4x3h":
        return 0.75 * np.array([a, 1.0])
    if fov_type == "16x9h":
        return 9.0 / 16.0 * np.array([a, 1.0])
    return np.array([a, 1.0])


def universal_view_coord(f_st, u):
    """Centered view-plane coordinate of a texture coordinate."""
    f_st = np.asarray(f_st, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    return 2.0 * u * f_st - u


def _theta(radius, params):
    """Incident angle per radius, the small-radius limit of tan/R, and validity."""
    k, half = params.k, params.fov / 2
    valid = np.ones(radius.shape, dtype=bool)
    with np.errstate(invalid="ignore"):
        if k > 0:
            if k * half >= math.pi / 2 - 1e-12:
                raise FieldOfViewError(
                    f"k={k} with angle of view {math.degrees(params.fov):g} deg exceeds the projection domain"
                )
            tk = math.tan(k * half)
            theta = np.arctan(radius * tk) / k
            limit = tk / k
        elif k == 0:
            theta = radius * half
            limit = half
        else:
            sk = math.sin(k * half)
            x = radius * sk
            valid = np.abs(x) <= 1.0
            theta = np.arcsin(np.clip(x, -1.0, 1.0)) / k
            limit = sk / k
    return theta, limit, valid


def universal_project(f_xy, params):
    """Project view-plane coordinates through the Universal Perspective model.

    Returns the polar decomposition and ``f_prime``, the planar (rectilinear)
    view coordinate that preserves the angle of view.  Samples with
    ``theta >= pi/2`` have no planar image and are flagged invalid.
    """
    f = np.asarray(f_xy, dtype=np.float64)
    fx, fy = f[..., 0], f[..., 1]
    radius = np.sqrt(fx * fx + params.l * fy * fy)
    theta, limit, valid = _theta(radius, params)
    center = radius < CENTER_EPS
    safe_r = np.where(center, 1.0, radius)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(center, limit, np.tan(theta) / safe_r)
    valid = valid & (theta < math.pi / 2)
    y_scale = (1.0 - params.l) / params.s + params.l
    f_prime = ratio[..., None] * np.stack([fx, fy * y_scale], axis=-1)
    theta_prime = theta * max(abs(params.k), 0.5)
    return PolarSample(f, radius, theta, theta_prime, valid), f_prime


def universal_st(f_st, params, aspect):
    """Distorted STMap coordinate for each ``[0, 1]^2`` texture coordinate.

    Returns ``(f_st_prime, valid)``.  Requires an angle of view below 180 degrees.
    """
    if params.fov >= math.pi:
        raise FieldOfViewError(
            f"STMap output needs an angle of view below 180 deg, got {math.degrees(params.fov):g}; "
            "use a Perspective Map instead"
        )
    u = mapping_vector(aspect, params.fov_type)
    polar, f_prime = universal_project(universal_view_coord(f_st, u), params)
    out = f_prime / (2.0 * u * math.tan(params.fov / 2)) + 0.5
    valid = polar.valid & np.all(np.isfinite(out), axis=-1)
    return out, valid


def universal_direction(f_st, params, aspect):
    """Unit view-sphere direction of each texture coordinate.

    Returns ``(directions, valid, polar)``; the anamorphic/cylindrical y-scale
    is applied before the sphere mapping so that planar projection of the
    direction reproduces :func:`universal_st`.
    """
    u = mapping_vector(aspect, params.fov_type)
    f_xy = universal_view_coord(f_st, u)
    fx, fy = f_xy[..., 0], f_xy[..., 1]
    radius = np.sqrt(fx * fx + params.l * fy * fy)
    theta, limit, valid = _theta(radius, params)
    center = radius < CENTER_EPS
    safe_r = np.where(center, 1.0, radius)
    ratio = np.where(center, limit, np.sin(theta) / safe_r)
    y_scale = (1.0 - params.l) / params.s + params.l
    d = np.stack([ratio * fx, ratio * fy * y_scale, np.cos(theta)], axis=-1)
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    valid = valid & (theta <= math.pi) & np.all(np.isfinite(d), axis=-1)
    polar = PolarSample(f_xy, radius, theta, theta * max(abs(params.k), 0.5), valid)
    return d, valid, polar


def vignette(sample, k, gamma=DEFAULT_GAMMA):
    """Natural vignetting from the cosine and inverse-square illumination laws.

    The spherical term blends ``cos(theta')`` with ``(1 + tan^2 theta')^-1`` by
    ``clamp(k + 1/2, 0, 1)`` and vanishes for ``theta' >= pi/2``.  The
    cylindrical term is the inverse-square length of the un-normalized view
    vector and equals one for spherical projections (``l = 1``).
    """
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    theta = np.asarray(sample.theta, dtype=np.float64)
    theta_p = np.asarray(sample.theta_prime, dtype=np.float64)
    weight = min(max(k + 0.5, 0.0), 1.0)
    cos_p = np.cos(theta_p)
    spherical = (1.0 - weight) * cos_p + weight * cos_p * cos_p
    spherical = np.where(theta_p >= math.pi / 2, 0.0, spherical)

    f = np.asarray(sample.f_xy, dtype=np.float64)
    radius = np.asarray(sample.radius, dtype=np.float64)
    safe_r = np.where(radius < CENTER_EPS, 1.0, radius)
    ratio = np.where(radius < CENTER_EPS, 0.0, np.sin(theta) / safe_r)
    length2 = (ratio * f[..., 0]) ** 2 + (ratio * f[..., 1]) ** 2 + np.cos(theta) ** 2
    cylindrical = 1.0 / length2
    value = spherical * cylindrical
    return VignetteSample(spherical, cylindrical, value, value ** (1.0 / gamma))


def _out_of_bounds(st):
    return np.any((st < 0.0) | (st > 1.0), axis=-1)


def universal_stmap(params, width, height, with_vignette=False, gamma=DEFAULT_GAMMA):
    """Distort STMap of the Universal Perspective model.

    The bounds mask is zero where the model is undefined or the coordinate
    falls outside ``[0, 1]^2``.  ``k = 1, l = 1`` gives the identity map.
    """
    width, height = check_even_size(width, height, "STMap")
    grid = texel_grid(width, height)
    st, valid = universal_st(grid, params, width / height)
    valid &= ~_out_of_bounds(st)
    st = np.where(valid[..., None], st, 0.0)
    vig = None
    if with_vignette:
        polar, _ = universal_project(universal_view_coord(grid, mapping_vector(width / height, params.fov_type)), params)
        vig = np.where(valid, vignette(polar, params.k, gamma).value, 0.0)
    return STMap(st, valid.astype(np.float64), "distort", vig, params.metadata())


def universal_perspective_map(params, width, height, with_vignette=True, gamma=DEFAULT_GAMMA):
    """Perspective Map of the Universal Perspective model (any angle up to 360 deg)."""
    width, height = check_even_size(width, height, "Perspective Map")
    d, valid, polar = universal_direction(texel_grid(width, height), params, width / height)
    d = np.where(valid[..., None], d, 0.0)
    vig = None
    if with_vignette:
        vig = np.where(valid, vignette(polar, params.k, gamma).value, 0.0)
    return PerspectiveMap(d, valid.astype(np.float64), vig, params.metadata())


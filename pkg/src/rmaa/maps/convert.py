"""Conversions between rasterization map kinds."""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .._validation import ValidationError, check_fov_type, format_number
from ..raster import GradientSample, StepVariant, pix_step
from ._diff import central_differences
from .types import STMap, texel_grid
from .universal import FieldOfViewError, mapping_vector

DEFAULT_NEAR = 0.01


def perspective_map_to_stmap(pm, fov, fov_type="h", z_near=DEFAULT_NEAR, variant=StepVariant.LENGTH):
    """Planar-project a Perspective Map into a distort STMap.

    Parameters
    ----------
    pm : PerspectiveMap
    fov : float
        Angle of view of the target STMap space in radians, in ``(0, pi)``.
    fov_type : str
        AOV normalization axis of the target space.
    z_near : float
        Near-plane depth in ``(0, 1)``; directions at or behind it are masked.

    Returns
    -------
    stmap : STMap
        Coordinates with a soft bounds mask (near-plane step times frame bounds).
    near_mask : ndarray
        The anti-aliased near-plane mask alone.
    """
    fov = float(fov)
    if not 0.0 < fov < math.pi:
        raise FieldOfViewError(
            f"Perspective Map to STMap conversion needs an angle of view in (0, 180) deg, got {math.degrees(fov):g}"
        )
    if not 0.0 < z_near < 1.0:
        raise ValidationError(f"near plane must lie in (0, 1), got {z_near}")
    fov_type = check_fov_type(fov_type)
    u = mapping_vector(pm.width / pm.height, fov_type)
    g = pm.texels.astype(np.float64)
    depth = np.maximum(z_near, g[..., 2])
    st = g[..., :2] / depth[..., None] / math.tan(fov / 2) / (2.0 * u) + 0.5

    valid = pm.valid
    gamma = g[..., 2] - z_near
    ddx, ddy = central_differences(gamma, valid)
    near = pix_step(GradientSample(gamma, ddx, ddy), variant) * valid

    inside = np.all((st >= 0.0) & (st <= 1.0), axis=-1)
    mask = near * inside * pm.mask
    st = np.where(mask[..., None] > 0, st, 0.0)
    meta = dict(pm.metadata)
    meta.update(
        {"converted_from": "perspective_map", "fov_type": fov_type, "fov_deg": format_number(round(math.degrees(fov), 10))}
    )
    return STMap(st, mask, "distort", pm.vignette, meta), near


def bilinear(field, valid, st):
    """Sample a texel field at STMap coordinates with linear extrapolation at the border.

    Returns ``(values, d_values/d_st, ok)`` where the Jacobian has shape
    ``(..., C, 2)`` and ``ok`` flags samples whose four taps are all valid.
    """
    h, w = field.shape[:2]
    px = st[..., 0] * w - 0.5
    py = st[..., 1] * h - 0.5
    i0 = np.clip(np.floor(px), 0, w - 2).astype(int)
    j0 = np.clip(np.floor(py), 0, h - 2).astype(int)
    fx = (px - i0)[..., None]
    fy = (py - j0)[..., None]
    d00 = field[j0, i0]
    d10 = field[j0, i0 + 1]
    d01 = field[j0 + 1, i0]
    d11 = field[j0 + 1, i0 + 1]
    values = (1 - fx) * (1 - fy) * d00 + fx * (1 - fy) * d10 + (1 - fx) * fy * d01 + fx * fy * d11
    d_dx = ((1 - fy) * (d10 - d00) + fy * (d11 - d01)) * w
    d_dy = ((1 - fx) * (d01 - d00) + fx * (d11 - d10)) * h
    ok = valid[j0, i0] & valid[j0, i0 + 1] & valid[j0 + 1, i0] & valid[j0 + 1, i0 + 1]
    return values, np.stack([d_dx, d_dy], axis=-1), ok


def invert_stmap(distort, max_iter=8, tol=1e-5):
    """Build the undistort STMap of a distort STMap.

    Every valid source texel is scattered to the target texel its coordinate
    lands in, keeping the hit nearest the target center; targets without a hit
    start from the nearest hit.  Each target is then refined by Newton
    iteration on the bilinear forward map.  Targets that do not converge
    within ``tol`` (unreachable or folded regions) are masked and keep their
    starting guess.
    """
    if distort.kind != "distort":
        raise ValidationError("invert_stmap expects a distort STMap")
    w, h = distort.size
    field = distort.texels.astype(np.float64)
    valid = distort.valid
    target = texel_grid(w, h)
    source = texel_grid(w, h)

    hit = np.zeros((h, w), dtype=bool)
    guess = np.zeros((h, w, 2))
    src = field[valid]
    if len(src) == 0:
        return STMap(guess, np.zeros((h, w)), "undistort", None, dict(distort.metadata))
    ti = np.clip(np.floor(src[:, 0] * w), 0, w - 1).astype(int)
    tj = np.clip(np.floor(src[:, 1] * h), 0, h - 1).astype(int)
    dist = np.sum((src - target[tj, ti]) ** 2, axis=1)
    flat = tj * w + ti
    order = np.lexsort((dist, flat))
    first = np.ones(len(order), dtype=bool)
    first[1:] = flat[order][1:] != flat[order][:-1]
    best = order[first]
    hit.flat[flat[best]] = True
    guess.reshape(-1, 2)[flat[best]] = source[valid][best]

    if not hit.all():
        _, (nj, ni) = ndimage.distance_transform_edt(~hit, return_indices=True)
        guess = guess[nj, ni]

    g = guess.reshape(-1, 2).copy()
    goal = target.reshape(-1, 2)
    done = np.zeros(len(g), dtype=bool)
    for _ in range(max_iter + 1):
        values, jac, ok = bilinear(field, valid, g)
        resid = values - goal
        done = ok & (np.max(np.abs(resid), axis=1) < tol)
        active = ~done
        if not active.any():
            break
        a, b = jac[active, 0, 0], jac[active, 0, 1]
        c, d = jac[active, 1, 0], jac[active, 1, 1]
        det = a * d - b * c
        safe = np.abs(det) > 1e-12
        det = np.where(safe, det, 1.0)
        r = resid[active]
        step = np.stack([(d * r[:, 0] - b * r[:, 1]) / det, (-c * r[:, 0] + a * r[:, 1]) / det], axis=1)
        g[active] -= np.where(safe[:, None], step, 0.0)

    inside = np.all((g >= 0.0) & (g <= 1.0), axis=1)
    accept = done & inside
    out = np.where(accept[:, None], g, guess.reshape(-1, 2))
    meta = dict(distort.metadata)
    meta["inverted"] = "1"
    return STMap(out.reshape(h, w, 2), accept.reshape(h, w).astype(np.float64), "undistort", None, meta)

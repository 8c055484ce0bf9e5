"""Brown-Conrady style lens distortion STMaps with angle-of-view normalization."""
from __future__ import annotations

import numpy as np

from .._validation import EPS, check_even_size
from .types import STMap, texel_grid
from .universal import mapping_vector, universal_view_coord


def lens_stages(f_xy, params):
    """Apply the distortion chain to centered view coordinates.

    Returns ``(f, f1, f2, f3, valid)``: the view coordinate after the first
    cardinal offset, then after decentering, thin prism and the normalized
    radial term.  The radial factor ``(1 + sum k) / (1 + sum k_i r^2i)`` is one
    at ``r = 1``, so the frame bound is preserved.
    """
    c = np.asarray(params.c)
    f = np.asarray(f_xy, dtype=np.float64) - c
    r2 = np.sum(f * f, axis=-1)
    f1 = f + r2[..., None] * np.asarray(params.q)
    f2 = f1 + f1 * (f1 @ np.asarray(params.p))[..., None]
    denom = np.ones_like(r2)
    power = np.ones_like(r2)
    numer = 1.0
    for k in params.k:
        power = power * r2
        denom = denom + k * power
        numer = numer + k  # same summation order, so the factor is exactly 1 at r = 1
    valid = np.abs(denom) >= EPS
    factor = numer / np.where(valid, denom, 1.0)
    f3 = f2 * factor[..., None]
    return f, f1, f2, f3, valid


def lens_distort(f_st, params, aspect):
    """Lens-transformed STMap coordinates; returns ``(f_st_prime, valid)``."""
    u = mapping_vector(aspect, params.fov_type)
    *_, f3, valid = lens_stages(universal_view_coord(f_st, u), params)
    out = (f3 + np.asarray(params.c)) / (2.0 * u) + 0.5
    return out, valid & np.all(np.isfinite(out), axis=-1)


def lens_distort_stmap(params, width, height):
    """Distort STMap of the lens model; out-of-frame or singular texels are masked."""
    width, height = check_even_size(width, height, "STMap")
    st, valid = lens_distort(texel_grid(width, height), params, width / height)
    valid &= np.all((st >= 0.0) & (st <= 1.0), axis=-1)
    st = np.where(valid[..., None], st, 0.0)
    return STMap(st, valid.astype(np.float64), "distort", None, params.metadata())

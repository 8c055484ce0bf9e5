from __future__ import annotations

import numpy as np


def _axis_difference(values, valid, axis):
    """Central difference along ``axis``; one-sided next to masked or missing texels."""
    v = np.moveaxis(values, axis, 0)
    ok = np.moveaxis(valid, axis, 0)
    n = v.shape[0]
    fwd_ok = np.zeros_like(ok)
    bwd_ok = np.zeros_like(ok)
    fwd = np.zeros_like(v)
    bwd = np.zeros_like(v)
    if n > 1:
        fwd_ok[:-1] = ok[:-1] & ok[1:]
        bwd_ok[1:] = ok[1:] & ok[:-1]
        fwd[:-1] = v[1:] - v[:-1]
        bwd[1:] = v[1:] - v[:-1]
    extra = (slice(None),) * ok.ndim + (None,) * (v.ndim - ok.ndim)
    fo, bo = fwd_ok[extra], bwd_ok[extra]
    out = np.where(fo & bo, 0.5 * (fwd + bwd), np.where(fo, fwd, np.where(bo, bwd, 0.0)))
    return np.moveaxis(out, 0, axis)


def central_differences(values, valid=None):
    """Per-texel ``(d/dx, d/dy)`` of a map field sampled on the texel grid.

    ``values`` has shape ``(H, W)`` or ``(H, W, C)``; ``x`` runs along columns.
    Isolated valid texels get zero derivatives.
    """
    values = np.asarray(values, dtype=np.float64)
    if valid is None:
        valid = np.ones(values.shape[:2], dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    ddx = _axis_difference(values, valid, 1)
    ddy = _axis_difference(values, valid, 0)
    return ddx, ddy

"""Multi-screen rectilinear Perspective Maps (abutting flat displays)."""
from __future__ import annotations

import math

import numpy as np

from .._validation import ValidationError, check_even_size
from .types import PerspectiveMap, texel_grid


def screen_array_perspective_map(width, height, screens=5, fov_v=math.radians(60.0)):
    """Perspective Map of ``screens`` rectilinear views side by side.

    Each screen spans ``width / screens`` columns with vertical angle of view
    ``fov_v`` and is yawed so neighbouring frusta share an edge, giving a
    panoramic strip of flat projections.
    """
    width, height = check_even_size(width, height, "Perspective Map")
    if screens < 1:
        raise ValidationError("need at least one screen")
    if not 0.0 < fov_v < math.pi:
        raise ValidationError("vertical angle of view must lie in (0, 180) deg")
    aspect = width / screens / height
    tan_v = math.tan(fov_v / 2)
    half_h = math.atan(aspect * tan_v)
    grid = texel_grid(width, height)
    scaled = grid[..., 0] * screens
    index = np.minimum(np.floor(scaled), screens - 1)
    local_s = scaled - index
    x = (2.0 * local_s - 1.0) * aspect * tan_v
    y = (2.0 * grid[..., 1] - 1.0) * tan_v
    yaw = (index - (screens - 1) / 2.0) * 2.0 * half_h
    c, s = np.cos(yaw), np.sin(yaw)
    d = np.stack([c * x + s, y, -s * x + c], axis=-1)
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    meta = {
        "model": "screen_array",
        "screens": str(screens),
        "fov_type": "v",
        "fov_deg": f"{math.degrees(fov_v):g}",
    }
    return PerspectiveMap(d, np.ones((height, width)), None, meta)

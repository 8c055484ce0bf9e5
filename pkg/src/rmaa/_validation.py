"""Input validation helpers shared by the map generators, rasterizers and I/O."""
from __future__ import annotations

import math
import re
import warnings

import numpy as np
from sklearn.utils.validation import check_array

EPS = 1e-12

FOV_TYPES = ("h", "v", "d", "4x3h", "16x9h")

_FOV_ALIASES = {
    "h": "h",
    "horizontal": "h",
    "v": "v",
    "vertical": "v",
    "d": "d",
    "diagonal": "d",
    "4x3h": "4x3h",
    "horizontal4x3": "4x3h",
    "16x9h": "16x9h",
    "horizontal16x9": "16x9h",
}

_FOV_FLAG = re.compile(r"^(16x9h|4x3h|h|v|d)(\d+(?:\.\d+)?)$")


class ValidationError(ValueError):
    """Raised when user supplied parameters or data violate a contract."""


class OddResolutionError(ValidationError):
    """Map and framebuffer resolutions must be even on both axes."""


def check_even_size(width, height, what="map"):
    """Return ``(width, height)`` as ints, rejecting odd or non-positive sizes."""
    w, h = int(width), int(height)
    if w != width or h != height or w <= 0 or h <= 0:
        raise ValidationError(f"{what} size must be positive integers, got {width}x{height}")
    if w % 2 or h % 2:
        raise OddResolutionError(
            f"{what} resolution must be an even number on both axes, got {w}x{h}"
        )
    return w, h


def check_fov_type(fov_type):
    try:
        return _FOV_ALIASES[str(fov_type).lower()]
    except KeyError:
        raise ValidationError(
            f"unknown AOV type {fov_type!r}; expected one of {', '.join(FOV_TYPES)}"
        ) from None


def parse_fov(text):
    """Parse a FOV flag such as ``h90`` or ``4x3h120.5`` into ``(type, degrees)``."""
    m = _FOV_FLAG.match(str(text).strip())
    if m is None:
        raise ValidationError(f"malformed FOV {text!r}; expected e.g. h90, v60, d140, 4x3h100")
    return m.group(1), float(m.group(2))


def format_number(x):
    """Shortest decimal text for ``x`` that parses back to the same float."""
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def check_points(X, n_features=2, name="X"):
    """Validate an ``(n, n_features)`` array of finite coordinates."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, input_name=name)
    if X.shape[1] != n_features:
        raise ValidationError(f"{name} must have {n_features} columns, got {X.shape[1]}")
    return X


def check_vertices(vertices, dim):
    v = np.asarray(vertices, dtype=np.float64)
    if v.shape != (3, dim):
        raise ValidationError(f"triangle vertices must have shape (3, {dim}), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("triangle vertices must be finite")
    return v


def check_unit_interval(value, name):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_universal_params(fov, k, l, s):
    """Validate Universal Perspective parameters; ``fov`` in radians."""
    fov, k, l, s = float(fov), float(k), float(l), float(s)
    if not (fov > 0.0 and math.isfinite(fov)):
        raise ValidationError(f"angle of view must be positive, got {fov}")
    if fov > 2.0 * math.pi + 1e-12:
        raise ValidationError(f"angle of view above 360 degrees: {math.degrees(fov)}")
    if not -1.0 <= k <= 1.0:
        raise ValidationError(f"k must lie in [-1, 1], got {k}")
    if l < 0.0:
        raise ValidationError(f"l must be non-negative, got {l}")
    if l > 1.0:
        warnings.warn(f"l={l} > 1 (curved-display compensation)", stacklevel=3)
    if not 0.8 <= s <= 1.0:
        raise ValidationError(f"s must lie in [0.8, 1], got {s}")
    return fov, k, l, s

"""Rasterization map containers and model parameters.

Map arrays are indexed ``[row, column]``.  Column ``i`` samples ``s = (i + 0.5) / W``
and row ``j`` samples ``t = (j + 0.5) / H``, so row 0 holds the smallest ``t``.
Files and images are written bottom-up (``t = 0`` on the last image row).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .._validation import (
    ValidationError,
    check_even_size,
    check_fov_type,
    check_universal_params,
    format_number,
)


def texel_centers(width, height):
    """``(s, t)`` arrays of shape ``(height, width)`` at texel centers."""
    s = (np.arange(width) + 0.5) / width
    t = (np.arange(height) + 0.5) / height
    return np.meshgrid(s, t)


def texel_grid(width, height):
    s, t = texel_centers(width, height)
    return np.stack([s, t], axis=-1)


@dataclass
class UniversalParams:
    """Universal Perspective parameters; ``fov`` is in radians."""

    fov: float = math.pi / 2
    fov_type: str = "h"
    k: float = 1.0
    l: float = 1.0
    s: float = 0.98

    def __post_init__(self):
        self.fov_type = check_fov_type(self.fov_type)
        self.fov, self.k, self.l, self.s = check_universal_params(self.fov, self.k, self.l, self.s)

    @classmethod
    def from_degrees(cls, fov_deg=90.0, fov_type="h", k=1.0, l=1.0, s=0.98):
        return cls(math.radians(fov_deg), fov_type, k, l, s)

    @property
    def fov_deg(self):
        return math.degrees(self.fov)

    def metadata(self):
        return {
            "model": "universal",
            "fov_type": self.fov_type,
            "fov_deg": format_number(round(self.fov_deg, 10)),
            "k": format_number(self.k),
            "l": format_number(self.l),
            "s": format_number(self.s),
        }


LENS_RANGES = {"k": 0.4, "p": 0.2, "q": 0.1, "c": 0.2}


@dataclass
class LensParams:
    """Lens distortion coefficients.

    ``k`` radial (any length, default two terms), ``p`` thin prism, ``q``
    decentering, ``c`` cardinal offset.  Values outside the suggested ranges
    only warn.
    """

    k: tuple = (0.0, 0.0)
    p: tuple = (0.0, 0.0)
    q: tuple = (0.0, 0.0)
    c: tuple = (0.0, 0.0)
    fov_type: str = "d"

    def __post_init__(self):
        self.fov_type = check_fov_type(self.fov_type)
        self.k = tuple(float(v) for v in np.atleast_1d(self.k))
        for name in ("p", "q", "c"):
            vals = tuple(float(v) for v in np.atleast_1d(getattr(self, name)))
            if len(vals) != 2:
                raise ValidationError(f"{name} needs exactly two coefficients, got {len(vals)}")
            setattr(self, name, vals)
        for name, bound in LENS_RANGES.items():
            vals = getattr(self, name)
            if not all(math.isfinite(v) for v in vals):
                raise ValidationError(f"{name} coefficients must be finite")
            if any(abs(v) > bound for v in vals):
                warnings.warn(f"{name} coefficients {vals} outside suggested range +-{bound}", stacklevel=3)

    def metadata(self):
        return {
            "model": "lens",
            "fov_type": self.fov_type,
            "lens_k": " ".join(format_number(v) for v in self.k),
            "lens_p": " ".join(format_number(v) for v in self.p),
            "lens_q": " ".join(format_number(v) for v in self.q),
            "lens_c": " ".join(format_number(v) for v in self.c),
        }


class PolarSample:
    """Per-texel polar decomposition of a view-plane coordinate.

    Attributes are arrays of a common shape: ``f_xy`` (with a trailing axis of
    2), ``radius``, ``theta``, ``theta_prime`` and the boolean ``valid``.
    """

    def __init__(self, f_xy, radius, theta, theta_prime, valid):
        self.f_xy = f_xy
        self.radius = radius
        self.theta = theta
        self.theta_prime = theta_prime
        self.valid = valid


@dataclass
class VignetteSample:
    spherical: np.ndarray
    cylindrical: np.ndarray
    value: np.ndarray
    encoded: np.ndarray


def _check_mask(mask, shape):
    if mask is None:
        return np.ones(shape)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != shape:
        raise ValidationError(f"mask shape {mask.shape} does not match map {shape}")
    return mask


@dataclass(eq=False)
class STMap:
    """Grid of 2D lookup coordinates.

    ``kind`` is ``"distort"`` (screen texel to undistorted STMap coordinate,
    used for rasterization) or ``"undistort"``.  ``mask`` is the bounds mask,
    one where the texel holds a usable coordinate.
    """

    texels: np.ndarray
    mask: np.ndarray | None = None
    kind: str = "distort"
    vignette: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.texels = np.asarray(self.texels)
        if self.texels.ndim != 3 or self.texels.shape[2] != 2:
            raise ValidationError(f"STMap texels must be (H, W, 2), got {self.texels.shape}")
        check_even_size(self.width, self.height, "STMap")
        if self.kind not in ("distort", "undistort"):
            raise ValidationError(f"unknown STMap kind {self.kind!r}")
        self.mask = _check_mask(self.mask, self.texels.shape[:2])

    @property
    def width(self):
        return self.texels.shape[1]

    @property
    def height(self):
        return self.texels.shape[0]

    @property
    def size(self):
        return self.width, self.height

    @property
    def valid(self):
        return self.mask > 0

    @classmethod
    def identity(cls, width, height):
        return cls(texel_grid(width, height), metadata={"model": "identity"})


@dataclass(eq=False)
class PerspectiveMap:
    """Grid of unit view-sphere directions with optional vignette and mask."""

    texels: np.ndarray
    mask: np.ndarray | None = None
    vignette: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.texels = np.asarray(self.texels)
        if self.texels.ndim != 3 or self.texels.shape[2] != 3:
            raise ValidationError(f"Perspective Map texels must be (H, W, 3), got {self.texels.shape}")
        check_even_size(self.width, self.height, "Perspective Map")
        self.mask = _check_mask(self.mask, self.texels.shape[:2])

    @property
    def width(self):
        return self.texels.shape[1]

    @property
    def height(self):
        return self.texels.shape[0]

    @property
    def size(self):
        return self.width, self.height

    @property
    def valid(self):
        return self.mask > 0

"""Front-to-back merging of fractional-coverage fragments.

The framebuffer keeps an accumulated coverage mask and coverage-weighted
(premultiplied) linear data.  Each incoming fragment mask is first clipped by
the coverage already in the buffer, so nearer geometry occludes farther
geometry without a depth test.  This only holds when primitives arrive sorted
front to back; interpenetrating or cyclically overlapping primitives cannot be
ordered per primitive and are merged best effort.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_even_size

MERGE_TOLERANCE = 1e-9


class ClipContractError(RuntimeError):
    """Merged coverage exceeded one: a fragment bypassed mask clipping."""


def clip_mask(fragment, buffer, alpha=None):
    """Clip a fragment mask by the occluding coverage already buffered.

    ``min(fragment, 1 - buffer)``, scaled by ``alpha`` for alpha-to-coverage.
    """
    out = np.minimum(fragment, 1.0 - np.asarray(buffer, dtype=np.float64))
    if alpha is not None:
        out = out * alpha
    return out if np.ndim(out) else float(out)


def merge_mask(buffer, clipped):
    out = np.asarray(buffer, dtype=np.float64) + clipped
    if np.any(out > 1.0 + MERGE_TOLERANCE):
        raise ClipContractError(f"merged coverage {np.max(out)} exceeds 1")
    return out if np.ndim(out) else float(out)


def merge_data(buffer, fragment, clipped):
    """Accumulate fragment data weighted by its clipped mask."""
    clipped = np.asarray(clipped, dtype=np.float64)
    return np.asarray(buffer, dtype=np.float64) + clipped[..., None] * fragment


@dataclass
class Framebuffer:
    """Coverage, premultiplied data and depth accumulators.

    ``depth`` accumulates coverage-weighted depth like any other data pass;
    :meth:`resolved_depth` divides it back out.  In depth-test mode it holds
    the nearest depth directly.
    """

    width: int
    height: int
    channels: int = 4
    coverage: np.ndarray | None = None
    data: np.ndarray | None = None
    depth: np.ndarray | None = None

    def __post_init__(self):
        self.width, self.height = check_even_size(self.width, self.height, "framebuffer")
        shape = (self.height, self.width)
        if self.coverage is None:
            self.coverage = np.zeros(shape)
        if self.data is None:
            self.data = np.zeros(shape + (self.channels,))
        if self.depth is None:
            self.depth = np.zeros(shape)

    @property
    def size(self):
        return self.width, self.height

    def merge(self, frags, data, alpha=None):
        """Merge one primitive's fragments (each pixel at most once).

        ``data`` holds one row of linear values per fragment; ``alpha`` enables
        alpha-to-coverage with one mask value per fragment.
        """
        if len(frags) == 0:
            return
        y, x = frags.y, frags.x
        clipped = clip_mask(frags.coverage, self.coverage[y, x], alpha)
        self.coverage[y, x] = merge_mask(self.coverage[y, x], clipped)
        self.data[y, x] = merge_data(self.data[y, x], data, clipped)
        self.depth[y, x] += clipped * frags.depth

    def depth_test(self, frags, data):
        """Binary merge for aliased rendering: nearest covered fragment wins."""
        if len(frags) == 0:
            return
        y, x = frags.y, frags.x
        current = np.where(self.coverage[y, x] > 0, self.depth[y, x], np.inf)
        win = (frags.coverage >= 1.0) & (frags.depth < current)
        y, x = y[win], x[win]
        self.coverage[y, x] = 1.0
        self.data[y, x] = data[win]
        self.depth[y, x] = frags.depth[win]

    def fill_background(self, color):
        """Give the uncovered remainder of every pixel the background color."""
        color = np.asarray(color, dtype=np.float64)
        rest = 1.0 - self.coverage
        self.data += rest[..., None] * color
        self.coverage = self.coverage + rest

    def resolved(self):
        """Un-premultiplied data; zero where nothing was drawn."""
        cov = self.coverage[..., None]
        return np.divide(self.data, cov, out=np.zeros_like(self.data), where=cov > 0)

    def resolved_depth(self):
        return np.divide(self.depth, self.coverage, out=np.full_like(self.depth, np.inf), where=self.coverage > 0)


def sort_front_to_back(primitives, key=None):
    """Stable sort by nearest-vertex distance to the eye at the origin.

    ``primitives`` are :class:`~rmaa.geometry.Triangle` objects with view-space
    vertices unless ``key`` is given.  Returns the sorted list.
    """
    if key is None:
        def key(tri):
            return float(np.min(np.linalg.norm(tri.vertices, axis=1)))
    keyed = [(key(p), n, p) for n, p in enumerate(primitives)]
    keyed.sort(key=lambda item: (item[0], item[1]))
    return [p for _, _, p in keyed]

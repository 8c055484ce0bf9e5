"""Plain-text triangle scenes.

One record per line, ``#`` starts a comment::

    background r g b a        # linear RGBA, default 0 0 0 1
    texture checker N         # optional N x N checkerboard over UV
    v x y z r g b a u v       # view-space vertex; every 3 v-lines form a triangle

The camera sits at the origin looking down +z with +y up the frame.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import ValidationError


class SceneError(ValidationError):
    """Malformed scene file."""

    def __init__(self, message, line=None, path="<scene>"):
        where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.line = line


@dataclass
class SceneTriangle:
    positions: np.ndarray  # (3, 3) view space
    colors: np.ndarray  # (3, 4) linear RGBA
    uv: np.ndarray  # (3, 2)
    line: int = 0

    @property
    def attributes(self):
        return np.concatenate([self.colors, self.uv], axis=1)


@dataclass
class Scene:
    triangles: list = field(default_factory=list)
    background: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0, 1.0]))
    checker: int | None = None

    def __len__(self):
        return len(self.triangles)


def _floats(tokens, n, lineno, path, what):
    if len(tokens) != n:
        raise SceneError(f"{what} needs {n} numbers, got {len(tokens)}", lineno, path)
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise SceneError(f"{what}: not a number in {' '.join(tokens)!r}", lineno, path) from None
    if not all(math.isfinite(v) for v in vals):
        raise SceneError(f"{what}: non-finite value", lineno, path)
    return vals


def parse_scene(text, path="<scene>"):
    scene = Scene()
    pending = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "v":
            pending.append((lineno, _floats(rest, 9, lineno, path, "vertex")))
            if len(pending) == 3:
                data = np.array([p[1] for p in pending])
                scene.triangles.append(SceneTriangle(data[:, :3], data[:, 3:7], data[:, 7:9], pending[0][0]))
                pending = []
        elif key == "background":
            scene.background = np.array(_floats(rest, 4, lineno, path, "background"))
        elif key == "texture":
            if len(rest) != 2 or rest[0] != "checker":
                raise SceneError("expected 'texture checker N'", lineno, path)
            try:
                n = int(rest[1])
            except ValueError:
                raise SceneError(f"checker size must be an integer, got {rest[1]!r}", lineno, path) from None
            if n < 1:
                raise SceneError("checker size must be positive", lineno, path)
            scene.checker = n
        else:
            raise SceneError(f"unknown record {key!r}", lineno, path)
    if pending:
        raise SceneError(f"incomplete triangle: {len(pending)} trailing vertex line(s)", pending[0][0], path)
    return scene


def load_scene(path):
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        return parse_scene(fh.read(), path)


def format_scene(scene):
    """Text form of a scene; :func:`parse_scene` reads it back."""
    lines = ["background " + " ".join(repr(float(c)) for c in scene.background)]
    if scene.checker:
        lines.append(f"texture checker {scene.checker}")
    for tri in scene.triangles:
        for row in np.concatenate([tri.positions, tri.colors, tri.uv], axis=1):
            lines.append("v " + " ".join(repr(float(c)) for c in row))
    return "\n".join(lines) + "\n"


def checker(uv, n):
    """Checkerboard value (1 or 0.2) at UV coordinates."""
    uv = np.asarray(uv, dtype=np.float64)
    cells = np.floor(uv * n).astype(int).sum(axis=-1)
    return np.where(cells % 2 == 0, 1.0, 0.2)


def billboard_quad(center=(0.0, 0.0, 4.0), half_size=(1.0, 1.0), color=(1.0, 1.0, 1.0, 1.0), checker_n=8):
    """Camera-facing textured quad as two triangles."""
    cx, cy, cz = center
    hx, hy = half_size
    corners = np.array([[cx - hx, cy - hy, cz], [cx + hx, cy - hy, cz], [cx + hx, cy + hy, cz], [cx - hx, cy + hy, cz]])
    uv = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    colors = np.tile(np.asarray(color, dtype=np.float64), (3, 1))
    tris = [SceneTriangle(corners[list(idx)], colors, uv[list(idx)]) for idx in ((0, 1, 2), (0, 2, 3))]
    return Scene(tris, np.array([0.0, 0.0, 0.0, 1.0]), checker_n)

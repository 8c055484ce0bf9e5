"""Reference renders: a textured billboard through two curvilinear maps."""
from __future__ import annotations

import math
import os

import numpy as np

from .fileio import write_image, write_map
from .maps.screens import screen_array_perspective_map
from .maps.types import UniversalParams
from .maps.universal import universal_perspective_map
from .render import render
from .scene import billboard_quad


def five_screen_figure(width=480, height=96):
    """Five abutting rectilinear screens, 60 deg vertical AOV each."""
    pm = screen_array_perspective_map(width, height, screens=5, fov_v=math.radians(60.0))
    scene = billboard_quad(center=(0.0, 0.0, 4.0), half_size=(3.0, 1.5), color=(1.0, 0.8, 0.3, 1.0), checker_n=8)
    scene.background = np.array([0.05, 0.05, 0.1, 1.0])
    return pm, render(scene, (width, height), mode="pmap", rmap=pm)


def fisheye_figure(width=256, height=256):
    """270 deg equidistant-type fisheye (k=0, l=0.75, s=0.98) with vignetting."""
    params = UniversalParams.from_degrees(270.0, "h", k=0.0, l=0.75, s=0.98)
    pm = universal_perspective_map(params, width, height, with_vignette=True)
    scene = billboard_quad(center=(0.0, 0.0, 2.0), half_size=(4.0, 4.0), color=(0.3, 0.8, 1.0, 1.0), checker_n=12)
    scene.background = np.array([0.9, 0.9, 0.9, 1.0])
    return pm, render(scene, (width, height), mode="pmap", rmap=pm)


FIGURES = {"five_screen": five_screen_figure, "fisheye270": fisheye_figure}


def build_figures():
    """``{name: (map, framebuffer)}`` for every reference figure."""
    return {name: make() for name, make in FIGURES.items()}


def write_figures(directory):
    """Write each figure as ``<name>.png``, ``<name>.npz`` and its map ``<name>_map.exr``."""
    os.makedirs(directory, exist_ok=True)
    for name, (pm, fb) in build_figures().items():
        write_image(fb, os.path.join(directory, f"{name}.png"))
        np.savez_compressed(os.path.join(directory, f"{name}.npz"), image=fb.resolved(), coverage=fb.coverage)
        write_map(pm, os.path.join(directory, f"{name}_map.exr"))


if __name__ == "__main__":
    import sys

    write_figures(sys.argv[1] if len(sys.argv) > 1 else "figures")

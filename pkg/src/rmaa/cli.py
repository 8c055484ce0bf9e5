"""Command line interface: ``rmaa <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 file errors.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np
from PIL import Image

from ._validation import ValidationError, parse_fov
from .fileio import (
    LAYERS,
    MapFileError,
    default_map_name,
    read_map,
    read_map_layers,
    write_image,
    write_map,
)
from .maps.convert import DEFAULT_NEAR, invert_stmap, perspective_map_to_stmap
from .maps.lens import lens_distort_stmap
from .maps.types import LensParams, PerspectiveMap, STMap, UniversalParams
from .maps.universal import DEFAULT_GAMMA, universal_perspective_map, universal_stmap
from .raster import StepVariant
from .render import render
from .scene import load_scene

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

log = logging.getLogger("rmaa")


def parse_size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 512x512, got {text!r}") from None
    return w, h


def _fov_arg(text):
    try:
        return parse_fov(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    p = argparse.ArgumentParser(prog="rmaa", description="Curvilinear anti-aliased rasterization and map tools.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("genmap", help="generate a rasterization map")
    gsub = gen.add_subparsers(dest="model", required=True)

    uni = gsub.add_parser("universal", help="Universal Perspective STMap or Perspective Map")
    uni.add_argument("--size", type=parse_size, default=(512, 512), help="WxH, both even")
    uni.add_argument("--fov", type=_fov_arg, default=("h", 90.0), help="AOV type and degrees, e.g. h90, d140")
    uni.add_argument("--k", type=float, default=1.0, help="perspective type in [-1, 1]")
    uni.add_argument("--l", type=float, default=1.0, help="cylindrical factor")
    uni.add_argument("--s", type=float, default=0.98, help="anamorphic correction in [0.8, 1]")
    uni.add_argument("--pmap", action="store_true", help="write a Perspective Map instead of an STMap")
    uni.add_argument("--vignette", action="store_true", help="add the natural vignetting layer")
    uni.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    uni.add_argument("--name", default="Universal", help="description part of the default file name")
    uni.add_argument("--out", help="output path (default follows the naming convention)")

    lens = gsub.add_parser("lens", help="lens distortion STMap")
    lens.add_argument("--size", type=parse_size, default=(512, 512))
    lens.add_argument("--fov-type", default="d", help="AOV normalization axis")
    lens.add_argument("--radial", type=float, nargs="+", default=[0.0, 0.0], metavar="K")
    lens.add_argument("--prism", type=float, nargs=2, default=[0.0, 0.0], metavar=("P1", "P2"))
    lens.add_argument("--decenter", type=float, nargs=2, default=[0.0, 0.0], metavar=("Q1", "Q2"))
    lens.add_argument("--offset", type=float, nargs=2, default=[0.0, 0.0], metavar=("C1", "C2"))
    lens.add_argument("--name", default="Lens")
    lens.add_argument("--out")

    conv = sub.add_parser("convert", help="convert between map kinds")
    csub = conv.add_subparsers(dest="conversion", required=True)
    pm2st = csub.add_parser("pm2st", help="Perspective Map to STMap")
    pm2st.add_argument("input")
    pm2st.add_argument("--fov", type=_fov_arg, default=("h", 90.0), help="AOV of the STMap space")
    pm2st.add_argument("--near", type=float, default=DEFAULT_NEAR, help="near plane z_n in (0, 1)")
    pm2st.add_argument("--out", required=True)

    inv = sub.add_parser("invert", help="undistort STMap from a distort STMap")
    inv.add_argument("input")
    inv.add_argument("--out", required=True)

    ras = sub.add_parser("rasterize", help="render a scene")
    ras.add_argument("--scene", required=True)
    ras.add_argument("--mode", choices=("rect", "stmap", "pmap"), default="rect")
    ras.add_argument("--map", dest="map_path", help="STMap or Perspective Map for the map modes")
    ras.add_argument("--size", type=parse_size, help="WxH (default: map size, else 512x512)")
    ras.add_argument("--fov", type=_fov_arg, default=("h", 90.0), help="camera AOV for rect and stmap modes")
    ras.add_argument("--no-aa", dest="aa", action="store_false", help="binary coverage with depth test")
    ras.add_argument("--variant", choices=[v.value for v in StepVariant], default=StepVariant.LENGTH.value)
    ras.add_argument("--no-vignette", dest="vignette", action="store_false")
    ras.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    ras.add_argument("--out", required=True)

    diff = sub.add_parser("diff", help="per-channel max/mean absolute difference of two maps or images")
    diff.add_argument("a")
    diff.add_argument("b")
    return p


def _write(m, out, name):
    path = out or default_map_name(m, name)
    write_map(m, path)
    print(path)


def _cmd_genmap(args):
    w, h = args.size
    if args.model == "universal":
        fov_type, deg = args.fov
        params = UniversalParams.from_degrees(deg, fov_type, args.k, args.l, args.s)
        if args.pmap:
            m = universal_perspective_map(params, w, h, with_vignette=args.vignette, gamma=args.gamma)
        else:
            if params.fov >= math.pi:
                raise ValidationError(
                    f"STMap output needs an angle of view below 180 deg (got {deg:g}); use --pmap"
                )
            m = universal_stmap(params, w, h, with_vignette=args.vignette, gamma=args.gamma)
        _write(m, args.out, args.name)
    else:
        params = LensParams(tuple(args.radial), tuple(args.prism), tuple(args.decenter), tuple(args.offset), args.fov_type)
        _write(lens_distort_stmap(params, w, h), args.out, args.name)


def _read_kind(path, kind):
    m = read_map(path)
    if not isinstance(m, kind):
        raise ValidationError(f"{path} holds a {type(m).__name__}, expected a {kind.__name__}")
    return m


def _cmd_convert(args):
    pm = _read_kind(args.input, PerspectiveMap)
    fov_type, deg = args.fov
    if deg >= 180.0:
        raise ValidationError(f"STMap conversion needs an angle of view below 180 deg, got {deg:g}")
    st, _ = perspective_map_to_stmap(pm, math.radians(deg), fov_type, args.near)
    _write(st, args.out, "Converted")


def _cmd_invert(args):
    st = _read_kind(args.input, STMap)
    _write(invert_stmap(st), args.out, "Undistort")


def _cmd_rasterize(args):
    scene = load_scene(args.scene)
    rmap = None
    if args.mode != "rect":
        if not args.map_path:
            raise ValidationError(f"--mode {args.mode} needs --map")
        rmap = _read_kind(args.map_path, STMap if args.mode == "stmap" else PerspectiveMap)
    size = args.size or (rmap.size if rmap is not None else (512, 512))
    fov_type, deg = args.fov
    fb = render(
        scene,
        size,
        args.mode,
        rmap,
        math.radians(deg),
        fov_type,
        aa=args.aa,
        variant=StepVariant(args.variant),
        apply_vignette=args.vignette,
    )
    write_image(fb, args.out, args.gamma)
    print(args.out)


def _load_channels(path):
    ext = os.path.splitext(path)[1].lower()
    if ext in (".exr", ".rmap"):
        layers, _ = read_map_layers(path)
        out = {}
        for sym, data in layers.items():
            names = ["Y"] if LAYERS[sym] == 1 else list("RGBA"[: LAYERS[sym]])
            for c, n in enumerate(names):
                out[f"{sym}.{n}"] = data[..., c].astype(np.float64)
        return out
    if not os.path.exists(path):
        raise MapFileError(f"no such file: {path}")
    try:
        with Image.open(path) as img:
            data = np.asarray(img.convert("RGBA"), dtype=np.float64) / 255.0
    except OSError as exc:
        raise MapFileError(f"cannot read {path}: {exc}") from exc
    return {c: data[..., n] for n, c in enumerate("RGBA")}


def _cmd_diff(args):
    a, b = _load_channels(args.a), _load_channels(args.b)
    if set(a) != set(b):
        raise ValidationError(f"channel sets differ: {sorted(a)} vs {sorted(b)}")
    worst = 0.0
    for name in sorted(a):
        if a[name].shape != b[name].shape:
            raise ValidationError(f"channel {name}: shapes differ {a[name].shape} vs {b[name].shape}")
        d = np.abs(a[name] - b[name])
        worst = max(worst, float(d.max()))
        print(f"{name}\tmax={d.max():.9g}\tmean={d.mean():.9g}")
    print(f"max={worst:.9g}")


COMMANDS = {
    "genmap": _cmd_genmap,
    "convert": _cmd_convert,
    "invert": _cmd_invert,
    "rasterize": _cmd_rasterize,
    "diff": _cmd_diff,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"rmaa: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"rmaa: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

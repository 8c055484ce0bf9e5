"""Map and image files, and the map file naming convention.

Maps are stored bottom-up: the first file row is ``t = 1``, so arrays are
flipped vertically on write and read.  Float layers are stored as 32-bit
floats, vignette (``V``) and bounds mask (``M``) layers as 8-bit levels.
Camera parameters ride along as string attributes.

Two containers are supported: OpenEXR (``.exr``, needs the ``OpenEXR``
package) and a raw fallback (``.rmap``)::

    b"RMAP1\\n"
    <one line of UTF-8 JSON: width, height, layers [{name, channels, dtype}], metadata>
    <layer payloads in header order, row-major, little-endian float32 or uint8>
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

import numpy as np
from PIL import Image

from ._validation import ValidationError, check_even_size, check_fov_type, format_number, parse_fov
from .maps.types import PerspectiveMap, STMap

LAYERS = {
    "Pm": 3,
    "St": 2,
    "uSt": 2,
    "P": 1,
    "V": 1,
    "M": 1,
    "PmV": 4,
    "PmP": 4,
    "PmM": 4,
    "StV": 3,
    "StP": 3,
    "StM": 3,
}
EIGHT_BIT = ("V", "M")
CHANNEL_NAMES = ("R", "G", "B", "A")
META_PREFIX = "rmaa."
RAW_MAGIC = b"RMAP1\n"
EXTENSIONS = ("exr", "rmap")


class MapFileError(OSError):
    """Unreadable, unwritable or malformed map file."""


class FilenameError(ValidationError):
    """Map file name that does not follow the naming convention."""

    def __init__(self, message, name, position):
        super().__init__(f"{message} at position {position} in {name!r}")
        self.position = position


# ---------------------------------------------------------------- file names


@dataclass(frozen=True)
class MapFileDescriptor:
    """Parsed form of ``<description>_(<layers>)_(<properties>).<ext>``."""

    description: str
    layers: tuple
    fov_type: str | None = None
    fov_deg: float | None = None
    k: float | None = None
    l: float | None = None
    s: float | None = None
    extension: str = "exr"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValidationError("a map file needs at least one layer")
        for sym in self.layers:
            if sym not in LAYERS:
                raise ValidationError(f"unknown layer symbol {sym!r}")
        if not _DESCRIPTION.fullmatch(self.description):
            raise ValidationError(f"description {self.description!r} must be letters, digits, '-' or '_'")
        if (self.fov_type is None) != (self.fov_deg is None):
            raise ValidationError("fov_type and fov_deg go together")
        if self.fov_type is not None:
            object.__setattr__(self, "fov_type", check_fov_type(self.fov_type))
        if self.extension not in EXTENSIONS:
            raise ValidationError(f"unsupported extension {self.extension!r}")

    @property
    def channels(self):
        return sum(LAYERS[sym] for sym in self.layers)

    @property
    def has_properties(self):
        return any(v is not None for v in (self.fov_type, self.k, self.l, self.s))


_DESCRIPTION = re.compile(r"[A-Za-z0-9][A-Za-z0-9_-]*")
_NUMBER = re.compile(r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?")


def format_map_filename(d):
    layers = d.layers[0] if len(d.layers) == 1 else "(" + "_".join(d.layers) + ")"
    name = f"{d.description}_{layers}"
    if d.has_properties:
        props = []
        if d.fov_type is not None:
            props.append(d.fov_type + format_number(d.fov_deg))
        for key in ("k", "l", "s"):
            value = getattr(d, key)
            if value is not None:
                props.append(key + format_number(value))
        name += "_(" + "_".join(props) + ")"
    return f"{name}.{d.extension}"


def _parse_properties(text, name, offset):
    out = {}
    pos = offset
    order = ["fov", "k", "l", "s"]
    for token in text.split("_"):
        if not token:
            raise FilenameError("empty property", name, pos)
        if token[0] in "kls" and _NUMBER.fullmatch(token[1:]):
            key = token[0]
        else:
            key = "fov"
        if key not in order:
            raise FilenameError(f"property {token!r} repeated or out of order", name, pos)
        order = order[order.index(key) + 1 :]
        if key == "fov":
            try:
                out["fov_type"], out["fov_deg"] = parse_fov(token)
            except ValidationError:
                raise FilenameError(f"malformed property {token!r}", name, pos) from None
        else:
            out[key] = float(token[1:])
        pos += len(token) + 1
    return out


def parse_map_filename(name):
    """Inverse of :func:`format_map_filename`; accepts a bare name or a path."""
    base = os.path.basename(str(name))
    stem, dot, ext = base.rpartition(".")
    if not dot or ext not in EXTENSIONS:
        raise FilenameError(f"extension must be one of {EXTENSIONS}", base, len(stem))
    groups = []
    rest = stem
    while rest.endswith(")") and len(groups) < 2:
        i = rest.rfind("_(")
        if i < 0:
            raise FilenameError("unbalanced ')'", base, len(rest) - 1)
        groups.insert(0, (i + 2, rest[i + 2 : -1]))
        rest = rest[:i]

    layers = props = None
    if len(groups) == 2:
        layers, props = groups
    elif len(groups) == 1:
        tokens = groups[0][1].split("_")
        if all(t in LAYERS for t in tokens):
            layers = groups[0]
        else:
            props = groups[0]
    if layers is None:
        i = rest.rfind("_")
        if i < 0:
            raise FilenameError("missing '_<layer>' after the description", base, len(rest))
        layers = (i + 1, rest[i + 1 :])
        rest = rest[:i]
        if layers[1] not in LAYERS:
            raise FilenameError(f"unknown layer symbol {layers[1]!r}", base, layers[0])

    pos, text = layers
    symbols = text.split("_")
    for sym in symbols:
        if sym not in LAYERS:
            raise FilenameError(f"unknown layer symbol {sym!r}", base, pos)
        pos += len(sym) + 1
    if not _DESCRIPTION.fullmatch(rest):
        raise FilenameError("malformed description", base, 0)
    fields = {} if props is None else _parse_properties(props[1], base, props[0])
    return MapFileDescriptor(rest, tuple(symbols), extension=ext, **fields)


# ---------------------------------------------------------------- layer I/O


def _channel_names(symbol):
    n = LAYERS[symbol]
    if n == 1:
        return [f"{symbol}.Y"]
    return [f"{symbol}.{c}" for c in CHANNEL_NAMES[:n]]


def _as_layer(symbol, data):
    if symbol not in LAYERS:
        raise ValidationError(f"unknown layer symbol {symbol!r}")
    data = np.asarray(data)
    if data.ndim == 2:
        data = data[..., None]
    if data.ndim != 3 or data.shape[2] != LAYERS[symbol]:
        raise ValidationError(f"layer {symbol} needs {LAYERS[symbol]} channels, got array of shape {data.shape}")
    return data


def _encode(symbol, data):
    if symbol in EIGHT_BIT:
        return np.round(np.clip(data, 0.0, 1.0) * 255.0).astype(np.uint8)
    return data.astype(np.float32)


def write_map_layers(path, layers, metadata=None):
    """Write ``{symbol: (H, W[, C]) array}`` with string ``metadata``."""
    path = os.fspath(path)
    arrays = {sym: _as_layer(sym, data) for sym, data in layers.items()}
    if not arrays:
        raise ValidationError("nothing to write")
    shapes = {a.shape[:2] for a in arrays.values()}
    if len(shapes) != 1:
        raise ValidationError(f"layers differ in size: {sorted(shapes)}")
    h, w = shapes.pop()
    check_even_size(w, h, "map")
    encoded = {sym: np.ascontiguousarray(np.flipud(_encode(sym, a))) for sym, a in arrays.items()}
    meta = {str(k): str(v) for k, v in (metadata or {}).items()}
    try:
        if path.endswith(".rmap"):
            _write_raw(path, w, h, encoded, meta)
        else:
            _write_exr(path, encoded, meta)
    except OSError as exc:
        raise MapFileError(f"cannot write {path}: {exc}") from exc


def _write_exr(path, encoded, meta):
    import OpenEXR

    channels = {}
    for sym, data in encoded.items():
        for c, name in enumerate(_channel_names(sym)):
            plane = np.ascontiguousarray(data[..., c])
            channels[name] = plane.astype(np.uint32) if sym in EIGHT_BIT else plane
    header = {"compression": OpenEXR.ZIP_COMPRESSION, "type": OpenEXR.scanlineimage}
    header.update({META_PREFIX + k: v for k, v in meta.items()})
    OpenEXR.File(header, channels).write(path)


def _write_raw(path, w, h, encoded, meta):
    header = {
        "width": w,
        "height": h,
        "layers": [
            {"name": sym, "channels": int(a.shape[2]), "dtype": "uint8" if a.dtype == np.uint8 else "float32"}
            for sym, a in encoded.items()
        ],
        "metadata": meta,
    }
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for a in encoded.values():
            fh.write(a.astype(a.dtype.newbyteorder("<"), copy=False).tobytes())


def read_map_layers(path):
    """Read a map file into ``({symbol: (H, W, C) float array}, metadata)``.

    Float layers come back as float32, 8-bit layers as float64 in ``[0, 1]``.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise MapFileError(f"no such file: {path}")
    try:
        with open(path, "rb") as fh:
            raw = fh.read(len(RAW_MAGIC)) == RAW_MAGIC
        layers, meta = _read_raw(path) if raw else _read_exr(path)
    except (OSError, RuntimeError, ValueError, KeyError) as exc:
        if isinstance(exc, (MapFileError, ValidationError)):
            raise
        raise MapFileError(f"cannot read {path}: {exc}") from exc
    for sym, data in layers.items():
        w, h = data.shape[1], data.shape[0]
        check_even_size(w, h, f"map layer {sym}")
    decoded = {}
    for sym, data in layers.items():
        data = np.flipud(data)
        decoded[sym] = data.astype(np.float64) / 255.0 if sym in EIGHT_BIT else np.ascontiguousarray(data)
    return decoded, meta


def _read_exr(path):
    import OpenEXR

    f = OpenEXR.File(path, separate_channels=True)
    channels = f.channels()
    header = f.header()
    grouped = {}
    for name in channels:
        sym, _, _ = name.partition(".")
        if sym not in LAYERS:
            raise MapFileError(f"{path}: unknown layer {sym!r}")
        grouped.setdefault(sym, None)
    layers = {}
    for sym in grouped:
        names = _channel_names(sym)
        missing = [n for n in names if n not in channels]
        if missing:
            raise MapFileError(f"{path}: layer {sym} is missing channels {missing}")
        planes = [channels[n].pixels for n in names]
        data = np.stack(planes, axis=-1)
        layers[sym] = data.astype(np.uint8) if sym in EIGHT_BIT else data.astype(np.float32, copy=False)
    meta = {k[len(META_PREFIX) :]: str(v) for k, v in header.items() if k.startswith(META_PREFIX)}
    return layers, meta


def _read_raw(path):
    with open(path, "rb") as fh:
        fh.read(len(RAW_MAGIC))
        header = json.loads(fh.readline())
        w, h = int(header["width"]), int(header["height"])
        layers = {}
        for item in header["layers"]:
            sym, n = item["name"], int(item["channels"])
            if sym not in LAYERS or LAYERS[sym] != n:
                raise MapFileError(f"{path}: bad layer entry {item}")
            dtype = np.dtype("<f4") if item["dtype"] == "float32" else np.dtype("u1")
            count = w * h * n
            buf = fh.read(count * dtype.itemsize)
            if len(buf) != count * dtype.itemsize:
                raise MapFileError(f"{path}: truncated payload in layer {sym}")
            layers[sym] = np.frombuffer(buf, dtype=dtype).reshape(h, w, n).astype(dtype.newbyteorder("="))
    return layers, dict(header.get("metadata", {}))


# ---------------------------------------------------------------- maps


def map_layers(m):
    """Layer dictionary for a map: coordinates, plus ``V`` and ``M`` when present."""
    if isinstance(m, STMap):
        layers = {"St" if m.kind == "distort" else "uSt": m.texels}
    elif isinstance(m, PerspectiveMap):
        layers = {"Pm": m.texels}
    else:
        raise ValidationError(f"cannot store {type(m).__name__}")
    if m.vignette is not None:
        layers["V"] = m.vignette
    layers["M"] = m.mask
    return layers


def default_map_name(m, description="map", extension="exr"):
    """File name following the convention for a map and its metadata."""
    meta = m.metadata
    kw = {}
    if "fov_type" in meta and "fov_deg" in meta:
        kw["fov_type"], kw["fov_deg"] = meta["fov_type"], float(meta["fov_deg"])
    for key in ("k", "l", "s"):
        if key in meta:
            kw[key] = float(meta[key])
    layers = tuple(map_layers(m))
    return format_map_filename(MapFileDescriptor(description, layers, extension=extension, **kw))


def write_map(m, path):
    """Write an :class:`STMap` or :class:`PerspectiveMap` with its metadata."""
    meta = dict(m.metadata)
    if isinstance(m, STMap):
        meta["kind"] = m.kind
    write_map_layers(path, map_layers(m), meta)


def read_map(path):
    """Read a map written by :func:`write_map` (or any file with St/uSt/Pm layers).

    Combined layers (``StM``, ``PmV`` ...) are split into coordinates and their
    extra channel.
    """
    layers, meta = read_map_layers(path)
    extra = {}
    coords = kind = None
    for sym, data in layers.items():
        if sym in ("St", "uSt", "Pm"):
            coords, kind = data, sym
        elif sym[:2] in ("St", "Pm") and len(sym) == 3:
            base = sym[:2]
            n = LAYERS[base]
            coords, kind = data[..., :n], base
            extra[sym[2]] = data[..., n]
        else:
            extra[sym] = data[..., 0]
    if coords is None:
        raise MapFileError(f"{path}: no St, uSt or Pm layer")
    mask = extra.get("M")
    vig = extra.get("V")
    if kind == "Pm":
        return PerspectiveMap(coords, mask, vig, meta)
    st_kind = "undistort" if kind == "uSt" or meta.get("kind") == "undistort" else "distort"
    meta.pop("kind", None)
    return STMap(coords, mask, st_kind, vig, meta)


# ---------------------------------------------------------------- images


def encode_gamma(linear, gamma=2.2):
    """8-bit levels of linear values in ``[0, 1]`` after ``x ** (1 / gamma)``."""
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    x = np.clip(np.asarray(linear, dtype=np.float64), 0.0, 1.0)
    return np.round(255.0 * x ** (1.0 / gamma)).astype(np.uint8)


def decode_gamma(levels, gamma=2.2):
    return (np.asarray(levels, dtype=np.float64) / 255.0) ** gamma


def write_image(fb, path, gamma=2.2):
    """Encode a framebuffer as an 8-bit RGBA PNG (or any Pillow format).

    Color is un-premultiplied by coverage and gamma encoded; the alpha
    channel is the coverage, stored linearly.
    """
    color = fb.resolved()
    rgb = encode_gamma(color[..., :3], gamma)
    alpha = np.round(255.0 * np.clip(fb.coverage, 0.0, 1.0)).astype(np.uint8)
    rgba = np.flipud(np.concatenate([rgb, alpha[..., None]], axis=-1))
    try:
        Image.fromarray(np.ascontiguousarray(rgba), "RGBA").save(os.fspath(path))
    except (OSError, ValueError) as exc:
        raise MapFileError(f"cannot write image {path}: {exc}") from exc


def read_image(path, gamma=2.2):
    """Linear ``(H, W, 4)`` color of an image written by :func:`write_image`."""
    try:
        with Image.open(os.fspath(path)) as img:
            rgba = np.asarray(img.convert("RGBA"))
    except (OSError, ValueError) as exc:
        raise MapFileError(f"cannot read image {path}: {exc}") from exc
    rgba = np.flipud(rgba)
    out = np.empty(rgba.shape, dtype=np.float64)
    out[..., :3] = decode_gamma(rgba[..., :3], gamma)
    out[..., 3] = rgba[..., 3] / 255.0
    return out

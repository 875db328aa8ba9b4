"""8-bit grayscale PNG / PGM input and output.

Images are held as 2-D ``float64`` arrays with values in ``[0, 1]``;
a stored byte ``v`` maps to ``v / 255`` on read and back to
``round(v * 255)`` on write. Color inputs are reduced to gray by the
plain average of their R, G and B channels.
"""
from __future__ import annotations

import os
import re

import numpy as np
from PIL import Image

from .errors import BadImage

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def as_gray_image(img, name="image"):
    """Validate and return ``img`` as a C-contiguous float64 GrayImage."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise BadImage(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BadImage(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise BadImage(f"{name} values must lie in [0, 1]")
    return np.ascontiguousarray(arr)


def _read_pgm(data: bytes) -> np.ndarray:
    pos = 0
    fields = []
    while len(fields) < 4:
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise BadImage("truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    magic, width, height, maxval = fields[0], *(int(f) for f in fields[1:])
    if maxval < 1 or maxval > 255:
        raise BadImage(f"only 8-bit PGM is supported (maxval={maxval})")
    if magic == b"P5":
        raster = data[pos + 1 : pos + 1 + width * height]
        if len(raster) != width * height:
            raise BadImage("truncated PGM raster")
        px = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    elif magic == b"P2":
        px = np.array(data[pos:].split()[: width * height], dtype=np.float64)
        if px.size != width * height:
            raise BadImage("truncated PGM raster")
    else:
        raise BadImage(f"not a grayscale PGM (magic {magic!r})")
    px = px.reshape(height, width)
    if maxval != 255:
        px = np.round(px * (255.0 / maxval))
    return px / 255.0


def read_image(path) -> np.ndarray:
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] in (b"P5", b"P2"):
        return _read_pgm(data)
    with Image.open(path) as im:
        im.load()
        if im.mode == "P":
            im = im.convert("RGBA" if "transparency" in im.info else "RGB")
        if im.mode == "L":
            px = np.asarray(im, dtype=np.float64)
        elif im.mode in ("LA",):
            px = np.asarray(im, dtype=np.float64)[..., 0]
        elif im.mode in ("RGB", "RGBA"):
            px = np.asarray(im, dtype=np.float64)[..., :3].mean(axis=-1)
        else:
            raise BadImage(f"unsupported image mode {im.mode!r} in {path}")
    return px / 255.0


def to_bytes(img) -> np.ndarray:
    img = as_gray_image(img)
    return np.round(img * 255.0).astype(np.uint8)


def write_image(path, img) -> None:
    """Write ``img`` as 8-bit PGM (``.pgm``) or PNG (anything else)."""
    path = os.fspath(path)
    px = to_bytes(img)
    if path.lower().endswith(".pgm"):
        h, w = px.shape
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(px.tobytes())
    else:
        Image.fromarray(px).save(path, format="PNG")

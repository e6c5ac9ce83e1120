"""Image and raw-array file I/O.

Sidecar files (``.f64``) hold one float64 grid: a 16-byte header with the
height and width as little-endian uint64, followed by the samples as
little-endian float64 in row-major order.
"""
from __future__ import annotations

import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageIOError
from .grid import as_image

LUMA_WEIGHTS = (0.2989, 0.5870, 0.1140)
_HEADER = struct.Struct("<QQ")


def atomic_write_bytes(path, data: bytes):
    """Write ``data`` to ``path`` through a temporary file and an atomic rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def rgb_to_gray(rgb) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    return rgb[..., 0] * LUMA_WEIGHTS[0] + rgb[..., 1] * LUMA_WEIGHTS[1] + rgb[..., 2] * LUMA_WEIGHTS[2]


def load_image(path, size=None) -> np.ndarray:
    """Read a PNG/PGM (8 or 16 bit, gray or RGB) as a float image on [0, 1].

    ``size=(h, w)`` resizes bilinearly after the gray conversion.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("L", "LA"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            elif mode.startswith("I;16") or mode == "I":
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            elif mode in ("RGB", "RGBA", "P", "CMYK", "YCbCr"):
                arr = rgb_to_gray(np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0)
            elif mode == "1":
                arr = np.asarray(im, dtype=np.float64)
            else:
                raise ImageIOError(f"{path}: unsupported image mode {mode!r}")
    except FileNotFoundError as exc:
        raise ImageIOError(f"{path}: no such file") from exc
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        if isinstance(exc, ImageIOError):
            raise
        raise ImageIOError(f"{path}: cannot read image ({exc})") from exc
    arr = np.clip(arr, 0.0, 1.0)
    if size is not None:
        arr = resize(arr, size)
    return arr


def resize(img, size) -> np.ndarray:
    h, w = (int(v) for v in size)
    im = Image.fromarray(np.asarray(img, dtype=np.float32))
    out = np.asarray(im.resize((w, h), Image.BILINEAR), dtype=np.float64)
    return np.clip(out, 0.0, 1.0)


def save_image(img, path, bits=16):
    """Clamp to [0, 1], quantise to ``bits`` (8 or 16) and write a PNG/PGM."""
    x = np.clip(as_image(img), 0.0, 1.0)
    if bits == 16:
        q = np.round(x * 65535.0).astype(np.uint16)
        im = Image.fromarray(q)
    elif bits == 8:
        im = Image.fromarray(np.round(x * 255.0).astype(np.uint8))
    else:
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    path = Path(path)
    fmt = "PPM" if path.suffix.lower() in (".pgm", ".ppm") else "PNG"
    buf = io.BytesIO()
    im.save(buf, format=fmt)
    atomic_write_bytes(path, buf.getvalue())


def write_sidecar(path, arr):
    a = np.ascontiguousarray(as_image(arr), dtype="<f8")
    atomic_write_bytes(path, _HEADER.pack(*a.shape) + a.tobytes())


def read_sidecar(path) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot read sidecar ({exc})") from exc
    if len(raw) < _HEADER.size:
        raise ImageIOError(f"{path}: truncated sidecar header")
    h, w = _HEADER.unpack_from(raw)
    body = raw[_HEADER.size:]
    if len(body) != 8 * h * w:
        raise ImageIOError(f"{path}: expected {h}x{w} samples, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(h, w).astype(np.float64)

"""Minimal netpbm image I/O: binary PPM for renders, 16-bit PGM for ID buffers.

PPM (P6, maxval 255) is the baseline output everywhere; PNG is available as
an optional extra when Pillow is installed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError


def write_ppm(path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("PPM wants an (H, W, 3) uint8 array")
    h, w = rgb.shape[:2]
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    magic, rest = _split_token(data, path)
    if magic != b"P6":
        raise DataError(f"{path}: not a binary PPM (P6)")
    w, rest = _split_token(rest, path)
    h, rest = _split_token(rest, path)
    maxval, rest = _split_token(rest, path)
    if int(maxval) != 255:
        raise DataError(f"{path}: unsupported maxval {maxval.decode()}")
    w, h = int(w), int(h)
    pixels = rest[: w * h * 3]
    if len(pixels) < w * h * 3:
        raise DataError(f"{path}: truncated PPM payload")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w, 3).copy()


def write_pgm16(path, values: np.ndarray) -> None:
    """16-bit big-endian PGM; used to dump instance-ID buffers for debugging."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("PGM wants a 2-D array")
    if values.min() < 0 or values.max() > 65535:
        raise ValueError("PGM16 values must fit in uint16")
    h, w = values.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n65535\n" % (w, h))
        f.write(values.astype(">u2").tobytes())


def read_pgm16(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    magic, rest = _split_token(data, path)
    if magic != b"P5":
        raise DataError(f"{path}: not a binary PGM (P5)")
    w, rest = _split_token(rest, path)
    h, rest = _split_token(rest, path)
    maxval, rest = _split_token(rest, path)
    if int(maxval) != 65535:
        raise DataError(f"{path}: expected 16-bit PGM, maxval {maxval.decode()}")
    w, h = int(w), int(h)
    if len(rest) < w * h * 2:
        raise DataError(f"{path}: truncated PGM payload")
    return np.frombuffer(rest[: w * h * 2], dtype=">u2").reshape(h, w).astype(np.int32)


def _split_token(data: bytes, path) -> tuple[bytes, bytes]:
    # netpbm headers allow '#' comments between whitespace-separated tokens
    i = 0
    while True:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        break
    start = i
    while i < len(data) and not data[i : i + 1].isspace():
        i += 1
    if start == i:
        raise DataError(f"{path}: truncated netpbm header")
    return data[start:i], data[i + 1 :]


def write_png(path, rgb: np.ndarray) -> None:
    try:
        from PIL import Image
    except ImportError as exc:
        raise DataError(
            "PNG output needs Pillow; install the 'png' extra or use image_format=ppm"
        ) from exc
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)


def read_image(path) -> np.ndarray:
    """Read a render back as (H, W, 3) uint8, dispatching on extension."""
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        return read_ppm(path)
    try:
        from PIL import Image
    except ImportError as exc:
        raise DataError(f"reading {suffix} images needs Pillow") from exc
    return np.asarray(Image.open(path).convert("RGB"))


def write_image(path, rgb: np.ndarray) -> None:
    if Path(path).suffix.lower() == ".ppm":
        write_ppm(path, rgb)
    else:
        write_png(path, rgb)

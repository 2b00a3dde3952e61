"""Binary PGM/PPM encoding for sketch and mental-image files.

Layout is fixed: `P5\\n{W} {H}\\n255\\n` (P6 for color) followed by row-major
raw bytes, so identical pixels always produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def encode_pgm(pixels: np.ndarray) -> bytes:
    if pixels.ndim != 2:
        raise ValueError("PGM requires a 2-D grayscale array")
    if pixels.dtype != np.uint8:
        raise ValueError("PGM pixels must be uint8")
    h, w = pixels.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels).tobytes()


def encode_ppm(pixels: np.ndarray) -> bytes:
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("PPM requires an H x W x 3 array")
    if pixels.dtype != np.uint8:
        raise ValueError("PPM pixels must be uint8")
    h, w, _ = pixels.shape
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels).tobytes()


def write_pgm(pixels: np.ndarray, path: str | Path) -> int:
    """Write a grayscale image; returns the byte count written."""
    data = encode_pgm(pixels)
    Path(path).write_bytes(data)
    return len(data)


def write_ppm(pixels: np.ndarray, path: str | Path) -> int:
    data = encode_ppm(pixels)
    Path(path).write_bytes(data)
    return len(data)


def read_pgm(path: str | Path) -> np.ndarray:
    """Inverse of write_pgm for the exact layout this module emits."""
    data = Path(path).read_bytes()
    magic, dims, maxval_and_rest = data.split(b"\n", 2)
    if magic != b"P5":
        raise ValueError(f"not a binary PGM: {magic!r}")
    w, h = (int(t) for t in dims.split())
    maxval, raw = maxval_and_rest.split(b"\n", 1)
    if maxval != b"255":
        raise ValueError("only 8-bit PGM supported")
    if len(raw) != w * h:
        raise ValueError("PGM payload size mismatch")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w)

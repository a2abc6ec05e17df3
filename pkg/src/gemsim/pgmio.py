"""Minimal PGM (P2/P5) reader and writer for masks and intensity dumps.

Reading returns transmission values scaled to [0, 1].  Writing emits
binary P5 at 16-bit depth by default, max-normalized per image unless a
shared scale is supplied; the normalization constant is reported back so
the scenario CSV can record it.
"""

from __future__ import annotations

import re

import numpy as np

from .core import GemsimError


class PgmError(GemsimError):
    """Malformed or unreadable PGM data."""


def _tokenize_header(data: bytes):
    """Yield header tokens, skipping '#' comments."""
    pos = 0
    while True:
        match = re.compile(rb"\s*(#[^\n]*\n|\S+)").match(data, pos)
        if match is None:
            raise PgmError("truncated PGM header")
        pos = match.end()
        token = match.group(1)
        if not token.startswith(b"#"):
            yield token, pos


def read_pgm(path):
    """Read a P2 (ASCII) or P5 (binary) grayscale image as floats in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) == 0:
        raise PgmError(f"{path}: empty file")
    tokens = _tokenize_header(data)
    magic, _ = next(tokens)
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, body_start = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError):
        raise PgmError(f"{path}: malformed PGM header") from None
    if width <= 0 or height <= 0 or not (0 < maxval < 65536):
        raise PgmError(f"{path}: invalid PGM dimensions or maxval")

    count = width * height
    if magic == b"P2":
        values = np.array(data[body_start:].split(), dtype=float)
        if values.size != count:
            raise PgmError(f"{path}: expected {count} samples, got {values.size}")
    else:
        body = data[body_start + 1:]  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        expected = count * dtype.itemsize
        if len(body) < expected:
            raise PgmError(f"{path}: truncated pixel data")
        values = np.frombuffer(body[:expected], dtype=dtype).astype(float)
    return (values / maxval).reshape(height, width)


def write_pgm(path, values, maxval: int = 65535, scale=None):
    """Write a real non-negative array as binary P5.

    ``scale`` fixes the value mapped to ``maxval``; by default the image
    maximum is used (per-image normalization).  Returns the scale actually
    applied so callers can log it.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise PgmError("PGM output requires a 2D array")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise PgmError("PGM output requires finite non-negative values")
    if not (0 < maxval < 65536):
        raise PgmError("maxval must be in (0, 65535]")
    if scale is None:
        scale = float(arr.max()) if arr.max() > 0 else 1.0
    if scale <= 0:
        raise PgmError("scale must be positive")
    quantized = np.clip(np.round(arr / scale * maxval), 0, maxval)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    height, width = arr.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quantized.astype(dtype).tobytes())
    return scale

"""Readers for the big-endian IDX binary container used by the MNIST files.

Images live in IDX3 files (magic 2051): header of four 32-bit big-endian
integers (magic, count, rows, cols) followed by count*rows*cols unsigned
bytes. Labels live in IDX1 files (magic 2049): magic, count, then count
bytes. Pixels are returned raw in [0, 255]; scaling is left to the caller.
"""

import struct

import numpy as np

from .errors import FormatError

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049


def _read_header(data, path, n_fields):
    size = 4 * n_fields
    if len(data) < size:
        raise FormatError(f"{path}: truncated IDX header")
    return struct.unpack(f">{n_fields}i", data[:size]), data[size:]


def load_idx_images(path):
    """Load an IDX3 image file as an (n, rows*cols) float64 array of raw byte values."""
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, n, rows, cols), payload = _read_header(data, path, 4)
    if magic != IMAGES_MAGIC:
        raise FormatError(f"{path}: expected image magic {IMAGES_MAGIC}, got {magic}")
    if n < 0 or rows <= 0 or cols <= 0:
        raise FormatError(f"{path}: invalid header counts ({n}, {rows}, {cols})")
    expected = n * rows * cols
    if len(payload) != expected:
        raise FormatError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    return pixels.reshape(n, rows * cols)


def load_idx_labels(path):
    """Load an IDX1 label file as an (n,) int64 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, n), payload = _read_header(data, path, 2)
    if magic != LABELS_MAGIC:
        raise FormatError(f"{path}: expected label magic {LABELS_MAGIC}, got {magic}")
    if n < 0:
        raise FormatError(f"{path}: negative count {n}")
    if len(payload) != n:
        raise FormatError(f"{path}: payload has {len(payload)} bytes, header implies {n}")
    return np.frombuffer(payload, dtype=np.uint8).astype(np.int64)

import struct

import numpy as np
import pytest

from baglearn.errors import FormatError
from baglearn.idx import load_idx_images, load_idx_labels


def write_images(path, n, rows, cols, payload=None, magic=2051):
    data = struct.pack(">iiii", magic, n, rows, cols)
    if payload is None:
        payload = bytes(range(n * rows * cols % 256)) * 0 + bytes(
            (i % 256 for i in range(n * rows * cols))
        )
    path.write_bytes(data + payload)


def write_labels(path, values, magic=2049, n=None):
    n = len(values) if n is None else n
    path.write_bytes(struct.pack(">ii", magic, n) + bytes(values))


def test_images_header_arithmetic(tmp_path):
    path = tmp_path / "img.idx3"
    write_images(path, n=3, rows=2, cols=2)
    out = load_idx_images(path)
    assert out.shape == (3, 4)
    assert out.dtype == np.float64
    assert out.min() >= 0 and out.max() <= 255


def test_images_magic_accepted_and_rejected(tmp_path):
    good = tmp_path / "good.idx3"
    write_images(good, 1, 1, 1)
    load_idx_images(good)
    bad = tmp_path / "bad.idx3"
    write_images(bad, 1, 1, 1, magic=2049)
    with pytest.raises(FormatError):
        load_idx_images(bad)


def test_images_truncated_payload(tmp_path):
    path = tmp_path / "trunc.idx3"
    write_images(path, n=3, rows=2, cols=2, payload=bytes(11))
    with pytest.raises(FormatError):
        load_idx_images(path)


def test_images_extra_payload_rejected(tmp_path):
    path = tmp_path / "extra.idx3"
    write_images(path, n=1, rows=1, cols=1, payload=bytes(5))
    with pytest.raises(FormatError):
        load_idx_images(path)


def test_images_truncated_header(tmp_path):
    path = tmp_path / "short.idx3"
    path.write_bytes(b"\x00\x00")
    with pytest.raises(FormatError):
        load_idx_images(path)


def test_images_values_raw_bytes(tmp_path):
    path = tmp_path / "vals.idx3"
    write_images(path, n=1, rows=1, cols=3, payload=bytes([0, 128, 255]))
    out = load_idx_images(path)
    assert out.tolist() == [[0.0, 128.0, 255.0]]


def test_labels_basic(tmp_path):
    path = tmp_path / "lab.idx1"
    write_labels(path, [3, 7])
    assert load_idx_labels(path).tolist() == [3, 7]


def test_labels_wrong_magic(tmp_path):
    path = tmp_path / "lab.idx1"
    write_labels(path, [3, 7], magic=2051)
    with pytest.raises(FormatError):
        load_idx_labels(path)


def test_labels_empty_ok(tmp_path):
    path = tmp_path / "empty.idx1"
    write_labels(path, [])
    assert load_idx_labels(path).tolist() == []


def test_labels_truncation(tmp_path):
    path = tmp_path / "trunc.idx1"
    write_labels(path, [1, 2], n=3)
    with pytest.raises(FormatError):
        load_idx_labels(path)

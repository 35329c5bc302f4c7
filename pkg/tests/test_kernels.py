import os
import subprocess
import sys

import numpy as np
import pytest

from baglearn import kernels
from baglearn.kernels import numpy_ops

numba_ops = pytest.importorskip("baglearn.kernels.numba_ops")


def ragged(seed, n_bags=17, max_size=9, dim=6):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, max_size + 1, size=n_bags)
    offsets = np.zeros(n_bags + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    h = rng.normal(size=(offsets[-1], dim))
    scores = rng.normal(size=offsets[-1])
    dz = rng.normal(size=(n_bags, dim))
    return h, scores, dz, offsets


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("inv_temp", [1.0, 0.25, 4.0])
def test_softmax_parity(seed, inv_temp):
    _, scores, _, offsets = ragged(seed)
    a = numpy_ops.seg_softmax(scores, offsets, inv_temp)
    b = numba_ops.seg_softmax(scores, offsets, inv_temp)
    assert np.allclose(a, b, atol=1e-13)
    assert np.allclose(np.add.reduceat(a, offsets[:-1]), 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_softmax_grad_parity(seed):
    _, scores, _, offsets = ragged(seed)
    rng = np.random.default_rng(seed + 100)
    w = numpy_ops.seg_softmax(scores, offsets, 0.5)
    dw = rng.normal(size=w.shape)
    a = numpy_ops.seg_softmax_grad(w, dw, offsets, 0.5)
    b = numba_ops.seg_softmax_grad(w, dw, offsets, 0.5)
    assert np.allclose(a, b, atol=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_weighted_sum_parity(seed):
    h, scores, dz, offsets = ragged(seed)
    w = numpy_ops.seg_softmax(scores, offsets, 1.0)
    a = numpy_ops.seg_weighted_sum(h, w, offsets)
    b = numba_ops.seg_weighted_sum(h, w, offsets)
    assert np.allclose(a, b, atol=1e-13)
    da = numpy_ops.seg_weighted_sum_grad(h, w, dz, offsets)
    db = numba_ops.seg_weighted_sum_grad(h, w, dz, offsets)
    assert np.allclose(da[0], db[0], atol=1e-13)
    assert np.allclose(da[1], db[1], atol=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_mean_parity(seed):
    h, _, dz, offsets = ragged(seed)
    assert np.allclose(numpy_ops.seg_mean(h, offsets), numba_ops.seg_mean(h, offsets), atol=1e-13)
    assert np.allclose(numpy_ops.seg_mean_grad(dz, offsets), numba_ops.seg_mean_grad(dz, offsets), atol=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_max_parity(seed):
    h, _, dz, offsets = ragged(seed)
    za, aa = numpy_ops.seg_max(h, offsets)
    zb, ab = numba_ops.seg_max(h, offsets)
    assert np.array_equal(za, zb)
    assert np.array_equal(aa, ab)
    ga = numpy_ops.seg_max_grad(dz, aa, h.shape[0], h.shape[1])
    gb = numba_ops.seg_max_grad(dz, ab, h.shape[0], h.shape[1])
    assert np.allclose(ga, gb, atol=1e-13)
    wa = numpy_ops.seg_max_weights(h, za, offsets)
    wb = numba_ops.seg_max_weights(h, zb, offsets)
    assert np.allclose(wa, wb, atol=1e-13)
    assert np.allclose(np.add.reduceat(wa, offsets[:-1]), 1.0)


def test_max_weights_with_duplicates():
    # duplicated rows force ties on every coordinate
    h = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    offsets = np.array([0, 3], dtype=np.int64)
    z, _ = numpy_ops.seg_max(h, offsets)
    wa = numpy_ops.seg_max_weights(h, z, offsets)
    wb = numba_ops.seg_max_weights(h, z, offsets)
    assert np.allclose(wa, [0.5, 0.5, 0.0])
    assert np.allclose(wa, wb)


def test_dispatch_switch_roundtrip():
    original = kernels.active_backend()
    scores = np.array([0.0, 1.0, -1.0])
    offsets = np.array([0, 3], dtype=np.int64)
    try:
        kernels.use_backend("numpy")
        assert kernels.active_backend() == "numpy"
        a = kernels.seg_softmax(scores, offsets, 1.0)
        kernels.use_backend("numba")
        assert kernels.active_backend() == "numba"
        b = kernels.seg_softmax(scores, offsets, 1.0)
        assert np.allclose(a, b)
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")
    finally:
        kernels.use_backend(original)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, BAGLEARN_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from baglearn import kernels; print(kernels.active_backend())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"

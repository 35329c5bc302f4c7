"""Pure-numpy segment kernels.

All kernels operate on a flat instance axis partitioned into contiguous
segments (one segment per bag) described by an ``offsets`` array of length
``n_bags + 1``: segment ``b`` covers rows ``offsets[b]:offsets[b + 1]``.
Segments are never empty.

This module is the reference implementation; ``numba_ops`` provides
loop-compiled twins with identical semantics.
"""

import numpy as np


def _starts(offsets):
    return offsets[:-1]


def _seg_ids(offsets):
    sizes = np.diff(offsets)
    return np.repeat(np.arange(len(sizes)), sizes)


def seg_softmax(scores, offsets, inv_temp):
    """Per-segment softmax of ``scores * inv_temp``, numerically stabilized."""
    q = scores * inv_temp
    starts = _starts(offsets)
    ids = _seg_ids(offsets)
    m = np.maximum.reduceat(q, starts)
    e = np.exp(q - m[ids])
    denom = np.add.reduceat(e, starts)
    return e / denom[ids]


def seg_softmax_grad(weights, dweights, offsets, inv_temp):
    """Gradient of seg_softmax w.r.t. the raw scores."""
    starts = _starts(offsets)
    ids = _seg_ids(offsets)
    dot = np.add.reduceat(weights * dweights, starts)
    return weights * (dweights - dot[ids]) * inv_temp


def seg_weighted_sum(h, weights, offsets):
    """Per-segment weighted sum of rows: z_b = sum_i w_i * h_i."""
    starts = _starts(offsets)
    return np.add.reduceat(h * weights[:, None], starts, axis=0)


def seg_weighted_sum_grad(h, weights, dz, offsets):
    """Backward of seg_weighted_sum: returns (dh, dweights)."""
    ids = _seg_ids(offsets)
    dz_rows = dz[ids]
    dh = weights[:, None] * dz_rows
    dweights = np.einsum("ij,ij->i", h, dz_rows)
    return dh, dweights


def seg_mean(h, offsets):
    """Per-segment mean of rows."""
    starts = _starts(offsets)
    sizes = np.diff(offsets)
    return np.add.reduceat(h, starts, axis=0) / sizes[:, None]


def seg_mean_grad(dz, offsets):
    """Backward of seg_mean: every row of segment b receives dz_b / n_b."""
    sizes = np.diff(offsets)
    ids = _seg_ids(offsets)
    return dz[ids] / sizes[ids][:, None]


def seg_max(h, offsets):
    """Per-segment coordinate-wise max; returns (z, argmax_rows).

    ``argmax_rows[b, j]`` is the global row index of the first row attaining
    the max of coordinate j in segment b.
    """
    starts = _starts(offsets)
    ids = _seg_ids(offsets)
    z = np.maximum.reduceat(h, starts, axis=0)
    n = h.shape[0]
    rows = np.arange(n)[:, None]
    candidate = np.where(h == z[ids], rows, n)
    arg = np.minimum.reduceat(candidate, starts, axis=0)
    return z, arg


def seg_max_grad(dz, arg, n_rows, n_cols):
    """Backward of seg_max: route each dz[b, j] to the attaining row."""
    dh = np.zeros((n_rows, n_cols))
    cols = np.tile(np.arange(n_cols), dz.shape[0])
    np.add.at(dh, (arg.ravel(), cols), dz.ravel())
    return dh


def seg_max_weights(h, z, offsets):
    """Max-pooling attribution: weight_i = fraction of coordinates row i attains.

    Coordinates tied across several rows split their 1/n_cols share evenly.
    Weights are nonnegative and sum to 1 within each segment.
    """
    starts = _starts(offsets)
    ids = _seg_ids(offsets)
    attain = (h == z[ids]).astype(np.float64)
    counts = np.add.reduceat(attain, starts, axis=0)
    share = attain / counts[ids]
    return share.sum(axis=1) / h.shape[1]

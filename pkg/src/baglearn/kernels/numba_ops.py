"""Numba-compiled twins of the numpy segment kernels.

Same contracts as ``numpy_ops``; explicit loops over segments avoid the
temporaries and fancy-indexing passes of the fallback path. Importing this
module requires numba; the dispatcher guards the import.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def seg_softmax(scores, offsets, inv_temp):
    n = scores.shape[0]
    out = np.empty(n)
    for b in range(offsets.shape[0] - 1):
        lo, hi = offsets[b], offsets[b + 1]
        m = scores[lo] * inv_temp
        for i in range(lo + 1, hi):
            q = scores[i] * inv_temp
            if q > m:
                m = q
        denom = 0.0
        for i in range(lo, hi):
            e = np.exp(scores[i] * inv_temp - m)
            out[i] = e
            denom += e
        for i in range(lo, hi):
            out[i] /= denom
    return out


@njit(cache=True)
def seg_softmax_grad(weights, dweights, offsets, inv_temp):
    n = weights.shape[0]
    out = np.empty(n)
    for b in range(offsets.shape[0] - 1):
        lo, hi = offsets[b], offsets[b + 1]
        dot = 0.0
        for i in range(lo, hi):
            dot += weights[i] * dweights[i]
        for i in range(lo, hi):
            out[i] = weights[i] * (dweights[i] - dot) * inv_temp
    return out


@njit(cache=True)
def seg_weighted_sum(h, weights, offsets):
    n_bags = offsets.shape[0] - 1
    n_cols = h.shape[1]
    z = np.zeros((n_bags, n_cols))
    for b in range(n_bags):
        for i in range(offsets[b], offsets[b + 1]):
            w = weights[i]
            for j in range(n_cols):
                z[b, j] += w * h[i, j]
    return z


@njit(cache=True)
def seg_weighted_sum_grad(h, weights, dz, offsets):
    n, n_cols = h.shape
    dh = np.empty((n, n_cols))
    dweights = np.empty(n)
    for b in range(offsets.shape[0] - 1):
        for i in range(offsets[b], offsets[b + 1]):
            acc = 0.0
            w = weights[i]
            for j in range(n_cols):
                dh[i, j] = w * dz[b, j]
                acc += h[i, j] * dz[b, j]
            dweights[i] = acc
    return dh, dweights


@njit(cache=True)
def seg_mean(h, offsets):
    n_bags = offsets.shape[0] - 1
    n_cols = h.shape[1]
    z = np.zeros((n_bags, n_cols))
    for b in range(n_bags):
        lo, hi = offsets[b], offsets[b + 1]
        for i in range(lo, hi):
            for j in range(n_cols):
                z[b, j] += h[i, j]
        inv = 1.0 / (hi - lo)
        for j in range(n_cols):
            z[b, j] *= inv
    return z


@njit(cache=True)
def seg_mean_grad(dz, offsets):
    n = offsets[-1]
    n_cols = dz.shape[1]
    dh = np.empty((n, n_cols))
    for b in range(offsets.shape[0] - 1):
        lo, hi = offsets[b], offsets[b + 1]
        inv = 1.0 / (hi - lo)
        for i in range(lo, hi):
            for j in range(n_cols):
                dh[i, j] = dz[b, j] * inv
    return dh


@njit(cache=True)
def seg_max(h, offsets):
    n_bags = offsets.shape[0] - 1
    n_cols = h.shape[1]
    z = np.empty((n_bags, n_cols))
    arg = np.empty((n_bags, n_cols), dtype=np.int64)
    for b in range(n_bags):
        lo, hi = offsets[b], offsets[b + 1]
        for j in range(n_cols):
            best = h[lo, j]
            best_i = lo
            for i in range(lo + 1, hi):
                if h[i, j] > best:
                    best = h[i, j]
                    best_i = i
            z[b, j] = best
            arg[b, j] = best_i
    return z, arg


@njit(cache=True)
def seg_max_grad(dz, arg, n_rows, n_cols):
    dh = np.zeros((n_rows, n_cols))
    for b in range(dz.shape[0]):
        for j in range(n_cols):
            dh[arg[b, j], j] += dz[b, j]
    return dh


@njit(cache=True)
def seg_max_weights(h, z, offsets):
    n, n_cols = h.shape
    weights = np.zeros(n)
    inv_cols = 1.0 / n_cols
    for b in range(offsets.shape[0] - 1):
        lo, hi = offsets[b], offsets[b + 1]
        for j in range(n_cols):
            count = 0
            for i in range(lo, hi):
                if h[i, j] == z[b, j]:
                    count += 1
            share = inv_cols / count
            for i in range(lo, hi):
                if h[i, j] == z[b, j]:
                    weights[i] += share
    return weights

"""Pooling operators that collapse instance embeddings into bag embeddings.

Every operator is permutation-invariant and yields one nonnegative weight
per instance summing to 1 within a bag; the weights double as instance
attributions:

- mean:      z = average embedding, uniform weights.
- max:       z = coordinate-wise max; weight = fraction of coordinates an
             instance attains (ties split evenly).
- attention: scores s_i = u . tanh(V h_i), weights = softmax(s), z = sum.
- dynamic:   attention with temperature tau, weights = softmax(s / tau).
- gated:     s_i = u . (tanh(V h_i) * sigmoid(U h_i)), weights = softmax(s).

Batched forms operate on a flat embedding matrix plus segment offsets so
the whole batch runs through the segment kernels at once.
"""

import numpy as np

from . import kernels
from .errors import ConfigError, DataError
from .nn import glorot_uniform, sigmoid

POOLING_KINDS = ("mean", "max", "attention", "dynamic", "gated")
ATTENTION_KINDS = ("attention", "dynamic", "gated")


def check_pooling(kind, temperature=1.0):
    if kind not in POOLING_KINDS:
        raise ConfigError(f"pooling must be one of {POOLING_KINDS}, got {kind!r}")
    if temperature <= 0:
        raise ConfigError(f"pooling temperature must be positive, got {temperature}")


def init_attention(rng, embed_dim, attention_hidden, gated):
    """Glorot-initialized scorer parameters: V (a, h), u (a,), gate U (a, h)."""
    params = {
        "v": glorot_uniform(rng, attention_hidden, embed_dim),
        "u": glorot_uniform(rng, 1, attention_hidden)[0],
    }
    if gated:
        params["gate"] = glorot_uniform(rng, attention_hidden, embed_dim)
    return params


def attention_param_list(attn):
    out = [attn["v"], attn["u"]]
    if "gate" in attn:
        out.append(attn["gate"])
    return out


def pool_forward(kind, h, offsets, attn=None, temperature=1.0):
    """Pool each segment of h; returns (z, weights, cache)."""
    if kind == "mean":
        z = kernels.seg_mean(h, offsets)
        sizes = np.diff(offsets)
        weights = np.repeat(1.0 / sizes, sizes)
        return z, weights, {"kind": kind, "offsets": offsets}
    if kind == "max":
        z, arg = kernels.seg_max(h, offsets)
        weights = kernels.seg_max_weights(h, z, offsets)
        return z, weights, {"kind": kind, "offsets": offsets, "arg": arg, "shape": h.shape}
    inv_temp = 1.0 / temperature if kind == "dynamic" else 1.0
    pre = h @ attn["v"].T
    t = np.tanh(pre)
    if kind == "gated":
        g = sigmoid(h @ attn["gate"].T)
        scores = (t * g) @ attn["u"]
    else:
        g = None
        scores = t @ attn["u"]
    weights = kernels.seg_softmax(scores, offsets, inv_temp)
    z = kernels.seg_weighted_sum(h, weights, offsets)
    cache = {
        "kind": kind,
        "offsets": offsets,
        "h": h,
        "t": t,
        "g": g,
        "weights": weights,
        "attn": attn,
        "inv_temp": inv_temp,
    }
    return z, weights, cache


def pool_backward(cache, dz):
    """Gradients of the pooled embeddings; returns (dh, attn_grads).

    attn_grads is None for mean/max, else a dict matching the scorer params.
    """
    kind = cache["kind"]
    offsets = cache["offsets"]
    if kind == "mean":
        return kernels.seg_mean_grad(dz, offsets), None
    if kind == "max":
        n, d = cache["shape"]
        return kernels.seg_max_grad(dz, cache["arg"], n, d), None
    h, t, g = cache["h"], cache["t"], cache["g"]
    attn, weights = cache["attn"], cache["weights"]
    dh, dweights = kernels.seg_weighted_sum_grad(h, weights, dz, offsets)
    dscores = kernels.seg_softmax_grad(weights, dweights, offsets, cache["inv_temp"])
    u = attn["u"]
    if kind == "gated":
        tg = t * g
        du = tg.T @ dscores
        dt = dscores[:, None] * (u[None, :] * g)
        dgate_act = dscores[:, None] * (u[None, :] * t)
        dpre_gate = dgate_act * g * (1.0 - g)
        dgate = dpre_gate.T @ h
        dh += dpre_gate @ attn["gate"]
    else:
        du = t.T @ dscores
        dt = dscores[:, None] * u[None, :]
        dgate = None
    dpre = dt * (1.0 - t * t)
    dv = dpre.T @ h
    dh += dpre @ attn["v"]
    grads = {"v": dv, "u": du}
    if dgate is not None:
        grads["gate"] = dgate
    return dh, grads


def pool(kind, embeddings, attn=None, temperature=1.0):
    """Pool a single bag of embeddings; returns (bag_embedding, weights)."""
    check_pooling(kind, temperature)
    h = np.asarray(embeddings, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] < 1:
        raise DataError("pool needs a non-empty (n_instances, dim) array")
    if kind in ATTENTION_KINDS and attn is None:
        raise ConfigError(f"{kind} pooling needs attention parameters")
    offsets = np.array([0, h.shape[0]], dtype=np.int64)
    z, weights, _ = pool_forward(kind, h, offsets, attn=attn, temperature=temperature)
    return z[0], weights

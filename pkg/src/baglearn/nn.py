"""Minimal dense-network engine used by every neural estimator.

Supports fully-connected stacks described by an MLPSpec, reverse-mode
gradients, the two losses used in this package (squared error and binary
cross-entropy on logits), Adam with decoupled weight decay, and a central
finite-difference gradient checker. All math is float64.

Parameters are a list of (W, b) pairs with W of shape (out, in). Inputs may
be single vectors (d,) or batches (n, d); batched backward sums parameter
gradients over the batch.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

HIDDEN_ACTIVATIONS = ("relu", "tanh")
OUTPUT_ACTIVATIONS = ("identity", "sigmoid")


@dataclass
class MLPSpec:
    layer_sizes: tuple
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ConfigError("need at least input and output sizes")
        if any(s < 1 for s in self.layer_sizes):
            raise ConfigError(f"layer sizes must be >= 1, got {self.layer_sizes}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ConfigError(f"hidden_activation must be one of {HIDDEN_ACTIVATIONS}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ConfigError(f"output_activation must be one of {OUTPUT_ACTIVATIONS}")

    @property
    def n_layers(self):
        return len(self.layer_sizes) - 1

    def to_dict(self):
        return {
            "layer_sizes": list(self.layer_sizes),
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            layer_sizes=tuple(payload["layer_sizes"]),
            hidden_activation=payload["hidden_activation"],
            output_activation=payload["output_activation"],
        )


def glorot_uniform(rng, n_out, n_in):
    limit = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-limit, limit, size=(n_out, n_in))


def init_params(spec, seed):
    """Glorot-uniform weights, zero biases; deterministic under seed."""
    rng = np.random.default_rng(seed)
    return init_params_rng(spec, rng)


def init_params_rng(spec, rng):
    params = []
    sizes = spec.layer_sizes
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        params.append((glorot_uniform(rng, n_out, n_in), np.zeros(n_out)))
    return params


def _activate(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return sigmoid(z)
    return z


def _activation_grad(name, z, a):
    # derivative of the activation at z, expressed via z and a = act(z)
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


def forward(spec, params, x):
    """Run the stack; returns (output, cache) with cache feeding backward."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.shape[1] != spec.layer_sizes[0]:
        raise ShapeError(f"input has {a.shape[1]} features, spec expects {spec.layer_sizes[0]}")
    inputs, pre, post = [a], [], []
    n = spec.n_layers
    for l, (w, b) in enumerate(params):
        z = a @ w.T + b
        name = spec.output_activation if l == n - 1 else spec.hidden_activation
        a = _activate(name, z)
        pre.append(z)
        post.append(a)
        if l < n - 1:
            inputs.append(a)
    cache = {"inputs": inputs, "pre": pre, "post": post, "single": single}
    return (a[0] if single else a), cache


def backward(spec, params, cache, grad_output):
    """Exact reverse-mode gradients; returns (param_grads, input_grad).

    param_grads mirrors params as (dW, db) pairs, summed over the batch.
    """
    grad_output = np.asarray(grad_output, dtype=np.float64)
    single = cache["single"]
    d_a = grad_output[None, :] if single else grad_output
    if d_a.shape != cache["post"][-1].shape:
        raise ShapeError(f"grad_output shape {d_a.shape} != output shape {cache['post'][-1].shape}")
    n = spec.n_layers
    grads = [None] * n
    for l in range(n - 1, -1, -1):
        name = spec.output_activation if l == n - 1 else spec.hidden_activation
        d_z = d_a * _activation_grad(name, cache["pre"][l], cache["post"][l])
        w, _ = params[l]
        grads[l] = (d_z.T @ cache["inputs"][l], d_z.sum(axis=0))
        d_a = d_z @ w
    return grads, (d_a[0] if single else d_a)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_mse(pred, y):
    """Squared error and its gradient w.r.t. pred."""
    d = np.asarray(pred, dtype=np.float64) - y
    return d * d, 2.0 * d


def loss_bce_with_logits(logit, y):
    """Numerically stable binary cross-entropy on logits; gradient is sigmoid(z) - y."""
    z = np.asarray(logit, dtype=np.float64)
    loss = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return loss, sigmoid(z) - y


LOSSES = {"mse": loss_mse, "bce": loss_bce_with_logits}


@dataclass
class AdamState:
    """Adam moments for a flat list of parameter arrays.

    Weight decay is decoupled: applied as w -= lr * wd * w before the
    moment update.
    """

    learning_rate: float
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_arrays(cls, arrays, learning_rate, weight_decay=0.0):
        state = cls(learning_rate=learning_rate, weight_decay=weight_decay)
        state.m = [np.zeros_like(a) for a in arrays]
        state.v = [np.zeros_like(a) for a in arrays]
        return state


def adam_step(arrays, grads, state):
    """One Adam update, in place; returns (arrays, state)."""
    if len(arrays) != len(state.m) or len(arrays) != len(grads):
        raise ShapeError("adam state does not match parameter list")
    state.t += 1
    lr = state.learning_rate
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for w, g, m, v in zip(arrays, grads, state.m, state.v):
        if state.weight_decay != 0.0:
            w -= lr * state.weight_decay * w
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        w -= lr * (m / bias1) / (np.sqrt(v / bias2) + state.epsilon)
    return arrays, state


def params_to_flat_list(params):
    """[(W, b), ...] -> [W0, b0, W1, b1, ...] (views, not copies)."""
    flat = []
    for w, b in params:
        flat.append(w)
        flat.append(b)
    return flat


def mlp_to_dict(spec, params):
    """JSON-ready form: {"spec": {...}, "layers": [{"w": ..., "b": ...}, ...]}."""
    return {
        "spec": spec.to_dict(),
        "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in params],
    }


def mlp_from_dict(payload):
    """Inverse of mlp_to_dict; returns (spec, params) and validates shapes."""
    spec = MLPSpec.from_dict(payload["spec"])
    params = [
        (np.asarray(layer["w"], dtype=np.float64), np.asarray(layer["b"], dtype=np.float64))
        for layer in payload["layers"]
    ]
    sizes = spec.layer_sizes
    if len(params) != spec.n_layers:
        raise ShapeError(f"{len(params)} layers for a {spec.n_layers}-layer spec")
    for l, (w, b) in enumerate(params):
        if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
            raise ShapeError(f"layer {l} has shapes {w.shape}/{b.shape}, spec expects "
                             f"({sizes[l + 1]}, {sizes[l]})/({sizes[l + 1]},)")
    return spec, params


def relative_error(a, b):
    return np.abs(a - b) / np.maximum(1e-12, np.abs(a) + np.abs(b))


def gradient_check(spec, params, x, y, loss_kind, eps=1e-5):
    """Max relative error between backprop and central finite differences.

    The scalar objective is the sum of the per-output losses, so vector
    outputs are covered by one check.
    """
    loss_fn = LOSSES[loss_kind]
    y = np.asarray(y, dtype=np.float64)

    def total_loss():
        out, _ = forward(spec, params, x)
        return float(np.sum(loss_fn(out, y)[0]))

    out, cache = forward(spec, params, x)
    _, d_out = loss_fn(out, y)
    grads, _ = backward(spec, params, cache, d_out)

    worst = 0.0
    for (w, b), (dw, db) in zip(params, grads):
        for arr, bp in ((w, dw), (b, db)):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                up = total_loss()
                arr[idx] = orig - eps
                down = total_loss()
                arr[idx] = orig
                fd = (up - down) / (2.0 * eps)
                worst = max(worst, float(relative_error(bp[idx], fd)))
    return worst

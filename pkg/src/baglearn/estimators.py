"""MIL estimators under a common fit / predict / get_instance_weights contract.

Three families:

- NeuralMIL: instance encoder MLP + pooling (mean/max/attention/dynamic/
  gated) + head MLP, trained end to end with Adam. The pooling weights are
  the per-instance attributions.
- InstanceWrapper: a plain MLP trained on the flattened instance table where
  every instance inherits its bag label; bag prediction aggregates the
  instance predictions, attributions are a per-bag softmax of the scores.
- BagWrapper: each bag collapsed to one vector by elementwise aggregation,
  then a plain MLP; carries no instance attribution (uniform weights).

Classification is binary with labels {0, 1}, trained on logits with
binary cross-entropy and thresholded at 0.5; regression minimizes squared
error. Fitting is deterministic given (config, dataset): identical runs
serialize to identical JSON.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import nn
from .bags import BagDataset, CLASSIFICATION, REGRESSION, TASKS, as_bag, flatten_bags
from .errors import ConfigError, DataError, NumericError
from .kernels import seg_softmax
from .pooling import (
    ATTENTION_KINDS,
    attention_param_list,
    check_pooling,
    init_attention,
    pool_backward,
    pool_forward,
)

AGGREGATIONS = ("mean", "max", "min")


def _as_bag_list(data):
    if isinstance(data, BagDataset):
        return list(data.bags)
    if isinstance(data, np.ndarray) and data.ndim == 2:
        return [as_bag(data)]
    return [as_bag(b) for b in data]


def _check_task(task):
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")


def _check_fit_data(config, dataset):
    if not isinstance(dataset, BagDataset):
        raise DataError("fit expects a BagDataset")
    if len(dataset) == 0:
        raise DataError("cannot fit on an empty dataset")
    if dataset.task != config.task:
        raise ConfigError(f"{config.task} model cannot fit a {dataset.task} dataset")


@dataclass
class NeuralMILConfig:
    task: str
    pooling: str = "attention"
    temperature: float = 1.0
    encoder_hidden: tuple = (256, 128)
    attention_hidden: int = 64
    head_hidden: tuple = (64,)
    epochs: int = 200
    batch_bags: int = 32
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    warm_start_epochs: int = 0
    seed: int = 0

    def __post_init__(self):
        _check_task(self.task)
        check_pooling(self.pooling, self.temperature)
        self.encoder_hidden = tuple(int(s) for s in self.encoder_hidden)
        self.head_hidden = tuple(int(s) for s in self.head_hidden)
        if len(self.encoder_hidden) < 1:
            raise ConfigError("encoder needs at least one layer")
        if self.epochs < 1 or self.batch_bags < 1:
            raise ConfigError("epochs and batch_bags must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.attention_hidden < 1:
            raise ConfigError("attention_hidden must be >= 1")
        if self.warm_start_epochs < 0:
            raise ConfigError("warm_start_epochs must be >= 0")

    def to_dict(self):
        d = dict(self.__dict__)
        d["encoder_hidden"] = list(self.encoder_hidden)
        d["head_hidden"] = list(self.head_hidden)
        return d

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)


def _params_to_json(params):
    return [{"w": w.tolist(), "b": b.tolist()} for w, b in params]


def _params_from_json(payload):
    return [
        (np.asarray(layer["w"], dtype=np.float64), np.asarray(layer["b"], dtype=np.float64))
        for layer in payload
    ]


class NeuralMIL:
    """Encoder + pooling + head bag network exposing per-instance weights."""

    kind = "neural"

    def __init__(self, config):
        self.config = config
        self.encoder_spec = None
        self.encoder_params = None
        self.attn_params = None
        self.head_spec = None
        self.head_params = None
        self.target_center_ = 0.0
        self.target_scale_ = 1.0
        self.training_log_ = None

    @property
    def _loss(self):
        return nn.loss_mse if self.config.task == REGRESSION else nn.loss_bce_with_logits

    def _fit_target_transform(self, labels):
        """Conditioning for regression targets: shift them below zero and scale
        to unit variance.

        The network fits t = (y - center) / scale and predictions are mapped
        back. Centering above the label maximum makes the magnitude of the
        training target decrease with the label, which empirically drives the
        attention scores to rank instances by their contribution instead of
        against it; it leaves predictions and R² unchanged.
        """
        if self.config.task != REGRESSION:
            return
        std = float(labels.std())
        if std == 0.0:
            self.target_center_ = float(labels.max())
            self.target_scale_ = 1.0
        else:
            self.target_center_ = float(labels.max() + 2.0 * std)
            self.target_scale_ = std

    def _build(self, dim, rng):
        cfg = self.config
        self.encoder_spec = nn.MLPSpec((dim, *cfg.encoder_hidden), "relu", "identity")
        self.encoder_params = nn.init_params_rng(self.encoder_spec, rng)
        embed = cfg.encoder_hidden[-1]
        if cfg.pooling in ATTENTION_KINDS:
            self.attn_params = init_attention(rng, embed, cfg.attention_hidden, cfg.pooling == "gated")
        self.head_spec = nn.MLPSpec((embed, *cfg.head_hidden, 1), "relu", "identity")
        self.head_params = nn.init_params_rng(self.head_spec, rng)

    def _trainable(self):
        arrays = nn.params_to_flat_list(self.encoder_params)
        if self.attn_params is not None:
            arrays += attention_param_list(self.attn_params)
        return arrays + nn.params_to_flat_list(self.head_params)

    def _batch_loss_grads(self, bags, y):
        """Mean loss over the batch and gradients for every trainable array."""
        cfg = self.config
        x, offsets = flatten_bags(bags)
        h, enc_cache = nn.forward(self.encoder_spec, self.encoder_params, x)
        z, _, pool_cache = pool_forward(cfg.pooling, h, offsets, self.attn_params, cfg.temperature)
        out, head_cache = nn.forward(self.head_spec, self.head_params, z)
        losses, d_out = self._loss(out[:, 0], y)
        n = len(bags)
        head_grads, dz = nn.backward(self.head_spec, self.head_params, head_cache, d_out[:, None] / n)
        dh, attn_grads = pool_backward(pool_cache, dz)
        enc_grads, _ = nn.backward(self.encoder_spec, self.encoder_params, enc_cache, dh)
        grads = nn.params_to_flat_list(enc_grads)
        if attn_grads is not None:
            grads += attention_param_list(attn_grads)
        grads += nn.params_to_flat_list(head_grads)
        return float(np.mean(losses)), grads

    def _warm_start(self, dataset, targets, rng):
        """Instance-level pretraining: encoder and head fit the flattened
        instance table with inherited bag targets, then the scorer is fitted
        to reproduce the standardized per-instance readouts.

        Warm-started attention therefore begins by ranking instances the way
        an instance-level model would, and end-to-end training refines it.
        """
        cfg = self.config
        x, offsets = flatten_bags(dataset.bags)
        y = np.repeat(targets, np.diff(offsets))
        n = x.shape[0]
        arrays = nn.params_to_flat_list(self.encoder_params) + nn.params_to_flat_list(self.head_params)
        state = nn.AdamState.for_arrays(arrays, cfg.learning_rate, cfg.weight_decay)
        batch = max(cfg.batch_bags * 8, 64)
        for _ in range(cfg.warm_start_epochs):
            perm = rng.permutation(n)
            for start in range(0, n, batch):
                idx = perm[start : start + batch]
                h, enc_cache = nn.forward(self.encoder_spec, self.encoder_params, x[idx])
                out, head_cache = nn.forward(self.head_spec, self.head_params, h)
                losses, d_out = self._loss(out[:, 0], y[idx])
                if not np.isfinite(np.mean(losses)):
                    raise NumericError("non-finite loss during warm start")
                head_grads, dh = nn.backward(self.head_spec, self.head_params, head_cache, d_out[:, None] / len(idx))
                enc_grads, _ = nn.backward(self.encoder_spec, self.encoder_params, enc_cache, dh)
                nn.adam_step(arrays, nn.params_to_flat_list(enc_grads) + nn.params_to_flat_list(head_grads), state)
        if self.attn_params is None:
            return
        h, _ = nn.forward(self.encoder_spec, self.encoder_params, x)
        out, _ = nn.forward(self.head_spec, self.head_params, h)
        score_target = out[:, 0] - out[:, 0].mean()
        std = score_target.std()
        if std > 0:
            score_target /= std
        attn_arrays = attention_param_list(self.attn_params)
        state = nn.AdamState.for_arrays(attn_arrays, cfg.learning_rate)
        gated = self.config.pooling == "gated"
        for _ in range(cfg.warm_start_epochs):
            perm = rng.permutation(n)
            for start in range(0, n, batch):
                idx = perm[start : start + batch]
                hb, tb = h[idx], score_target[idx]
                pre = hb @ self.attn_params["v"].T
                t = np.tanh(pre)
                if gated:
                    g = nn.sigmoid(hb @ self.attn_params["gate"].T)
                    s = (t * g) @ self.attn_params["u"]
                else:
                    g = None
                    s = t @ self.attn_params["u"]
                d_s = 2.0 * (s - tb) / len(idx)
                if gated:
                    tg = t * g
                    du = tg.T @ d_s
                    dt = d_s[:, None] * (self.attn_params["u"][None, :] * g)
                    dpre_gate = d_s[:, None] * (self.attn_params["u"][None, :] * t) * g * (1.0 - g)
                    dgate = dpre_gate.T @ hb
                else:
                    du = t.T @ d_s
                    dt = d_s[:, None] * self.attn_params["u"][None, :]
                dpre = dt * (1.0 - t * t)
                dv = dpre.T @ hb
                grads = [dv, du] + ([dgate] if gated else [])
                nn.adam_step(attn_arrays, grads, state)

    def fit(self, dataset):
        _check_fit_data(self.config, dataset)
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        self._build(dataset.dim, rng)
        self._fit_target_transform(dataset.labels)
        targets = (dataset.labels - self.target_center_) / self.target_scale_
        if cfg.warm_start_epochs > 0:
            self._warm_start(dataset, targets, rng)
        arrays = self._trainable()
        state = nn.AdamState.for_arrays(arrays, cfg.learning_rate, cfg.weight_decay)
        n = len(dataset)
        log = []
        for _ in range(cfg.epochs):
            perm = rng.permutation(n)
            epoch_loss = 0.0
            n_batches = 0
            for start in range(0, n, cfg.batch_bags):
                idx = perm[start : start + cfg.batch_bags]
                batch_bags = [dataset.bags[i] for i in idx]
                loss, grads = self._batch_loss_grads(batch_bags, targets[idx])
                if not np.isfinite(loss):
                    raise NumericError(f"non-finite training loss at step {state.t}")
                nn.adam_step(arrays, grads, state)
                epoch_loss += loss
                n_batches += 1
            log.append(epoch_loss / n_batches)
        self.training_log_ = log
        return self

    def _forward_bags(self, data):
        if self.encoder_params is None:
            raise DataError("model is not fitted")
        bags = _as_bag_list(data)
        if not bags:
            raise DataError("no bags to predict")
        dim = self.encoder_spec.layer_sizes[0]
        for b in bags:
            if b.shape[1] != dim:
                raise DataError(f"bag has dimension {b.shape[1]}, model expects {dim}")
        x, offsets = flatten_bags(bags)
        h, _ = nn.forward(self.encoder_spec, self.encoder_params, x)
        z, weights, _ = pool_forward(
            self.config.pooling, h, offsets, self.attn_params, self.config.temperature
        )
        out, _ = nn.forward(self.head_spec, self.head_params, z)
        return out[:, 0], weights, offsets

    def decision_values(self, data):
        """Bag-level values: probabilities for classification, predictions in
        label units for regression."""
        out = self._forward_bags(data)[0]
        if self.config.task == CLASSIFICATION:
            return nn.sigmoid(out)
        return out * self.target_scale_ + self.target_center_

    def predict_proba(self, data):
        if self.config.task != CLASSIFICATION:
            raise ConfigError("predict_proba is only defined for classification")
        return nn.sigmoid(self._forward_bags(data)[0])

    def predict(self, data):
        values = self.decision_values(data)
        if self.config.task == CLASSIFICATION:
            return (values >= 0.5).astype(np.int64)
        return values

    def get_instance_weights(self, data):
        _, weights, offsets = self._forward_bags(data)
        return [weights[offsets[b] : offsets[b + 1]] for b in range(len(offsets) - 1)]

    def to_dict(self):
        payload = {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "params": {
                "encoder": _params_to_json(self.encoder_params),
                "head": _params_to_json(self.head_params),
                "target_transform": {"center": self.target_center_, "scale": self.target_scale_},
            },
        }
        if self.attn_params is not None:
            payload["params"]["attention"] = {k: v.tolist() for k, v in self.attn_params.items()}
        return payload

    @classmethod
    def from_dict(cls, payload):
        model = cls(NeuralMILConfig.from_dict(payload["config"]))
        cfg = model.config
        params = payload["params"]
        dim = len(params["encoder"][0]["w"][0])
        model.encoder_spec = nn.MLPSpec((dim, *cfg.encoder_hidden), "relu", "identity")
        model.encoder_params = _params_from_json(params["encoder"])
        embed = cfg.encoder_hidden[-1]
        model.head_spec = nn.MLPSpec((embed, *cfg.head_hidden, 1), "relu", "identity")
        model.head_params = _params_from_json(params["head"])
        if "attention" in params:
            model.attn_params = {
                k: np.asarray(v, dtype=np.float64) for k, v in params["attention"].items()
            }
        transform = params.get("target_transform", {})
        model.target_center_ = float(transform.get("center", 0.0))
        model.target_scale_ = float(transform.get("scale", 1.0))
        return model


@dataclass
class WrapperConfig:
    task: str
    aggregation: str = "mean"
    hidden: tuple = (64,)
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        _check_task(self.task)
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"aggregation must be one of {AGGREGATIONS}")
        self.hidden = tuple(int(s) for s in self.hidden)
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")

    def to_dict(self):
        d = dict(self.__dict__)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)


def _train_mlp(spec, x, y, config, loss_fn, rng):
    """Minibatch Adam training of a plain MLP on a flat table."""
    params = nn.init_params_rng(spec, rng)
    arrays = nn.params_to_flat_list(params)
    state = nn.AdamState.for_arrays(arrays, config.learning_rate, config.weight_decay)
    n = x.shape[0]
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            out, cache = nn.forward(spec, params, x[idx])
            losses, d_out = loss_fn(out[:, 0], y[idx])
            loss = float(np.mean(losses))
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at step {state.t}")
            grads, _ = nn.backward(spec, params, cache, d_out[:, None] / len(idx))
            nn.adam_step(arrays, nn.params_to_flat_list(grads), state)
    return params


_AGG_FNS = {"mean": np.mean, "max": np.max, "min": np.min}


class _WrapperBase:
    def __init__(self, config):
        self.config = config
        self.spec = None
        self.params = None

    @property
    def _loss(self):
        return nn.loss_mse if self.config.task == REGRESSION else nn.loss_bce_with_logits

    def _check_predict(self, data):
        if self.params is None:
            raise DataError("model is not fitted")
        bags = _as_bag_list(data)
        if not bags:
            raise DataError("no bags to predict")
        dim = self.spec.layer_sizes[0]
        for b in bags:
            if b.shape[1] != dim:
                raise DataError(f"bag has dimension {b.shape[1]}, model expects {dim}")
        return bags

    def to_dict(self):
        return {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "params": {"base": _params_to_json(self.params)},
        }

    @classmethod
    def from_dict(cls, payload):
        model = cls(WrapperConfig.from_dict(payload["config"]))
        model.params = _params_from_json(payload["params"]["base"])
        dim = len(payload["params"]["base"][0]["w"][0])
        model.spec = nn.MLPSpec((dim, *model.config.hidden, 1), "relu", "identity")
        return model


class InstanceWrapper(_WrapperBase):
    """Base learner on instances inheriting bag labels; bag prediction
    aggregates instance predictions."""

    kind = "instance_wrapper"

    def fit(self, dataset):
        _check_fit_data(self.config, dataset)
        x, offsets = flatten_bags(dataset.bags)
        y = np.repeat(dataset.labels, np.diff(offsets))
        self.spec = nn.MLPSpec((dataset.dim, *self.config.hidden, 1), "relu", "identity")
        rng = np.random.default_rng(self.config.seed)
        self.params = _train_mlp(self.spec, x, y, self.config, self._loss, rng)
        return self

    def _instance_scores(self, bags):
        x, offsets = flatten_bags(bags)
        out, _ = nn.forward(self.spec, self.params, x)
        return out[:, 0], offsets

    def decision_values(self, data):
        bags = self._check_predict(data)
        scores, offsets = self._instance_scores(bags)
        values = nn.sigmoid(scores) if self.config.task == CLASSIFICATION else scores
        agg = _AGG_FNS[self.config.aggregation]
        return np.array([agg(values[offsets[b] : offsets[b + 1]]) for b in range(len(bags))])

    def predict_proba(self, data):
        if self.config.task != CLASSIFICATION:
            raise ConfigError("predict_proba is only defined for classification")
        return self.decision_values(data)

    def predict(self, data):
        values = self.decision_values(data)
        if self.config.task == CLASSIFICATION:
            return (values >= 0.5).astype(np.int64)
        return values

    def get_instance_weights(self, data):
        bags = self._check_predict(data)
        scores, offsets = self._instance_scores(bags)
        weights = seg_softmax(scores, offsets, 1.0)
        return [weights[offsets[b] : offsets[b + 1]] for b in range(len(bags))]


class BagWrapper(_WrapperBase):
    """Collapses each bag to one vector by elementwise aggregation before a
    plain MLP; attribution-free (uniform weights)."""

    kind = "bag_wrapper"

    def _collapse(self, bags):
        agg = _AGG_FNS[self.config.aggregation]
        return np.stack([agg(b, axis=0) for b in bags])

    def fit(self, dataset):
        _check_fit_data(self.config, dataset)
        x = self._collapse(dataset.bags)
        self.spec = nn.MLPSpec((dataset.dim, *self.config.hidden, 1), "relu", "identity")
        rng = np.random.default_rng(self.config.seed)
        self.params = _train_mlp(self.spec, x, dataset.labels, self.config, self._loss, rng)
        return self

    def decision_values(self, data):
        bags = self._check_predict(data)
        out, _ = nn.forward(self.spec, self.params, self._collapse(bags))
        values = out[:, 0]
        return nn.sigmoid(values) if self.config.task == CLASSIFICATION else values

    def predict_proba(self, data):
        if self.config.task != CLASSIFICATION:
            raise ConfigError("predict_proba is only defined for classification")
        return self.decision_values(data)

    def predict(self, data):
        values = self.decision_values(data)
        if self.config.task == CLASSIFICATION:
            return (values >= 0.5).astype(np.int64)
        return values

    def get_instance_weights(self, data):
        bags = self._check_predict(data)
        return [np.full(b.shape[0], 1.0 / b.shape[0]) for b in bags]


_MODEL_KINDS = {
    NeuralMIL.kind: NeuralMIL,
    InstanceWrapper.kind: InstanceWrapper,
    BagWrapper.kind: BagWrapper,
}


def model_to_json(model):
    """Canonical JSON text for a model; identical fits give identical text."""
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))


def model_from_dict(payload):
    kind = payload.get("kind")
    if kind not in _MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}")
    return _MODEL_KINDS[kind].from_dict(payload)


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model) + "\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def save_model_bundle(model, scaler, path):
    """Model envelope plus the scaler that prepared its inputs."""
    payload = {"model": model.to_dict(), "scaler": None if scaler is None else scaler.to_dict()}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def load_model_bundle(path):
    from .scaling import BagMinMaxScaler

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if "model" not in payload:
        raise ConfigError(f"{path} is not a model bundle")
    scaler = None if payload.get("scaler") is None else BagMinMaxScaler.from_dict(payload["scaler"])
    return model_from_dict(payload["model"]), scaler

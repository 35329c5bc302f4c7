"""End-to-end benchmark pipelines: generate, split 80/20, scale, train the
dynamic-pooling network, evaluate.

Each named benchmark carries tuned training defaults; any config field can
be overridden. The digit benchmarks use real IDX image files when paths are
supplied and otherwise fall back to the Gaussian-cluster surrogate pool.
"""

import json
import os
from dataclasses import replace

from .bags import split_train_test
from .datagen import (
    AdditiveSpec,
    ClfBagSpec,
    PPISpec,
    RegBagSpec,
    create_bags_clf,
    create_bags_reg,
    generate_additive_bags,
    generate_cluster_instances,
    generate_ppi_bags,
)
from .errors import ConfigError
from .estimators import NeuralMIL, NeuralMILConfig, save_model_bundle
from .idx import load_idx_images, load_idx_labels
from .jsonl import write_bags_jsonl
from .metrics import evaluate_model
from .scaling import BagMinMaxScaler

BENCHMARK_NAMES = ("mnist-clf", "mnist-reg", "additive", "ppi")

# surrogate instance pool used when no IDX files are given
CLUSTER_POOL_SIZE = 4000
CLUSTER_DIM = 64
CLUSTER_NOISE = 0.15


def benchmark_defaults(name):
    """Tuned training configuration for a named benchmark."""
    if name == "mnist-clf":
        return NeuralMILConfig(
            task="classification", pooling="dynamic", temperature=1.0,
            encoder_hidden=(256, 128), attention_hidden=64, head_hidden=(64,),
            epochs=60, batch_bags=32, learning_rate=1e-3, seed=0,
        )
    if name == "mnist-reg":
        return NeuralMILConfig(
            task="regression", pooling="dynamic", temperature=1.0,
            encoder_hidden=(256, 128), attention_hidden=64, head_hidden=(64,),
            epochs=400, batch_bags=32, learning_rate=1e-3, seed=0,
        )
    if name == "additive":
        # the warm start carries the representation learning; the short
        # end-to-end phase calibrates the bag head before the attention
        # ranking can drift
        return NeuralMILConfig(
            task="regression", pooling="dynamic", temperature=50.0,
            encoder_hidden=(64, 32), attention_hidden=32, head_hidden=(32,),
            epochs=10, batch_bags=32, learning_rate=1e-3, warm_start_epochs=50, seed=0,
        )
    if name == "ppi":
        return NeuralMILConfig(
            task="classification", pooling="dynamic", temperature=2.0,
            encoder_hidden=(64,), attention_hidden=32, head_hidden=(32,),
            epochs=40, batch_bags=32, learning_rate=1e-3, seed=0,
        )
    raise ConfigError(f"unknown benchmark {name!r}, expected one of {BENCHMARK_NAMES}")


def default_num_bags(name):
    return {"mnist-clf": 2000, "mnist-reg": 2000, "additive": 3000, "ppi": 2000}[name]


def _digit_pool(seed, idx_images=None, idx_labels=None):
    """Instance pool for the digit benchmarks: IDX files when given, cluster
    surrogate otherwise. Returns (instances, labels, used_surrogate)."""
    if idx_images is not None or idx_labels is not None:
        if idx_images is None or idx_labels is None:
            raise ConfigError("need both the image and the label IDX path")
        images = load_idx_images(idx_images)
        labels = load_idx_labels(idx_labels)
        if images.shape[0] != labels.shape[0]:
            raise ConfigError("IDX image and label counts differ")
        return images, labels, False
    instances, labels = generate_cluster_instances(
        CLUSTER_POOL_SIZE, CLUSTER_DIM, classes=10,
        center_scale=1.0, noise_sigma=CLUSTER_NOISE, seed=seed,
    )
    return instances, labels, True


def generate_benchmark_dataset(name, num_bags=None, seed=42, idx_images=None, idx_labels=None):
    """Build the dataset for a named benchmark; returns (dataset, used_surrogate)."""
    if num_bags is None:
        num_bags = default_num_bags(name)
    surrogate = False
    if name == "mnist-clf":
        instances, labels, surrogate = _digit_pool(seed, idx_images, idx_labels)
        ds = create_bags_clf(instances, labels, ClfBagSpec(key_class=3, bag_size=5, num_bags=num_bags, seed=seed))
    elif name == "mnist-reg":
        instances, labels, surrogate = _digit_pool(seed, idx_images, idx_labels)
        ds = create_bags_reg(instances, labels, RegBagSpec(bag_size=5, num_bags=num_bags, agg="mean", seed=seed))
    elif name == "additive":
        ds = generate_additive_bags(AdditiveSpec(num_bags=num_bags, bag_size_min=3, bag_size_max=8, dim=32, seed=seed))
    elif name == "ppi":
        ds = generate_ppi_bags(PPISpec(num_bags=num_bags, seq_len=50, window=10, stride=5, seed=seed))
    else:
        raise ConfigError(f"unknown benchmark {name!r}, expected one of {BENCHMARK_NAMES}")
    return ds, surrogate


def run_benchmark(name, num_bags=None, seed=42, idx_images=None, idx_labels=None,
                  out_dir=None, config_overrides=None, log=None):
    """Full pipeline for a named benchmark.

    Returns a dict with the trained model, scaler, test split and metrics
    report. With out_dir set, writes dataset.jsonl, model.json (model plus
    scaler) and report.json there.
    """
    dataset, surrogate = generate_benchmark_dataset(name, num_bags, seed, idx_images, idx_labels)
    if surrogate and name.startswith("mnist") and log is not None:
        log("no IDX files supplied; using the cluster surrogate instance pool")
    train, test = split_train_test(dataset, 0.2, seed=seed)
    scaler = BagMinMaxScaler().fit(train)
    train_scaled = scaler.transform(train)
    test_scaled = scaler.transform(test)
    config = benchmark_defaults(name)
    if config_overrides:
        config = replace(config, **config_overrides)
    model = NeuralMIL(config).fit(train_scaled)
    report = evaluate_model(model, test_scaled)
    result = {
        "name": name,
        "dataset": dataset,
        "model": model,
        "scaler": scaler,
        "report": report,
        "train": train,
        "test": test,
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_bags_jsonl(dataset, os.path.join(out_dir, "dataset.jsonl"))
        save_model_bundle(model, scaler, os.path.join(out_dir, "model.json"))
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return result

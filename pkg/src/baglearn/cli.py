"""Command-line front end.

Commands: generate, train, evaluate, hopt, consensus, benchmark.
Exit codes: 0 success, 1 usage error, 2 data/format/config error,
3 numeric failure during training.
"""

import argparse
import json
import sys
from dataclasses import fields

import numpy as np

from .bags import CLASSIFICATION, REGRESSION, split_train_test
from .consensus import GAConfig, build_model_pool, consensus_predict, default_model_pool, genetic_search
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
from .errors import BaglearnError, ConfigError, DataError, FormatError, NumericError
from .estimators import (
    BagWrapper,
    InstanceWrapper,
    NeuralMIL,
    NeuralMILConfig,
    WrapperConfig,
    load_model_bundle,
    save_model_bundle,
)
from .hyperopt import DEFAULT_PARAM_GRID, stepwise_search
from .idx import load_idx_images, load_idx_labels
from .jsonl import read_bags_jsonl, write_bags_jsonl
from .metrics import accuracy, evaluate_model, r2
from .pipelines import BENCHMARK_NAMES, run_benchmark


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this project reserves 2 for data errors."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _load_config_file(path, allowed):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: config file must hold a JSON object")
    unknown = set(payload) - set(allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    return payload


def _dataset_summary(ds):
    parts = [f"bags={len(ds)}", f"dim={ds.dim}"]
    if ds.task == CLASSIFICATION:
        positives = int(np.sum(ds.labels == 1))
        parts.append(f"positive={positives}")
        parts.append(f"negative={len(ds) - positives}")
    else:
        parts.append(f"label_mean={ds.labels.mean():.4f}")
        parts.append(f"label_std={ds.labels.std():.4f}")
    return " ".join(parts)


def write_model_bundle(model, scaler, path):
    save_model_bundle(model, scaler, path)


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a benchmark dataset as JSONL")
    p.add_argument("kind", choices=["mnist-clf", "mnist-reg", "cluster-clf", "cluster-reg", "additive", "ppi"])
    p.add_argument("--out", "-o", required=True, help="output JSONL path")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--num-bags", type=int, default=None)
    p.add_argument("--bag-size", type=int, default=5)
    p.add_argument("--images", help="IDX image file (mnist-* kinds)")
    p.add_argument("--labels", help="IDX label file (mnist-* kinds)")
    p.add_argument("--key-class", type=int, default=3, help="key digit/class for classification bags")
    p.add_argument("--keys-per-positive", type=int, default=1)
    p.add_argument("--agg", choices=["mean", "sum"], default="mean", help="regression label aggregation")
    p.add_argument("--num-instances", type=int, default=4000, help="cluster surrogate pool size")
    p.add_argument("--dim", type=int, default=None,
                   help="feature dimension (default 64 for cluster kinds, 32 for additive)")
    p.add_argument("--classes", type=int, default=10, help="cluster surrogate class count")
    p.add_argument("--center-scale", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.15)
    p.add_argument("--bag-size-min", type=int, default=3, help="additive bags")
    p.add_argument("--bag-size-max", type=int, default=8, help="additive bags")
    p.add_argument("--seq-len", type=int, default=50, help="ppi sequence length")
    p.add_argument("--window", type=int, default=10, help="ppi window length")
    p.add_argument("--stride", type=int, default=5, help="ppi window stride")
    p.add_argument("--motif1", default="KLMNPQR")
    p.add_argument("--motif2", default="STVWYAC")


def _cmd_generate(args):
    kind = args.kind
    if kind in ("mnist-clf", "mnist-reg"):
        if not args.images or not args.labels:
            raise ConfigError(f"{kind} needs --images and --labels IDX paths (use cluster-* for the surrogate)")
        instances = load_idx_images(args.images)
        labels = load_idx_labels(args.labels)
        if instances.shape[0] != labels.shape[0]:
            raise DataError("IDX image and label counts differ")
    elif kind in ("cluster-clf", "cluster-reg"):
        instances, labels = generate_cluster_instances(
            args.num_instances, args.dim or 64, classes=args.classes,
            center_scale=args.center_scale, noise_sigma=args.noise, seed=args.seed,
        )
    num_bags = args.num_bags
    if kind in ("mnist-clf", "cluster-clf"):
        num_bags = 2000 if num_bags is None else num_bags
        ds = create_bags_clf(instances, labels, ClfBagSpec(
            key_class=args.key_class, bag_size=args.bag_size, num_bags=num_bags,
            keys_per_positive=args.keys_per_positive, seed=args.seed))
    elif kind in ("mnist-reg", "cluster-reg"):
        num_bags = 2000 if num_bags is None else num_bags
        ds = create_bags_reg(instances, labels, RegBagSpec(
            bag_size=args.bag_size, num_bags=num_bags, agg=args.agg, seed=args.seed))
    elif kind == "additive":
        num_bags = 3000 if num_bags is None else num_bags
        ds = generate_additive_bags(AdditiveSpec(
            num_bags=num_bags, bag_size_min=args.bag_size_min,
            bag_size_max=args.bag_size_max, dim=args.dim or 32, seed=args.seed))
    else:
        num_bags = 2000 if num_bags is None else num_bags
        ds = generate_ppi_bags(PPISpec(
            num_bags=num_bags, seq_len=args.seq_len, window=args.window, stride=args.stride,
            motif1=args.motif1, motif2=args.motif2, seed=args.seed))
    write_bags_jsonl(ds, args.out)
    print(f"wrote {args.out}: {_dataset_summary(ds)}")
    return 0


_NEURAL_FLAGS = (
    "pooling", "temperature", "encoder_hidden", "attention_hidden", "head_hidden",
    "epochs", "batch_bags", "learning_rate", "weight_decay", "warm_start_epochs", "seed",
)
_WRAPPER_FLAGS = (
    "aggregation", "hidden", "epochs", "batch_size", "learning_rate", "weight_decay", "seed",
)


def _add_model_flags(p):
    p.add_argument("--config", help="JSON file with model config fields (flags override it)")
    p.add_argument("--pooling", choices=["mean", "max", "attention", "dynamic", "gated"])
    p.add_argument("--temperature", type=float)
    p.add_argument("--encoder-hidden", type=_int_list, dest="encoder_hidden")
    p.add_argument("--attention-hidden", type=int, dest="attention_hidden")
    p.add_argument("--head-hidden", type=_int_list, dest="head_hidden")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-bags", type=int, dest="batch_bags")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--weight-decay", type=float, dest="weight_decay")
    p.add_argument("--warm-start-epochs", type=int, dest="warm_start_epochs")
    p.add_argument("--aggregation", choices=["mean", "max", "min"], help="wrapper models")
    p.add_argument("--hidden", type=_int_list, help="wrapper base-learner hidden sizes")
    p.add_argument("--batch-size", type=int, dest="batch_size", help="wrapper models")
    p.add_argument("--seed", type=int)


def _build_model_config(args, task, model_kind):
    if model_kind == "neural":
        config_cls, flag_names = NeuralMILConfig, _NEURAL_FLAGS
    else:
        config_cls, flag_names = WrapperConfig, _WRAPPER_FLAGS
    allowed = {f.name for f in fields(config_cls)} - {"task"}
    values = {}
    if args.config:
        values.update(_load_config_file(args.config, allowed))
    for name in flag_names:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    try:
        return config_cls(task=task, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _add_train(sub):
    p = sub.add_parser("train", help="fit a scaler and an estimator on a JSONL dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default="neural", choices=["neural", "instance-wrapper", "bag-wrapper"])
    p.add_argument("--task", choices=[REGRESSION, CLASSIFICATION], help="default: inferred from labels")
    p.add_argument("--out", "-o", required=True, help="output model JSON (includes the scaler)")
    _add_model_flags(p)


def _cmd_train(args):
    from .scaling import BagMinMaxScaler

    ds = read_bags_jsonl(args.data, task=args.task)
    config = _build_model_config(args, ds.task, args.model)
    scaler = BagMinMaxScaler().fit(ds)
    scaled = scaler.transform(ds)
    if args.model == "neural":
        model = NeuralMIL(config)
    elif args.model == "instance-wrapper":
        model = InstanceWrapper(config)
    else:
        model = BagWrapper(config)
    model.fit(scaled)
    save_model_bundle(model, scaler, args.out)
    line = f"trained {args.model} on {len(ds)} bags -> {args.out}"
    log = getattr(model, "training_log_", None)
    if log:
        line += f" (epoch loss {log[0]:.6f} -> {log[-1]:.6f})"
    print(line)
    return 0


def _add_evaluate(sub):
    p = sub.add_parser("evaluate", help="score a trained model on a JSONL dataset")
    p.add_argument("--model", required=True, help="model JSON written by train/benchmark")
    p.add_argument("--data", required=True)
    p.add_argument("--out", "-o", help="write the metrics report JSON here")


def _cmd_evaluate(args):
    model, scaler = load_model_bundle(args.model)
    ds = read_bags_jsonl(args.data, task=model.config.task)
    if scaler is not None:
        ds = scaler.transform(ds)
    report = evaluate_model(model, ds)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _add_hopt(sub):
    p = sub.add_parser("hopt", help="stepwise hyperparameter search for the neural estimator")
    p.add_argument("--data", required=True)
    p.add_argument("--task", choices=[REGRESSION, CLASSIFICATION])
    p.add_argument("--out", "-o", required=True, help="output JSON with the search trace")
    p.add_argument("--grid", help="JSON file: ordered {param: [candidates...]} object")
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--metric", choices=["accuracy", "r2"])
    p.add_argument("--hopt-seed", type=int, default=0, help="seed for the split and derived training seeds")
    _add_model_flags(p)


def _cmd_hopt(args):
    ds = read_bags_jsonl(args.data, task=args.task)
    config = _build_model_config(args, ds.task, "neural")
    if args.grid:
        with open(args.grid, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.grid}: grid must be a JSON object of param -> candidates")
        grid = [(name, [tuple(c) if isinstance(c, list) else c for c in cands]) for name, cands in raw.items()]
    else:
        grid = DEFAULT_PARAM_GRID
    result = stepwise_search(config, grid, ds, val_fraction=args.val_fraction,
                             metric=args.metric, seed=args.hopt_seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"baseline={result.baseline_score:.6f} best={result.best_score:.6f} "
          f"trainings={result.n_trainings} -> {args.out}")
    return 0


def _add_consensus(sub):
    p = sub.add_parser("consensus", help="genetic search over a pool of estimators")
    p.add_argument("--data", required=True)
    p.add_argument("--task", choices=[REGRESSION, CLASSIFICATION])
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generations", type=int, default=100)
    p.add_argument("--population", type=int, default=50)


def _cmd_consensus(args):
    ds = read_bags_jsonl(args.data, task=args.task)
    rest, test = split_train_test(ds, args.test_fraction, seed=args.seed)
    train, val = split_train_test(rest, args.val_fraction, seed=args.seed + 1)
    from .scaling import BagMinMaxScaler

    scaler = BagMinMaxScaler().fit(train)
    train_s, val_s, test_s = scaler.transform(train), scaler.transform(val), scaler.transform(test)
    pool = default_model_pool(ds.task, seed=args.seed)
    models, p_val, p_test = build_model_pool(train_s, val_s, test_s, pool)
    metric = "accuracy" if ds.task == CLASSIFICATION else "r2"
    ga = GAConfig(population=args.population, generations=args.generations, seed=args.seed)
    mask, val_score = genetic_search(p_val, val.labels, metric, ga)
    test_preds = consensus_predict(p_test, mask)
    if metric == "accuracy":
        test_score = accuracy(test.labels.astype(np.int64), (test_preds >= 0.5).astype(np.int64))
    else:
        test_score = r2(test.labels, test_preds)
    payload = {
        "mask": [int(b) for b in mask],
        "val_score": val_score,
        "test_score": test_score,
        "model_ids": p_val.column_ids,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    selected = [mid for mid, bit in zip(p_val.column_ids, mask) if bit]
    print(f"selected {selected} val_score={val_score:.6f} test_score={test_score:.6f} -> {args.out}")
    return 0


def _add_benchmark(sub):
    p = sub.add_parser("benchmark", help="run a full named benchmark end to end")
    p.add_argument("name", choices=list(BENCHMARK_NAMES))
    p.add_argument("--out-dir", required=True)
    p.add_argument("--num-bags", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--images", help="IDX image file for mnist-* benchmarks")
    p.add_argument("--labels", help="IDX label file for mnist-* benchmarks")
    p.add_argument("--config", help="JSON file overriding training config fields")


def _cmd_benchmark(args):
    overrides = None
    if args.config:
        allowed = {f.name for f in fields(NeuralMILConfig)} - {"task"}
        overrides = _load_config_file(args.config, allowed)
        if "encoder_hidden" in overrides:
            overrides["encoder_hidden"] = tuple(overrides["encoder_hidden"])
        if "head_hidden" in overrides:
            overrides["head_hidden"] = tuple(overrides["head_hidden"])
    result = run_benchmark(
        args.name, num_bags=args.num_bags, seed=args.seed,
        idx_images=args.images, idx_labels=args.labels,
        out_dir=args.out_dir, config_overrides=overrides,
        log=lambda msg: print(f"warning: {msg}", file=sys.stderr),
    )
    report = result["report"]
    metrics = " ".join(
        f"{key}={value:.4f}"
        for key, value in report.to_dict().items()
        if isinstance(value, float)
    )
    print(f"{args.name} bags={len(result['dataset'])} {metrics} -> {args.out_dir}")
    return 0


def build_parser():
    parser = _Parser(prog="baglearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_generate(sub)
    _add_train(sub)
    _add_evaluate(sub)
    _add_hopt(sub)
    _add_consensus(sub)
    _add_benchmark(sub)
    return parser


_HANDLERS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "hopt": _cmd_hopt,
    "consensus": _cmd_consensus,
    "benchmark": _cmd_benchmark,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return _HANDLERS[args.command](args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (DataError, FormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BaglearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

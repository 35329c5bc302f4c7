"""Stepwise (coordinate-wise) hyperparameter search.

Parameters are tuned one at a time in grid order: every candidate for the
current parameter is trained with all other parameters held at the incumbent
configuration and scored on a held-out validation split; the best candidate
is adopted when it beats the incumbent's score. Cost is therefore linear in
the total number of candidates instead of the size of the full product grid.

Every training gets its own derived seed so the search is reproducible and
candidate evaluations are order-independent.
"""

from dataclasses import dataclass, fields, replace

import numpy as np

from .bags import CLASSIFICATION, split_train_test
from .errors import ConfigError, DataError, NumericError
from .estimators import NeuralMIL
from .metrics import accuracy, r2

DEFAULT_PARAM_GRID = [
    ("encoder_hidden", [(128,), (256, 128)]),
    ("learning_rate", [1e-2, 1e-3, 1e-4]),
    ("weight_decay", [0.0, 1e-4]),
    ("epochs", [100, 200]),
    ("temperature", [0.5, 1.0, 2.0]),
]


@dataclass
class HoptResult:
    best_config: object
    best_score: float
    baseline_score: float
    trace: list
    n_trainings: int

    def to_dict(self):
        return {
            "best_config": self.best_config.to_dict(),
            "best_score": self.best_score,
            "baseline_score": self.baseline_score,
            "trace": [
                {"param": name, "candidate": _jsonable(value), "score": score}
                for name, value, score in self.trace
            ],
            "n_trainings": self.n_trainings,
        }


def _jsonable(value):
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    return value


def derive_seed(seed, param_index, candidate_index):
    """Stable per-training seed; the baseline uses (-1, 0)."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, param_index + 1, candidate_index])
    return int(ss.generate_state(1)[0])


def _default_fit(config, dataset):
    return NeuralMIL(config).fit(dataset)


def _score_fn(metric):
    if metric == "accuracy":
        return lambda ds, model: accuracy(ds.labels.astype(np.int64), model.predict(ds))
    if metric == "r2":
        return lambda ds, model: r2(ds.labels, model.predict(ds))
    raise ConfigError(f"metric must be 'accuracy' or 'r2', got {metric!r}")


def _check_grid(grid, config):
    if hasattr(grid, "items"):
        grid = list(grid.items())
    grid = [(name, list(candidates)) for name, candidates in grid]
    names = [name for name, _ in grid]
    if len(set(names)) != len(names):
        raise ConfigError("grid parameter names must be unique")
    valid = {f.name for f in fields(config)}
    for name, candidates in grid:
        if name not in valid:
            raise ConfigError(f"unknown config parameter {name!r}")
        if not candidates:
            raise ConfigError(f"parameter {name!r} has no candidates")
    return grid


def _evaluate(fit_fn, config, seed_value, fit_ds, val_ds, scorer):
    model = fit_fn(replace(config, seed=seed_value), fit_ds)
    return scorer(val_ds, model)


def stepwise_search(config, grid, dataset, val_fraction=0.2, metric=None, seed=0,
                    fit_fn=None, n_folds=None):
    """Coordinate-wise search over ``grid`` starting from ``config``.

    Returns a HoptResult whose trace starts with the baseline evaluation and
    holds one entry per candidate; n_trainings = 1 + sum of candidate counts.
    The incumbent only changes when a candidate strictly beats its score, so
    the incumbent's validation score never decreases and the final score is
    the maximum over everything evaluated.

    ``n_folds`` switches the single validation split to deterministic k-fold
    cross-validation (score = mean over folds; k trainings per evaluation).
    """
    if metric is None:
        metric = "accuracy" if dataset.task == CLASSIFICATION else "r2"
    if fit_fn is None:
        fit_fn = _default_fit
    grid = _check_grid(grid, config)
    scorer = _score_fn(metric)

    if n_folds is None:
        fit_ds, val_ds = split_train_test(dataset, val_fraction, seed)
        splits = [(fit_ds, val_ds)]
    else:
        if n_folds < 2 or n_folds > len(dataset):
            raise DataError(f"n_folds must be in [2, n_bags], got {n_folds}")
        perm = np.random.default_rng(seed).permutation(len(dataset))
        folds = [perm[i::n_folds] for i in range(n_folds)]
        splits = [
            (dataset.subset(np.concatenate(folds[:i] + folds[i + 1 :])), dataset.subset(folds[i]))
            for i in range(n_folds)
        ]

    def evaluate(cand_config, seed_value):
        # a candidate whose training diverges scores -inf instead of aborting the search
        try:
            scores = [
                _evaluate(fit_fn, cand_config, seed_value, fit_ds, val_ds, scorer)
                for fit_ds, val_ds in splits
            ]
        except NumericError:
            return float("-inf")
        return float(np.mean(scores))

    baseline_seed = derive_seed(seed, -1, 0)
    baseline = evaluate(config, baseline_seed)
    trace = [("baseline", None, baseline)]
    incumbent, incumbent_score = replace(config, seed=baseline_seed), baseline
    for p_idx, (name, candidates) in enumerate(grid):
        best_value, best_seed, best_score = None, None, -np.inf
        for c_idx, value in enumerate(candidates):
            train_seed = derive_seed(seed, p_idx, c_idx)
            score = evaluate(replace(incumbent, **{name: value}), train_seed)
            trace.append((name, value, score))
            if score > best_score:
                best_value, best_seed, best_score = value, train_seed, score
        if best_score > incumbent_score:
            incumbent = replace(incumbent, **{name: best_value, "seed": best_seed})
            incumbent_score = best_score
    return HoptResult(
        best_config=incumbent,
        best_score=incumbent_score,
        baseline_score=baseline,
        trace=trace,
        n_trainings=len(trace) * len(splits),
    )

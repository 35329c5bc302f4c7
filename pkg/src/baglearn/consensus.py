"""Genetic search for the best subset of trained models to average.

A candidate solution is a boolean mask over the model pool; its consensus
prediction is the unweighted row mean of the selected prediction columns
and its fitness is a validation metric of that consensus. The population is
seeded with every singleton mask plus the all-ones mask, so the returned
mask can never score below the best single model on validation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .metrics import accuracy, r2


@dataclass
class PredictionMatrix:
    """n_samples x n_models prediction columns with model identifiers."""

    values: np.ndarray
    column_ids: list

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] < 1:
            raise DataError("prediction matrix must be 2-D with at least one column")
        if not np.all(np.isfinite(self.values)):
            raise DataError("prediction matrix contains non-finite values")
        self.column_ids = [str(c) for c in self.column_ids]
        if len(self.column_ids) != self.values.shape[1]:
            raise DataError("need one column id per model column")

    @property
    def n_models(self):
        return self.values.shape[1]


@dataclass
class GAConfig:
    population: int = 50
    generations: int = 100
    tournament_size: int = 3
    crossover_prob: float = 0.5
    mutation_prob: float | None = None  # default 1 / n_models
    elitism: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError("population must be >= 2")
        if not 0 <= self.elitism < self.population:
            raise ConfigError("elitism must be in [0, population)")
        if self.tournament_size < 1:
            raise ConfigError("tournament_size must be >= 1")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ConfigError("crossover_prob must be in [0, 1]")


def consensus_predict(matrix, mask):
    """Row-wise mean over the selected model columns."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (matrix.n_models,):
        raise ConfigError(f"mask length {mask.shape} does not match {matrix.n_models} models")
    if not mask.any():
        raise ConfigError("consensus mask selects no models")
    return matrix.values[:, mask].mean(axis=1)


def _fitness_fn(metric):
    if metric == "accuracy":
        return lambda y, preds: accuracy(y, (preds >= 0.5).astype(np.int64))
    if metric == "r2":
        return lambda y, preds: r2(y, preds)
    raise ConfigError(f"metric must be 'accuracy' or 'r2', got {metric!r}")


def genetic_search(matrix, y, metric, config=None):
    """Evolve a model-selection mask maximizing the validation metric.

    Returns (mask, score) for the best mask ever evaluated. Deterministic
    under config.seed.
    """
    if config is None:
        config = GAConfig()
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (matrix.values.shape[0],):
        raise DataError("y must align with the prediction matrix rows")
    m = matrix.n_models
    if metric == "accuracy":
        y = y.astype(np.int64)
    fitness_metric = _fitness_fn(metric)
    mutation_prob = config.mutation_prob if config.mutation_prob is not None else 1.0 / m
    rng = np.random.default_rng(config.seed)

    cache = {}

    def fitness(mask):
        key = mask.tobytes()
        if key not in cache:
            cache[key] = fitness_metric(y, consensus_predict(matrix, mask))
        return cache[key]

    singles = [np.eye(m, dtype=bool)[i] for i in range(m)]
    if m > config.population - 1:
        scores = np.array([fitness(s) for s in singles])
        order = np.argsort(-scores, kind="stable")[: config.population - 1]
        population = [singles[i] for i in order]
    else:
        population = list(singles)
    population.append(np.ones(m, dtype=bool))
    while len(population) < config.population:
        mask = rng.random(m) < 0.5
        if not mask.any():
            mask[rng.integers(m)] = True
        population.append(mask)
    population = population[: config.population]

    best_mask, best_score = None, -np.inf

    def observe(pop):
        nonlocal best_mask, best_score
        scores = np.array([fitness(ind) for ind in pop])
        for ind, score in zip(pop, scores):
            if score > best_score:
                best_mask, best_score = ind.copy(), float(score)
        return scores

    def tournament(scores):
        picks = rng.integers(len(scores), size=config.tournament_size)
        return picks[np.argmax(scores[picks])]

    scores = observe(population)
    for _ in range(config.generations):
        elite_order = np.argsort(-scores, kind="stable")[: config.elitism]
        next_pop = [population[i].copy() for i in elite_order]
        while len(next_pop) < config.population:
            p1 = population[tournament(scores)]
            p2 = population[tournament(scores)]
            child = np.where(rng.random(m) < config.crossover_prob, p2, p1)
            flip = rng.random(m) < mutation_prob
            child = child ^ flip
            if not child.any():
                child[rng.integers(m)] = True
            next_pop.append(child)
        population = next_pop
        scores = observe(population)
    return best_mask, best_score


def build_model_pool(train_ds, val_ds, test_ds, pool):
    """Fit every (model_id, estimator) pair on the training split and collect
    validation/test prediction columns.

    Returns (fitted models dict, PredictionMatrix on val, PredictionMatrix on
    test). Fit errors are re-raised with the failing model named.
    """
    ids, models = [], {}
    val_cols, test_cols = [], []
    for model_id, model in pool:
        try:
            model.fit(train_ds)
            val_cols.append(model.decision_values(val_ds))
            test_cols.append(model.decision_values(test_ds))
        except Exception as exc:
            raise type(exc)(f"model {model_id!r}: {exc}") from exc
        ids.append(str(model_id))
        models[str(model_id)] = model
    return (
        models,
        PredictionMatrix(np.column_stack(val_cols), ids),
        PredictionMatrix(np.column_stack(test_cols), ids),
    )


def default_model_pool(task, seed=0):
    """A mixed pool of eight estimator configurations: the five neural pooling
    variants plus instance- and bag-level wrappers."""
    from .estimators import BagWrapper, InstanceWrapper, NeuralMIL, NeuralMILConfig, WrapperConfig

    def neural(pooling, offset, **kw):
        return NeuralMIL(
            NeuralMILConfig(
                task=task,
                pooling=pooling,
                encoder_hidden=(64, 32),
                attention_hidden=32,
                head_hidden=(32,),
                epochs=40,
                learning_rate=1e-3,
                seed=seed + offset,
                **kw,
            )
        )

    pool = [
        ("neural_mean", neural("mean", 1)),
        ("neural_max", neural("max", 2)),
        ("neural_attention", neural("attention", 3)),
        ("neural_dynamic", neural("dynamic", 4, temperature=1.0)),
        ("neural_gated", neural("gated", 5)),
        ("instance_mean", InstanceWrapper(WrapperConfig(task=task, aggregation="mean", hidden=(64,), epochs=40, seed=seed + 6))),
        ("instance_max", InstanceWrapper(WrapperConfig(task=task, aggregation="max", hidden=(64,), epochs=40, seed=seed + 7))),
        ("bag_mean", BagWrapper(WrapperConfig(task=task, aggregation="mean", hidden=(64,), epochs=40, seed=seed + 8))),
    ]
    return pool

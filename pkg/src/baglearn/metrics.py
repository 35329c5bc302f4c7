"""Bag-level performance metrics and key-instance-detection (KID) metrics.

Bag level: classification accuracy and the coefficient of determination R².

KID, classification: over positive bags only, a hit means the instance with
the largest predicted weight (ties resolved to the lowest index) is a true
key instance; the score is hits / positive bags.

KID, regression: per bag, the rank correlation (Spearman with average ranks
for ties) between true instance contributions and predicted weights,
averaged over bags; bags where either vector is constant carry no rank
information and are skipped.
"""

from dataclasses import dataclass

import numpy as np

from .bags import CLASSIFICATION
from .errors import DataError


def accuracy(y_true, y_pred):
    """Fraction of exact matches between two {0,1} sequences."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise DataError(f"accuracy needs equal-length non-empty sequences, got {y_true.shape} and {y_pred.shape}")
    return float(np.mean(y_true == y_pred))


def r2(y_true, y_pred):
    """Coefficient of determination: 1 - SS_res / SS_tot."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size < 2:
        raise DataError("r2 needs two equal-length sequences of at least 2 values")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise DataError("r2 is undefined when y_true has zero variance")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def average_ranks(values):
    """Ranks starting at 1; tied values get the mean of their rank positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a, b):
    """Spearman rank correlation: Pearson correlation of average-rank transforms."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise DataError("spearman needs two equal-length sequences of at least 2 values")
    ra, rb = average_ranks(a), average_ranks(b)
    da = ra - ra.mean()
    db = rb - rb.mean()
    na = float(np.sqrt(np.sum(da * da)))
    nb = float(np.sqrt(np.sum(db * db)))
    if na == 0.0 or nb == 0.0:
        raise DataError("spearman is undefined for constant input")
    return float(np.dot(da, db) / (na * nb))


def kid_accuracy(weights, key_masks, labels):
    """Top-1 key-instance hit rate over positive bags."""
    labels = np.asarray(labels)
    if not (len(weights) == len(key_masks) == len(labels)):
        raise DataError("weights, key_masks and labels must align")
    hits = 0
    positives = 0
    for w, mask, label in zip(weights, key_masks, labels):
        if label != 1:
            continue
        w = np.asarray(w, dtype=np.float64)
        mask = np.asarray(mask, dtype=bool)
        if w.shape != mask.shape:
            raise DataError("weight vector and key mask differ in length")
        positives += 1
        if mask[int(np.argmax(w))]:
            hits += 1
    if positives == 0:
        raise DataError("kid_accuracy needs at least one positive bag")
    return hits / positives


def kid_rank_correlation(weights, contributions, return_skipped=False):
    """Mean per-bag Spearman correlation between contributions and weights.

    Bags where either vector is constant are skipped; raises DataError if
    every bag is skipped. With return_skipped=True returns (mean, n_skipped).
    """
    if len(weights) != len(contributions):
        raise DataError("weights and contributions must align")
    rhos = []
    skipped = 0
    for w, c in zip(weights, contributions):
        w = np.asarray(w, dtype=np.float64)
        c = np.asarray(c, dtype=np.float64)
        if w.shape != c.shape:
            raise DataError("weight vector and contributions differ in length")
        if w.size < 2 or np.all(w == w[0]) or np.all(c == c[0]):
            skipped += 1
            continue
        rhos.append(spearman(c, w))
    if not rhos:
        raise DataError("kid_rank_correlation: every bag was constant")
    mean = float(np.mean(rhos))
    return (mean, skipped) if return_skipped else mean


@dataclass
class MetricsReport:
    task: str
    n_test_bags: int
    accuracy: float | None = None
    r2: float | None = None
    kid_accuracy: float | None = None
    kid_rank_corr: float | None = None
    n_positive_bags: int | None = None
    n_kid_skipped: int | None = None

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None or k in ("task", "n_test_bags")}


def evaluate_model(model, dataset):
    """Score a fitted estimator on a dataset, including KID metrics when the
    dataset carries instance-level ground truth."""
    preds = model.predict(dataset)
    report = MetricsReport(task=dataset.task, n_test_bags=len(dataset))
    if dataset.task == CLASSIFICATION:
        report.accuracy = accuracy(dataset.labels.astype(np.int64), preds)
        report.n_positive_bags = int(np.sum(dataset.labels == 1))
        if dataset.key_masks is not None and report.n_positive_bags > 0:
            weights = model.get_instance_weights(dataset)
            report.kid_accuracy = kid_accuracy(weights, dataset.key_masks, dataset.labels)
    else:
        report.r2 = r2(dataset.labels, preds)
        if dataset.contributions is not None:
            weights = model.get_instance_weights(dataset)
            rho, skipped = kid_rank_correlation(weights, dataset.contributions, return_skipped=True)
            report.kid_rank_corr = rho
            report.n_kid_skipped = skipped
    return report

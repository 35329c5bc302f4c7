"""Bag-of-instances data model.

An instance is a fixed-length feature vector (one row of a float64 array);
a bag is a 2-D array of shape (n_instances, dim) with n_instances >= 1.
A BagDataset couples a sequence of bags with one label per bag and optional
per-instance ground truth: boolean key masks (which instances caused a
positive label) and real contributions (how much each instance adds to a
regression label).

Datasets are immutable after construction: arrays are marked read-only and
every operation that changes content returns a new dataset.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

REGRESSION = "regression"
CLASSIFICATION = "classification"
TASKS = (REGRESSION, CLASSIFICATION)


def as_bag(instances):
    """Coerce one bag to a read-only float64 array of shape (n, d)."""
    arr = np.asarray(instances, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"a bag must be 2-D (n_instances, dim), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError(f"a bag needs at least one instance and one feature, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError("bag contains non-finite values")
    arr = arr.copy() if arr.flags.writeable else arr
    arr.flags.writeable = False
    return arr


@dataclass
class BagDataset:
    """Bags with bag-level labels and optional instance-level ground truth.

    Attributes
    ----------
    bags : tuple of (n_i, d) float64 arrays, read-only
    labels : (n_bags,) float64 array; classification labels restricted to {0, 1}
    key_masks : tuple of (n_i,) bool arrays, or None
    contributions : tuple of (n_i,) float64 arrays, or None
    task : "regression" or "classification"
    metadata : free-form dict, not part of the serialized format
    """

    bags: tuple
    labels: np.ndarray
    task: str
    key_masks: tuple | None = None
    contributions: tuple | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        self.bags = tuple(as_bag(b) for b in self.bags)
        if self.bags:
            dim = self.bags[0].shape[1]
            for i, b in enumerate(self.bags):
                if b.shape[1] != dim:
                    raise DataError(f"bag {i} has dimension {b.shape[1]}, expected {dim}")
        labels = np.asarray(self.labels, dtype=np.float64)
        if labels.shape != (len(self.bags),):
            raise DataError(f"need one label per bag: {labels.shape} vs {len(self.bags)} bags")
        if not np.all(np.isfinite(labels)):
            raise DataError("labels contain non-finite values")
        if self.task == CLASSIFICATION and not np.all(np.isin(labels, (0.0, 1.0))):
            raise DataError("classification labels must be 0 or 1")
        labels = labels.copy() if labels.flags.writeable else labels
        labels.flags.writeable = False
        self.labels = labels
        self.key_masks = self._check_aligned(self.key_masks, np.bool_, "key_masks")
        self.contributions = self._check_aligned(self.contributions, np.float64, "contributions")

    def _check_aligned(self, seqs, dtype, name):
        if seqs is None:
            return None
        if len(seqs) != len(self.bags):
            raise DataError(f"{name} has {len(seqs)} entries for {len(self.bags)} bags")
        out = []
        for i, (seq, bag) in enumerate(zip(seqs, self.bags)):
            arr = np.asarray(seq, dtype=dtype)
            if arr.shape != (bag.shape[0],):
                raise DataError(f"{name}[{i}] has shape {arr.shape}, bag has {bag.shape[0]} instances")
            arr = arr.copy() if arr.flags.writeable else arr
            arr.flags.writeable = False
            out.append(arr)
        return tuple(out)

    def __len__(self):
        return len(self.bags)

    @property
    def n_bags(self):
        return len(self.bags)

    @property
    def dim(self):
        return self.bags[0].shape[1] if self.bags else None

    @property
    def bag_sizes(self):
        return np.array([b.shape[0] for b in self.bags])

    def subset(self, indices):
        """New dataset holding the bags at ``indices`` (order preserved)."""
        indices = np.asarray(indices, dtype=np.int64)
        return BagDataset(
            bags=tuple(self.bags[i] for i in indices),
            labels=self.labels[indices],
            task=self.task,
            key_masks=None if self.key_masks is None else tuple(self.key_masks[i] for i in indices),
            contributions=None if self.contributions is None else tuple(self.contributions[i] for i in indices),
            metadata=dict(self.metadata),
        )


def split_train_test(dataset, test_fraction, seed):
    """Deterministic shuffled split into (train, test).

    The test set takes round(test_fraction * n) bags (clamped so neither
    side is empty); masks and contributions follow their bags.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(dataset)
    if n < 2:
        raise DataError("need at least 2 bags to split")
    n_test = int(round(test_fraction * n))
    n_test = min(max(n_test, 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.subset(perm[n_test:]), dataset.subset(perm[:n_test])


def flatten_bags(bags):
    """Stack bags into (X, offsets): X is the concatenated instance matrix,
    offsets[b]:offsets[b+1] addresses bag b's rows."""
    sizes = np.array([b.shape[0] for b in bags], dtype=np.int64)
    offsets = np.zeros(len(bags) + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    x = np.concatenate(bags, axis=0) if len(bags) > 1 else np.asarray(bags[0], dtype=np.float64)
    return np.ascontiguousarray(x, dtype=np.float64), offsets

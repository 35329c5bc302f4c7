"""Deterministic generators for the synthetic MIL benchmarks.

Four families:

- digit-style classification bags: a bag is positive iff it contains a
  designated key class; key masks mark the planted key instances.
- digit-style regression bags: the label is the mean (or sum) of the member
  targets; contributions are the member targets.
- additive bags: instance contributions are a hidden linear functional of
  the features and the label is their exact sum.
- motif-pair interaction bags: two random letter sequences, positive pairs
  carry one planted motif each; instances are one-hot encoded window pairs
  and the key instances are the window pairs containing both motifs.

Instance pools for the digit-style builders can come from real IDX image
files or from `generate_cluster_instances`, a Gaussian-cluster surrogate.
All generators are bit-deterministic under (spec, seed).
"""

from dataclasses import dataclass

import numpy as np

from .bags import BagDataset, CLASSIFICATION, REGRESSION
from .errors import ConfigError, DataError

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"


@dataclass
class ClfBagSpec:
    key_class: int = 3
    bag_size: int = 5
    num_bags: int = 1000
    keys_per_positive: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.bag_size < 1:
            raise ConfigError("bag_size must be >= 1")
        if self.num_bags < 2 or self.num_bags % 2 != 0:
            raise ConfigError("num_bags must be a positive even number (balanced classes)")
        if not 1 <= self.keys_per_positive <= self.bag_size:
            raise ConfigError("keys_per_positive must be in [1, bag_size]")


@dataclass
class RegBagSpec:
    bag_size: int = 5
    num_bags: int = 1000
    agg: str = "mean"
    seed: int = 0

    def __post_init__(self):
        if self.bag_size < 1:
            raise ConfigError("bag_size must be >= 1")
        if self.num_bags < 1:
            raise ConfigError("num_bags must be >= 1")
        if self.agg not in ("mean", "sum"):
            raise ConfigError("agg must be 'mean' or 'sum'")


@dataclass
class AdditiveSpec:
    num_bags: int = 1000
    bag_size_min: int = 3
    bag_size_max: int = 8
    dim: int = 32
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.bag_size_min <= self.bag_size_max:
            raise ConfigError("need 1 <= bag_size_min <= bag_size_max")
        if self.num_bags < 1 or self.dim < 1:
            raise ConfigError("num_bags and dim must be >= 1")


@dataclass
class PPISpec:
    num_bags: int = 1000
    seq_len: int = 50
    window: int = 10
    stride: int = 5
    motif1: str = "KLMNPQR"
    motif2: str = "STVWYAC"
    alphabet: str = AMINO_ACIDS
    seed: int = 0

    def __post_init__(self):
        if self.num_bags < 2 or self.num_bags % 2 != 0:
            raise ConfigError("num_bags must be a positive even number (balanced classes)")
        if self.window > self.seq_len:
            raise ConfigError("window must not exceed seq_len")
        if not 1 <= self.stride <= self.window:
            raise ConfigError("stride must be in [1, window]")
        for motif in (self.motif1, self.motif2):
            if len(motif) > self.window:
                raise ConfigError(f"motif {motif!r} is longer than the window")
            if any(ch not in self.alphabet for ch in motif):
                raise ConfigError(f"motif {motif!r} uses letters outside the alphabet")


def generate_cluster_instances(n, dim, classes=10, center_scale=1.0, noise_sigma=0.1, seed=0):
    """Gaussian-cluster instance pool: class centers uniform in
    [0, center_scale]^dim, samples = center + N(0, noise_sigma^2).

    Returns (instances (n, dim), labels (n,)) with labels 0..classes-1 in
    near-equal counts.
    """
    if n < classes:
        raise ConfigError("need at least one sample per class")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, center_scale, size=(classes, dim))
    labels = np.arange(n, dtype=np.int64) % classes
    noise = rng.normal(0.0, noise_sigma, size=(n, dim)) if noise_sigma > 0 else 0.0
    return centers[labels] + noise, labels


def create_bags_clf(instances, labels, spec):
    """Build balanced classification bags from an instance pool.

    Positive bags hold exactly spec.keys_per_positive instances of the key
    class plus uniform non-key fillers; negative bags are non-key only.
    Sampling is with replacement; instance order within a bag is shuffled.
    """
    instances = np.asarray(instances, dtype=np.float64)
    labels = np.asarray(labels)
    key_pool = np.flatnonzero(labels == spec.key_class)
    other_pool = np.flatnonzero(labels != spec.key_class)
    if key_pool.size == 0 or other_pool.size == 0:
        raise DataError(f"instance pool must contain key class {spec.key_class} and at least one other class")
    rng = np.random.default_rng(spec.seed)
    half = spec.num_bags // 2
    bags, masks = [], []
    for b in range(spec.num_bags):
        positive = b < half
        if positive:
            keys = key_pool[rng.integers(key_pool.size, size=spec.keys_per_positive)]
            rest = other_pool[rng.integers(other_pool.size, size=spec.bag_size - spec.keys_per_positive)]
            chosen = np.concatenate([keys, rest])
        else:
            chosen = other_pool[rng.integers(other_pool.size, size=spec.bag_size)]
        chosen = chosen[rng.permutation(spec.bag_size)]
        bags.append(instances[chosen])
        masks.append(labels[chosen] == spec.key_class)
    bag_labels = np.zeros(spec.num_bags)
    bag_labels[:half] = 1.0
    return BagDataset(
        bags=tuple(bags),
        labels=bag_labels,
        task=CLASSIFICATION,
        key_masks=tuple(masks),
    )


def create_bags_reg(instances, targets, spec):
    """Build regression bags: label = mean (or sum) of the member targets,
    contributions = member targets."""
    instances = np.asarray(instances, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if instances.shape[0] == 0 or instances.shape[0] != targets.shape[0]:
        raise DataError("instances and targets must be non-empty and aligned")
    rng = np.random.default_rng(spec.seed)
    chosen = rng.integers(instances.shape[0], size=(spec.num_bags, spec.bag_size))
    member_targets = targets[chosen]
    labels = member_targets.mean(axis=1) if spec.agg == "mean" else member_targets.sum(axis=1)
    return BagDataset(
        bags=tuple(instances[row] for row in chosen),
        labels=labels,
        task=REGRESSION,
        contributions=tuple(member_targets),
    )


def generate_additive_bags(spec):
    """Bags whose label is exactly the sum of hidden per-instance
    contributions c_ij = w . x_ij; w is stored in dataset metadata."""
    rng = np.random.default_rng(spec.seed)
    hidden_w = rng.standard_normal(spec.dim)
    sizes = rng.integers(spec.bag_size_min, spec.bag_size_max + 1, size=spec.num_bags)
    bags, contribs, labels = [], [], []
    for size in sizes:
        x = rng.standard_normal((size, spec.dim))
        c = x @ hidden_w
        bags.append(x)
        contribs.append(c)
        labels.append(c.sum())
    return BagDataset(
        bags=tuple(bags),
        labels=np.array(labels),
        task=REGRESSION,
        contributions=tuple(contribs),
        metadata={"hidden_weights": hidden_w.tolist()},
    )


def _encode_window(window, alphabet):
    k = len(alphabet)
    vec = np.zeros(len(window) * k)
    for p, ch in enumerate(window):
        idx = alphabet.find(ch)
        if idx < 0:
            raise DataError(f"letter {ch!r} not in alphabet")
        vec[p * k + idx] = 1.0
    return vec


def encode_window_pair(w1, w2, alphabet=AMINO_ACIDS):
    """Concatenated one-hot encoding of a window pair.

    Position p of w1 sets index p*len(alphabet) + letter_index; the w2 block
    is offset by len(w1)*len(alphabet). Exactly len(w1) + len(w2) entries
    are 1.
    """
    if len(w1) != len(w2):
        raise DataError("window pair must have equal lengths")
    return np.concatenate([_encode_window(w1, alphabet), _encode_window(w2, alphabet)])


def _window_offsets(spec):
    return range(0, spec.seq_len - spec.window + 1, spec.stride)


def _motif_positions(spec, motif):
    """Insertion positions such that at least one window fully contains the motif."""
    positions = [
        p
        for p in range(spec.seq_len - len(motif) + 1)
        if any(o <= p and p + len(motif) <= o + spec.window for o in _window_offsets(spec))
    ]
    if not positions:
        raise ConfigError(f"no window can contain motif {motif!r} under this window/stride")
    return positions


def _random_sequence(rng, spec):
    letters = rng.integers(len(spec.alphabet), size=spec.seq_len)
    return "".join(spec.alphabet[i] for i in letters)


def _clean_sequence(rng, spec):
    while True:
        seq = _random_sequence(rng, spec)
        if spec.motif1 not in seq and spec.motif2 not in seq:
            return seq


def _insert(seq, motif, pos):
    return seq[:pos] + motif + seq[pos + len(motif) :]


def generate_ppi_bags(spec):
    """Motif-pair interaction bags.

    Each bag holds all ordered window pairs of two random sequences
    (windows of length spec.window at offsets 0, stride, 2*stride, ...).
    Positive bags get motif1 planted in sequence 1 and motif2 in sequence 2
    at positions some window fully covers; negative sequences are resampled
    until they contain neither motif. Key instances are the window pairs
    containing both motifs.
    """
    rng = np.random.default_rng(spec.seed)
    pos1 = _motif_positions(spec, spec.motif1)
    pos2 = _motif_positions(spec, spec.motif2)
    offsets = list(_window_offsets(spec))
    half = spec.num_bags // 2
    bags, masks = [], []
    for b in range(spec.num_bags):
        if b < half:
            s1 = _insert(_random_sequence(rng, spec), spec.motif1, pos1[rng.integers(len(pos1))])
            s2 = _insert(_random_sequence(rng, spec), spec.motif2, pos2[rng.integers(len(pos2))])
        else:
            s1 = _clean_sequence(rng, spec)
            s2 = _clean_sequence(rng, spec)
        windows1 = [s1[o : o + spec.window] for o in offsets]
        windows2 = [s2[o : o + spec.window] for o in offsets]
        enc1 = np.stack([_encode_window(w, spec.alphabet) for w in windows1])
        enc2 = np.stack([_encode_window(w, spec.alphabet) for w in windows2])
        n1, n2 = len(windows1), len(windows2)
        bag = np.concatenate(
            [np.repeat(enc1, n2, axis=0), np.tile(enc2, (n1, 1))], axis=1
        )
        has1 = np.array([spec.motif1 in w for w in windows1])
        has2 = np.array([spec.motif2 in w for w in windows2])
        mask = (has1[:, None] & has2[None, :]).ravel()
        bags.append(bag)
        masks.append(mask)
    labels = np.zeros(spec.num_bags)
    labels[:half] = 1.0
    return BagDataset(
        bags=tuple(bags),
        labels=labels,
        task=CLASSIFICATION,
        key_masks=tuple(masks),
    )

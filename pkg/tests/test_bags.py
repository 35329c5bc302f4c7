import numpy as np
import pytest

from baglearn.bags import BagDataset, flatten_bags, split_train_test
from baglearn.errors import ConfigError, DataError


def toy_dataset(n=10, dim=3, task="regression", seed=0):
    rng = np.random.default_rng(seed)
    bags = tuple(rng.normal(size=(rng.integers(1, 5), dim)) for _ in range(n))
    labels = rng.normal(size=n) if task == "regression" else rng.integers(0, 2, n).astype(float)
    return BagDataset(bags=bags, labels=labels, task=task)


def test_valid_construction():
    ds = toy_dataset()
    assert len(ds) == 10
    assert ds.dim == 3
    assert not ds.labels.flags.writeable
    assert all(not b.flags.writeable for b in ds.bags)


def test_label_count_mismatch():
    with pytest.raises(DataError):
        BagDataset(bags=(np.zeros((2, 3)),), labels=np.array([1.0, 2.0]), task="regression")


def test_dimension_mismatch():
    with pytest.raises(DataError):
        BagDataset(bags=(np.zeros((2, 3)), np.zeros((2, 4))), labels=np.zeros(2), task="regression")


def test_empty_bag_rejected():
    with pytest.raises(DataError):
        BagDataset(bags=(np.zeros((0, 3)),), labels=np.zeros(1), task="regression")


def test_nonfinite_rejected():
    bag = np.array([[1.0, np.nan]])
    with pytest.raises(DataError):
        BagDataset(bags=(bag,), labels=np.zeros(1), task="regression")


def test_classification_labels_restricted():
    with pytest.raises(DataError):
        BagDataset(bags=(np.zeros((1, 2)),), labels=np.array([0.5]), task="classification")


def test_bad_task():
    with pytest.raises(ConfigError):
        BagDataset(bags=(np.zeros((1, 2)),), labels=np.zeros(1), task="ranking")


def test_key_mask_alignment():
    bags = (np.zeros((2, 2)),)
    BagDataset(bags=bags, labels=np.ones(1), task="classification", key_masks=([True, False],))
    with pytest.raises(DataError):
        BagDataset(bags=bags, labels=np.ones(1), task="classification", key_masks=([True],))


def test_contributions_alignment():
    bags = (np.zeros((3, 2)),)
    with pytest.raises(DataError):
        BagDataset(bags=bags, labels=np.zeros(1), task="regression", contributions=([1.0, 2.0],))


def test_empty_dataset_allowed():
    ds = BagDataset(bags=(), labels=np.zeros(0), task="regression")
    assert len(ds) == 0
    assert ds.dim is None


def test_split_counts():
    ds = toy_dataset(n=10)
    train, test = split_train_test(ds, 0.2, seed=1)
    assert len(train) == 8 and len(test) == 2


def test_split_paper_scale_ratio():
    # 80/20 on 10000 bags gives exactly 8000/2000
    ds = toy_dataset(n=10000, dim=2)
    train, test = split_train_test(ds, 0.2, seed=0)
    assert len(train) == 8000 and len(test) == 2000


def test_split_deterministic():
    ds = toy_dataset(n=20)
    a = split_train_test(ds, 0.3, seed=9)
    b = split_train_test(ds, 0.3, seed=9)
    for x, y in zip(a[0].bags, b[0].bags):
        assert np.array_equal(x, y)
    assert np.array_equal(a[1].labels, b[1].labels)


def test_split_partitions_without_overlap():
    ds = toy_dataset(n=17)
    # tag each bag by its first feature to track identity through the shuffle
    tagged = BagDataset(
        bags=tuple(np.full((1, 1), float(i)) for i in range(17)),
        labels=np.arange(17, dtype=float),
        task="regression",
    )
    train, test = split_train_test(tagged, 0.25, seed=3)
    seen = sorted([b[0, 0] for b in train.bags] + [b[0, 0] for b in test.bags])
    assert seen == [float(i) for i in range(17)]


def test_split_carries_masks_and_contributions():
    bags = tuple(np.full((2, 1), float(i)) for i in range(6))
    ds = BagDataset(
        bags=bags,
        labels=np.array([0, 1, 0, 1, 0, 1], dtype=float),
        task="classification",
        key_masks=tuple([i % 2 == 0, True] for i in range(6)),
    )
    train, test = split_train_test(ds, 0.5, seed=0)
    for part in (train, test):
        for bag, mask in zip(part.bags, part.key_masks):
            i = int(bag[0, 0])
            assert mask[0] == (i % 2 == 0)


def test_split_fraction_validation():
    ds = toy_dataset(n=4)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ConfigError):
            split_train_test(ds, bad, seed=0)
    with pytest.raises(DataError):
        split_train_test(toy_dataset(n=1), 0.5, seed=0)


def test_flatten_bags_offsets():
    bags = [np.ones((2, 3)), 2 * np.ones((3, 3))]
    x, offsets = flatten_bags(bags)
    assert x.shape == (5, 3)
    assert offsets.tolist() == [0, 2, 5]
    assert np.all(x[:2] == 1.0) and np.all(x[2:] == 2.0)

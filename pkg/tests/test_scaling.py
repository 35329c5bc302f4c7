import numpy as np
import pytest

from baglearn.bags import BagDataset
from baglearn.errors import DataError
from baglearn.scaling import BagMinMaxScaler


def dataset_from(bags, **kw):
    labels = kw.pop("labels", np.zeros(len(bags)))
    return BagDataset(bags=tuple(np.asarray(b, float) for b in bags), labels=labels,
                      task=kw.pop("task", "regression"), **kw)


def test_fit_two_single_instance_bags():
    ds = dataset_from([[[0.0]], [[1.0]]])
    scaler = BagMinMaxScaler().fit(ds)
    assert scaler.mins_.tolist() == [0.0]
    assert scaler.maxs_.tolist() == [1.0]


def test_fit_scans_all_instances():
    # brute-force oracle: min/max over the stacked instance table
    rng = np.random.default_rng(3)
    bags = [rng.normal(size=(rng.integers(1, 6), 4)) for _ in range(12)]
    ds = dataset_from(bags)
    scaler = BagMinMaxScaler().fit(ds)
    stacked = np.vstack(bags)
    assert np.array_equal(scaler.mins_, stacked.min(axis=0))
    assert np.array_equal(scaler.maxs_, stacked.max(axis=0))


def test_fit_example_two_bags():
    ds = dataset_from([[[2.0, 4.0]], [[6.0, 8.0]]])
    scaler = BagMinMaxScaler().fit(ds)
    assert scaler.mins_.tolist() == [2.0, 4.0]
    assert scaler.maxs_.tolist() == [6.0, 8.0]


def test_fit_single_instance_degenerate():
    scaler = BagMinMaxScaler().fit(dataset_from([[[5.0]]]))
    assert scaler.mins_.tolist() == [5.0] and scaler.maxs_.tolist() == [5.0]


def test_fit_empty_dataset():
    ds = BagDataset(bags=(), labels=np.zeros(0), task="regression")
    with pytest.raises(DataError):
        BagMinMaxScaler().fit(ds)


def test_transform_formula_endpoints():
    scaler = BagMinMaxScaler()
    scaler.mins_ = np.array([2.0, 4.0])
    scaler.maxs_ = np.array([6.0, 8.0])
    out = scaler.transform_bags([np.array([[2.0, 4.0], [6.0, 8.0]])])[0]
    assert np.allclose(out, [[0.0, 0.0], [1.0, 1.0]])


def test_transform_training_range_in_unit_interval():
    rng = np.random.default_rng(0)
    bags = [rng.uniform(-3, 7, size=(rng.integers(1, 5), 3)) for _ in range(20)]
    ds = dataset_from(bags)
    scaler = BagMinMaxScaler().fit(ds)
    out = scaler.transform(ds)
    for bag in out.bags:
        assert bag.min() >= 0.0 and bag.max() <= 1.0


def test_transform_constant_feature_maps_to_zero():
    ds = dataset_from([[[3.0, 1.0]], [[3.0, 2.0]]])
    scaler = BagMinMaxScaler().fit(ds)
    out = scaler.transform(ds)
    for bag in out.bags:
        assert np.all(bag[:, 0] == 0.0)


def test_transform_does_not_clip():
    scaler = BagMinMaxScaler()
    scaler.mins_ = np.array([0.0])
    scaler.maxs_ = np.array([1.0])
    out = scaler.transform_bags([np.array([[2.0], [-1.0]])])[0]
    assert out[0, 0] == 2.0 and out[1, 0] == -1.0


def test_transform_matches_scalar_oracle():
    # affine per feature: compare against an explicit per-entry evaluation
    rng = np.random.default_rng(5)
    bags = [rng.normal(size=(3, 4)) for _ in range(6)]
    ds = dataset_from(bags)
    scaler = BagMinMaxScaler().fit(ds)
    out = scaler.transform(ds)
    for raw, scaled in zip(ds.bags, out.bags):
        for i in range(raw.shape[0]):
            for j in range(raw.shape[1]):
                span = scaler.maxs_[j] - scaler.mins_[j]
                expected = 0.0 if span == 0 else (raw[i, j] - scaler.mins_[j]) / span
                assert scaled[i, j] == pytest.approx(expected, abs=1e-12)


def test_transform_passes_labels_masks_through():
    ds = BagDataset(
        bags=(np.array([[1.0], [2.0]]),),
        labels=np.array([1.0]),
        task="classification",
        key_masks=([True, False],),
    )
    out = BagMinMaxScaler().fit(ds).transform(ds)
    assert np.array_equal(out.labels, ds.labels)
    assert np.array_equal(out.key_masks[0], ds.key_masks[0])


def test_dimension_mismatch_rejected():
    scaler = BagMinMaxScaler().fit(dataset_from([[[1.0, 2.0]]]))
    with pytest.raises(DataError):
        scaler.transform(dataset_from([[[1.0]]]))


def test_unfitted_transform_rejected():
    with pytest.raises(DataError):
        BagMinMaxScaler().transform(dataset_from([[[1.0]]]))


def test_state_roundtrip():
    scaler = BagMinMaxScaler().fit(dataset_from([[[2.0, 4.0]], [[6.0, 8.0]]]))
    clone = BagMinMaxScaler.from_dict(scaler.to_dict())
    assert np.array_equal(clone.mins_, scaler.mins_)
    assert np.array_equal(clone.maxs_, scaler.maxs_)
    with pytest.raises(DataError):
        BagMinMaxScaler.from_dict({"mins": [1.0], "maxs": [0.0]})

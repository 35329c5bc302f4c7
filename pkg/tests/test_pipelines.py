import struct

import numpy as np
import pytest

from baglearn.errors import ConfigError
from baglearn.pipelines import (
    BENCHMARK_NAMES,
    benchmark_defaults,
    default_num_bags,
    generate_benchmark_dataset,
    run_benchmark,
)


def test_benchmark_defaults_cover_all_names():
    for name in BENCHMARK_NAMES:
        config = benchmark_defaults(name)
        assert config.pooling == "dynamic"
        assert default_num_bags(name) >= 2000
    with pytest.raises(ConfigError):
        benchmark_defaults("imagenet")


def test_generate_benchmark_dataset_shapes():
    ds, surrogate = generate_benchmark_dataset("mnist-clf", num_bags=20, seed=0)
    assert surrogate is True
    assert len(ds) == 20
    assert ds.task == "classification"
    assert ds.key_masks is not None

    ds, _ = generate_benchmark_dataset("mnist-reg", num_bags=10, seed=0)
    assert ds.task == "regression"
    assert ds.contributions is not None

    ds, _ = generate_benchmark_dataset("additive", num_bags=10, seed=0)
    assert ds.task == "regression"

    ds, _ = generate_benchmark_dataset("ppi", num_bags=4, seed=0)
    assert ds.bags[0].shape == (81, 400)


def test_generate_benchmark_dataset_with_idx_files(tmp_path):
    n, rows, cols = 60, 2, 3
    img = tmp_path / "img.idx3"
    rng = np.random.default_rng(0)
    img.write_bytes(struct.pack(">iiii", 2051, n, rows, cols)
                    + bytes(rng.integers(0, 256, n * rows * cols, dtype=np.uint8)))
    lab = tmp_path / "lab.idx1"
    lab.write_bytes(struct.pack(">ii", 2049, n) + bytes(rng.integers(0, 10, n, dtype=np.uint8).tolist()))
    ds, surrogate = generate_benchmark_dataset("mnist-clf", num_bags=10, seed=0,
                                               idx_images=str(img), idx_labels=str(lab))
    assert surrogate is False
    assert ds.dim == rows * cols

    with pytest.raises(ConfigError):
        generate_benchmark_dataset("mnist-clf", num_bags=10, seed=0, idx_images=str(img))


def test_run_benchmark_small_end_to_end(tmp_path):
    result = run_benchmark("additive", num_bags=40, seed=1, out_dir=str(tmp_path / "out"),
                           config_overrides={"epochs": 2, "warm_start_epochs": 2,
                                             "encoder_hidden": (8,), "attention_hidden": 4,
                                             "head_hidden": (4,)})
    assert (tmp_path / "out" / "dataset.jsonl").exists()
    assert (tmp_path / "out" / "model.json").exists()
    assert (tmp_path / "out" / "report.json").exists()
    assert result["report"].n_test_bags == 8
    assert len(result["train"]) == 32

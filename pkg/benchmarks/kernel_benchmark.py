#!/usr/bin/env python3
"""Benchmark the segment kernels: numba backend vs pure-numpy fallback.

The kernels run once per training batch, looping over every bag segment;
this script times them on ragged workloads of increasing size and then
times a short end-to-end fit under each backend. Run with
BAGLEARN_DISABLE_NUMBA=1 to confirm the fallback path is the one measured
as "numpy" here.

Usage: python benchmarks/kernel_benchmark.py [--repeats 50]
"""

import argparse
import time

import numpy as np

from baglearn import kernels
from baglearn.bags import BagDataset
from baglearn.estimators import NeuralMIL, NeuralMILConfig


def ragged_workload(n_bags, min_size, max_size, dim, seed):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(min_size, max_size + 1, size=n_bags)
    offsets = np.zeros(n_bags + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    h = rng.normal(size=(offsets[-1], dim))
    scores = rng.normal(size=offsets[-1])
    dz = rng.normal(size=(n_bags, dim))
    return h, scores, dz, offsets


def time_call(fn, repeats):
    fn()  # warm-up (includes JIT compilation on the numba path)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(repeats):
    workloads = [
        ("small bags", ragged_workload(256, 3, 8, 64, 0)),
        ("medium bags", ragged_workload(256, 5, 40, 128, 1)),
        ("large bags", ragged_workload(64, 50, 120, 128, 2)),
    ]
    print(f"{'workload':<12} {'kernel':<24} {'numpy (us)':>12} {'numba (us)':>12} {'speedup':>9}")
    for label, (h, scores, dz, offsets) in workloads:
        weights = kernels.numpy_ops.seg_softmax(scores, offsets, 1.0)
        calls = [
            ("seg_softmax", lambda m: m.seg_softmax(scores, offsets, 1.0)),
            ("seg_softmax_grad", lambda m: m.seg_softmax_grad(weights, scores, offsets, 1.0)),
            ("seg_weighted_sum", lambda m: m.seg_weighted_sum(h, weights, offsets)),
            ("seg_weighted_sum_grad", lambda m: m.seg_weighted_sum_grad(h, weights, dz, offsets)),
            ("seg_mean", lambda m: m.seg_mean(h, offsets)),
            ("seg_mean_grad", lambda m: m.seg_mean_grad(dz, offsets)),
            ("seg_max", lambda m: m.seg_max(h, offsets)),
            ("seg_max_weights", lambda m: m.seg_max_weights(h, m.seg_max(h, offsets)[0], offsets)),
        ]
        for name, call in calls:
            t_np = time_call(lambda: call(kernels.numpy_ops), repeats)
            try:
                from baglearn.kernels import numba_ops
            except ImportError:
                print(f"{label:<12} {name:<24} {t_np * 1e6:>12.1f} {'n/a':>12} {'n/a':>9}")
                continue
            t_nb = time_call(lambda: call(numba_ops), repeats)
            print(f"{label:<12} {name:<24} {t_np * 1e6:>12.1f} {t_nb * 1e6:>12.1f} {t_np / t_nb:>8.1f}x")


def bench_end_to_end():
    rng = np.random.default_rng(0)
    bags = tuple(rng.normal(size=(n, 32)) for n in rng.integers(3, 9, size=400))
    labels = np.array([b.sum(axis=0) @ np.ones(32) / 32 for b in bags])
    ds = BagDataset(bags=bags, labels=labels, task="regression")
    config = NeuralMILConfig(task="regression", pooling="dynamic", encoder_hidden=(64, 32),
                             attention_hidden=32, head_hidden=(32,), epochs=20, seed=0)
    print()
    print("end-to-end fit (400 bags, 20 epochs, dynamic pooling):")
    original = kernels.active_backend()
    for backend in ("numpy", "numba"):
        try:
            kernels.use_backend(backend)
        except RuntimeError:
            print(f"  {backend:<6} unavailable")
            continue
        NeuralMIL(config).fit(ds)  # warm-up
        start = time.perf_counter()
        NeuralMIL(config).fit(ds)
        print(f"  {backend:<6} {time.perf_counter() - start:.2f}s")
    kernels.use_backend(original)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()
    print(f"default backend: {kernels.active_backend()}")
    bench_kernels(args.repeats)
    bench_end_to_end()


if __name__ == "__main__":
    main()

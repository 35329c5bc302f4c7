"""Backend dispatch for the segment kernels.

The hot inner loops (per-bag softmax, weighted sums, max reductions) exist
twice: compiled with numba (``numba_ops``) and as a pure-numpy fallback
(``numpy_ops``). The numba path is used by default when numba imports;
setting the environment variable ``BAGLEARN_DISABLE_NUMBA=1`` forces the
numpy path. ``benchmarks/kernel_benchmark.py`` compares the two.
"""

import os

from . import numpy_ops

_KERNEL_NAMES = (
    "seg_softmax",
    "seg_softmax_grad",
    "seg_weighted_sum",
    "seg_weighted_sum_grad",
    "seg_mean",
    "seg_mean_grad",
    "seg_max",
    "seg_max_grad",
    "seg_max_weights",
)

_numba_ops = None
if os.environ.get("BAGLEARN_DISABLE_NUMBA", "0") not in ("1", "true", "yes"):
    try:
        from . import numba_ops as _numba_ops
    except ImportError:
        _numba_ops = None

_active = _numba_ops if _numba_ops is not None else numpy_ops


def active_backend():
    """Name of the backend currently in use: 'numba' or 'numpy'."""
    return "numba" if _active is not numpy_ops else "numpy"


def use_backend(name):
    """Switch backends at runtime ('numba' or 'numpy'); used by benchmarks and tests."""
    global _active
    if name == "numpy":
        _active = numpy_ops
    elif name == "numba":
        if _numba_ops is None:
            raise RuntimeError("numba backend unavailable")
        _active = _numba_ops
    else:
        raise ValueError(f"unknown backend {name!r}")


def _make_dispatcher(kernel_name):
    def dispatch(*args):
        return getattr(_active, kernel_name)(*args)

    dispatch.__name__ = kernel_name
    dispatch.__doc__ = getattr(numpy_ops, kernel_name).__doc__
    return dispatch


seg_softmax = _make_dispatcher("seg_softmax")
seg_softmax_grad = _make_dispatcher("seg_softmax_grad")
seg_weighted_sum = _make_dispatcher("seg_weighted_sum")
seg_weighted_sum_grad = _make_dispatcher("seg_weighted_sum_grad")
seg_mean = _make_dispatcher("seg_mean")
seg_mean_grad = _make_dispatcher("seg_mean_grad")
seg_max = _make_dispatcher("seg_max")
seg_max_grad = _make_dispatcher("seg_max_grad")
seg_max_weights = _make_dispatcher("seg_max_weights")

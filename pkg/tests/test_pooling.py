import numpy as np
import pytest

from baglearn.bags import flatten_bags
from baglearn.errors import ConfigError, DataError
from baglearn.pooling import init_attention, pool, pool_forward

RNG = np.random.default_rng(0)


def make_attn(dim, hidden=4, gated=False, seed=0):
    return init_attention(np.random.default_rng(seed), dim, hidden, gated)


def test_mean_pool():
    h = np.array([[1.0, 3.0], [3.0, 5.0]])
    z, w = pool("mean", h)
    assert z.tolist() == [2.0, 4.0]
    assert w.tolist() == [0.5, 0.5]


def test_max_pool_split_coordinates():
    h = np.array([[1.0, 0.0], [0.0, 1.0]])
    z, w = pool("max", h)
    assert z.tolist() == [1.0, 1.0]
    assert w.tolist() == [0.5, 0.5]


def test_max_pool_tie_split():
    h = np.array([[1.0, 1.0], [1.0, 0.0]])
    z, w = pool("max", h)
    assert z.tolist() == [1.0, 1.0]
    # coordinate 0 tied between both rows, coordinate 1 won by row 0
    assert w.tolist() == pytest.approx([0.75, 0.25])
    assert w.sum() == pytest.approx(1.0)


def test_softmax_weights_from_scores():
    # scores (0, ln 3) at temperature 1 give weights (0.25, 0.75); build an
    # attention parameterization that produces exactly those scores
    attn = {"v": np.array([[1.0]]) * 1e6, "u": np.array([np.log(3.0)])}
    h = np.array([[0.0], [1.0]])  # tanh(1e6*0) = 0, tanh(1e6) = 1
    z, w = pool("attention", h, attn=attn)
    assert w.tolist() == pytest.approx([0.25, 0.75], abs=1e-9)
    assert z[0] == pytest.approx(0.75 * 1.0, abs=1e-9)


def test_identical_instances_uniform_weights():
    h = np.tile(np.array([[0.3, -0.7, 1.1]]), (5, 1))
    for kind in ("attention", "dynamic", "gated"):
        attn = make_attn(3, gated=kind == "gated")
        _, w = pool(kind, h, attn=attn, temperature=0.7)
        assert np.allclose(w, 0.2, atol=1e-12)


def test_weights_nonnegative_sum_one():
    h = RNG.normal(size=(7, 5))
    for kind, gated in (("attention", False), ("dynamic", False), ("gated", True)):
        attn = make_attn(5, gated=gated)
        _, w = pool(kind, h, attn=attn, temperature=1.3)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-9)


def test_dynamic_high_temperature_uniform():
    h = RNG.normal(size=(6, 4))
    attn = make_attn(4)
    _, w = pool("dynamic", h, attn=attn, temperature=1e6)
    assert np.max(np.abs(w - 1.0 / 6.0)) < 1e-4


def test_dynamic_temperature_sharpens():
    h = RNG.normal(size=(4, 3)) * 3
    attn = make_attn(3, seed=5)
    _, w_soft = pool("dynamic", h, attn=attn, temperature=5.0)
    _, w_sharp = pool("dynamic", h, attn=attn, temperature=0.2)
    assert w_sharp.max() > w_soft.max()
    # order is temperature-invariant
    assert np.array_equal(np.argsort(w_soft), np.argsort(w_sharp))


def test_empty_bag_rejected():
    with pytest.raises(DataError):
        pool("mean", np.zeros((0, 3)))


def test_bad_kind_and_temperature():
    with pytest.raises(ConfigError):
        pool("median", np.ones((1, 2)))
    with pytest.raises(ConfigError):
        pool("dynamic", np.ones((1, 2)), attn=make_attn(2), temperature=0.0)
    with pytest.raises(ConfigError):
        pool("attention", np.ones((1, 2)), attn=None)


def test_batched_matches_single_bag():
    bags = [RNG.normal(size=(n, 4)) for n in (2, 5, 1, 3)]
    x, offsets = flatten_bags(bags)
    for kind, gated in (("mean", False), ("max", False), ("attention", False),
                        ("dynamic", False), ("gated", True)):
        attn = make_attn(4, gated=gated, seed=3)
        z, w, _ = pool_forward(kind, x, offsets, attn=attn, temperature=0.8)
        for b, bag in enumerate(bags):
            z1, w1 = pool(kind, bag, attn=attn, temperature=0.8)
            assert np.allclose(z[b], z1, atol=1e-12)
            assert np.allclose(w[offsets[b] : offsets[b + 1]], w1, atol=1e-12)


def test_gated_differs_from_plain_attention():
    h = RNG.normal(size=(4, 3))
    attn = make_attn(3, gated=True, seed=9)
    _, w_gated = pool("gated", h, attn=attn)
    _, w_plain = pool("attention", h, attn={"v": attn["v"], "u": attn["u"]})
    assert not np.allclose(w_gated, w_plain)

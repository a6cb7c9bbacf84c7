import itertools
import math
from collections import Counter

import numpy as np
import pytest

from gwsnake.gof import chi_square_two_sample, chi_square_uniform
from gwsnake.offspring_laws import binary, geometric, poisson, stable_tail
from gwsnake.tree_codec import PlaneTree
from gwsnake.tree_sampler import (
    BridgeWalk,
    SamplingFailure,
    cyclic_shift,
    sample_bridge,
    sample_tree,
    sample_tree_direct,
    valid_shifts,
)


def plane_trees(n_vertices):
    """All plane trees with the given number of vertices, as degree tuples."""
    out = []
    for deg in itertools.product(range(n_vertices), repeat=n_vertices):
        w = np.cumsum(np.array(deg) - 1)
        if w[-1] == -1 and (n_vertices == 1 or w[:-1].min() >= 0):
            out.append(deg)
    return out


def test_catalan_enumeration():
    assert [len(plane_trees(k)) for k in range(1, 7)] == [1, 1, 2, 5, 14, 42]


def test_bridge_n1_support(rng):
    seen = Counter(tuple(sample_bridge(geometric(), 1, rng).increments) for _ in range(4000))
    assert set(seen) == {(-1, 0), (0, -1)}
    # both have weight mu(0) mu(1)
    assert chi_square_uniform([seen[(-1, 0)], seen[(0, -1)]]) > 1e-3


@pytest.mark.parametrize("method", ["counts", "vector"])
@pytest.mark.parametrize("law", [geometric(), poisson(), stable_tail(1.4)], ids=lambda l: l.family)
def test_bridge_sums(law, method, rng):
    for n in (0, 1, 5, 40):
        b = sample_bridge(law, n, rng, method=method)
        assert b.N == n + 1 and b.increments.sum() == -1 and b.increments.min() >= -1


def test_binary_parity_failure(rng):
    with pytest.raises(SamplingFailure) as info:
        sample_bridge(binary(), 3, rng, max_attempts=5000)
    assert info.value.diagnostics["attempts"] == 5000
    assert info.value.diagnostics["reachable"] is False
    assert sample_tree(binary(), 2, rng).degrees.tolist() == [2, 0, 0]


def test_cyclic_shift_examples():
    w = cyclic_shift(BridgeWalk(np.array([-1, 2, -1, -1])))
    assert w.j == 1
    assert w.shifted.increments.tolist() == [2, -1, -1, -1]
    assert w.shifted.partial_sums.tolist() == [0, 2, 1, 0, -1]
    w = cyclic_shift(BridgeWalk(np.array([1, -1, -1])))
    assert w.j == 3 and w.shifted.increments.tolist() == [1, -1, -1]
    assert valid_shifts(np.array([-1, 2, -1, -1])).tolist() == [1]


def test_shift_index_uniform(rng):
    N = 21
    counts = np.zeros(N, int)
    for _ in range(100_000):
        b = sample_bridge(geometric(), 20, rng)
        counts[cyclic_shift(b, check=False).j - 1] += 1
    assert chi_square_uniform(counts) > 1e-3


def test_sample_tree_is_valid(rng):
    for law in (geometric(), poisson(), stable_tail(1.2)):
        for n in (0, 1, 7, 300):
            t = sample_tree(law, n, rng)
            PlaneTree(t.degrees)  # validates
            assert t.n == n
    assert sample_tree(geometric(), 0, rng).degrees.tolist() == [0]
    assert sample_tree_direct(geometric(), 0, rng).degrees.tolist() == [0]


def test_samplers_agree_on_shapes(rng):
    shapes = plane_trees(5)
    idx = {s: i for i, s in enumerate(shapes)}
    a = np.zeros(len(shapes), int)
    b = np.zeros(len(shapes), int)
    law = poisson()
    for _ in range(20_000):
        a[idx[tuple(sample_tree(law, 4, rng).degrees)]] += 1
        b[idx[tuple(sample_tree_direct(law, 4, rng).degrees)]] += 1
    assert chi_square_two_sample(a, b) > 1e-3


def test_direct_binary_three_vertices(rng):
    for _ in range(50):
        assert sample_tree_direct(binary(), 2, rng).degrees.tolist() == [2, 0, 0]
        assert sample_tree(binary(), 2, rng).degrees.tolist() == [2, 0, 0]


def test_determinism():
    a = sample_tree(geometric(), 1000, np.random.default_rng(5))
    b = sample_tree(geometric(), 1000, np.random.default_rng(5))
    assert a == b

import numpy as np
import pytest

from gwsnake.offspring_laws import geometric, poisson, stable_tail
from gwsnake.tree_codec import (
    InvalidTree,
    PlaneTree,
    ancestor_pairs,
    chain,
    contour,
    decode,
    encode,
    height,
    height_via_records,
    lukasiewicz,
    mirror,
    path_length_from_contour,
    star,
    total_path_length,
)
from gwsnake.tree_sampler import sample_tree

WORKED_W = [0, 3, 2, 1, 2, 2, 5, 4, 3, 2, 1, 0, 1, 3, 2, 1, 0, -1]
WORKED_H = [0, 1, 1, 1, 2, 3, 4, 4, 4, 4, 2, 1, 2, 3, 3, 3, 2]
WORKED_C = [0, 1, 0, 1, 0, 1, 2, 3, 4, 3, 4, 3, 4, 3, 4, 3, 2, 1, 2, 1, 0, 1, 2, 3, 2, 3, 2, 3, 2, 1, 2, 1, 0]


def test_worked_tree(worked_tree):
    assert lukasiewicz(worked_tree).tolist() == WORKED_W
    assert height(worked_tree).tolist() == WORKED_H
    assert contour(worked_tree).tolist() == WORKED_C
    assert height_via_records(WORKED_W).tolist() == WORKED_H


def test_worked_path_length(worked_tree):
    C = np.array(WORKED_C)
    assert total_path_length(worked_tree) == 40
    assert C[1:-1].sum() == 64
    assert path_length_from_contour(C) == 40
    assert ancestor_pairs(worked_tree) == 40


def test_small_shapes():
    c, s = chain(4), star(4)
    assert c.degrees.tolist() == [1, 1, 1, 0]
    assert lukasiewicz(c).tolist() == [0, 0, 0, 0, -1]
    assert lukasiewicz(s).tolist() == [0, 2, 1, 0, -1]
    assert height(c).tolist() == [0, 1, 2, 3]
    assert height(s).tolist() == [0, 1, 1, 1]
    assert contour(c).tolist() == [0, 1, 2, 3, 2, 1, 0]
    assert contour(s).tolist() == [0, 1, 0, 1, 0, 1, 0]
    assert height_via_records([0, 0, 0, 0, -1]).tolist() == [0, 1, 2, 3]
    assert total_path_length(c) == 6 and total_path_length(s) == 3


def test_single_vertex():
    t = PlaneTree([0])
    assert encode(t).C.tolist() == [0]
    assert lukasiewicz(t).tolist() == [0, -1]
    assert mirror(t) == t


def test_decode_stack_replay():
    t = decode([0, 1, 1, 0, -1])
    assert t.degrees.tolist() == [2, 1, 0, 0]
    assert t.parent.tolist() == [-1, 0, 1, 0]


@pytest.mark.parametrize("bad", [[1, 0, 0], [0, 1], [2, 0], [], [-1, 1]])
def test_invalid_degrees(bad):
    with pytest.raises(InvalidTree):
        PlaneTree(bad)


def test_derived_arrays(worked_tree):
    assert worked_tree.subtree_size[0] == 17
    par, size = worked_tree.parent, worked_tree.subtree_size
    for v in range(17):
        kids = np.flatnonzero(par == v)
        assert size[v] == 1 + size[kids].sum()
        assert kids.size == worked_tree.degrees[v]
    assert worked_tree.child_rank[[1, 2, 3, 5]].tolist() == [0, 1, 2, 0]


def test_random_identities(rng):
    for law in (geometric(), poisson(), stable_tail(1.5)):
        for _ in range(100):
            t = sample_tree(law, int(rng.integers(1, 201)), rng)
            W, H, C = encode(t)
            assert np.array_equal(height_via_records(W), H)
            assert decode(W) == t
            m = mirror(t)
            assert np.array_equal(contour(m), C[::-1])
            assert mirror(m) == t
            assert total_path_length(m) == total_path_length(t)
            assert path_length_from_contour(C) == total_path_length(t) == ancestor_pairs(t)
            assert H.max() == C.max()
            assert np.all(np.abs(np.diff(C)) == 1) and C[0] == C[-1] == 0
            assert np.all(np.diff(H) <= 1)


def test_first_visit_matches_lex_order(rng):
    t = sample_tree(geometric(), 500, rng)
    fv = t.first_visit
    assert np.all(np.diff(fv) > 0)
    assert np.array_equal(t.contour_vertices[fv], np.arange(501))


def test_decode_first_step_is_root_degree_minus_one():
    assert decode([0, 2, 1, 0, -1]) == star(4)

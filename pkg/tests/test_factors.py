import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deplab.factors import (arc_degree, arc_degrees, arc_factors, dependency_length, dependency_lengths,
                            is_projective, root_distance, root_distances, sibling_count, sibling_counts)
from deplab.synthetic import random_tree
from deplab.treebank import Arc, DependencyGraph

import oracles

tree_seeds = st.tuples(st.integers(0, 2**32 - 1), st.integers(1, 8))


def _tree(seed_n, labels=("A", "B", "C")):
    seed, n = seed_n
    return random_tree(np.random.default_rng(seed), n, labels=labels)


def test_scripts_sent_values(scripts_sent):
    g = scripts_sent.graph()
    assert dependency_length(g.arc_of(2)) == 2
    assert root_distance(g, 4) == 1          # direct root child
    assert root_distance(g, 2) == 2
    assert root_distance(g, 1) == 3
    hai, moi = g.arc_of(1), g.arc_of(3)
    assert hai.head == moi.head == 2
    assert sibling_count(g, hai) >= 1
    assert is_projective(g)


def test_nonproj_sent_values(nonproj_sent):
    g = nonproj_sent.graph()
    assert arc_degree(g, g.arc_of(1)) == 1
    assert not is_projective(g)


def test_trivial_values():
    g = DependencyGraph.from_heads([-1, 0, 1, 2], [None, "A", "B", "C"])
    assert dependency_length(Arc(1, 2, "B")) == 1
    assert root_distance(g, 3) == 3
    assert sibling_count(g, g.arc_of(3)) == 0
    star = DependencyGraph.from_heads([-1, 0, 1, 1, 1, 1], [None] + ["A"] * 5)
    assert [sibling_count(star, star.arc_of(d)) for d in range(2, 6)] == [3] * 4


@settings(max_examples=300, deadline=None)
@given(tree_seeds)
def test_factors_match_oracles(seed_n):
    g = _tree(seed_n)
    h = g.heads()
    depth = oracles.bfs_depth(h)
    kids = oracles.children_lists(h)
    f = arc_factors(g)
    for a in g.arcs:
        d = a.dependent
        assert f[d].dependency_length == abs(a.head - d) >= 1
        assert f[d].root_distance == depth[d] >= 1
        assert f[d].sibling_count == len(kids[a.head]) - 1
        assert f[d].degree == oracles.brute_degree(h, a.head, d)


@settings(max_examples=300, deadline=None)
@given(tree_seeds)
def test_root_distance_recursion(seed_n):
    g = _tree(seed_n)
    h = g.heads()
    dist = root_distances(g)
    for d in range(1, g.n + 1):
        assert dist[d] == 1 + (dist[h[d]] if h[d] > 0 else 0)


@settings(max_examples=200, deadline=None)
@given(tree_seeds)
def test_sibling_counting_consistency(seed_n):
    g = _tree(seed_n)
    h = g.heads()
    sib = sibling_counts(g)
    # each head with m children contributes m arcs, each reporting m - 1 siblings
    total = 0
    for head in set(h[1:].tolist()):
        children = [d for d in range(1, g.n + 1) if h[d] == head]
        total += sum(1 for d in children if sib[d] + 1 == len(children))
    assert total == g.n


@settings(max_examples=200, deadline=None)
@given(tree_seeds, st.permutations(["A", "B", "C"]))
def test_factors_ignore_labels(seed_n, perm):
    g = _tree(seed_n)
    relab = DependencyGraph(g.n, frozenset(Arc(a.head, a.dependent, perm["ABC".index(a.label)]) for a in g.arcs))
    assert arc_factors(g) == arc_factors(relab)


@pytest.mark.parametrize("n", range(1, 7))
def test_projectivity_exhaustive(n):
    for heads in oracles.all_trees(n):
        g = DependencyGraph.from_heads(heads)
        deg = arc_degrees(g)
        assert is_projective(g) == oracles.brute_projective(heads)
        assert is_projective(g) == (deg.max() == 0)
        if is_projective(g):
            assert not deg.any()


@pytest.mark.parametrize("n", range(1, 7))
def test_positive_degree_means_crossing(n):
    for heads in oracles.all_trees(n):
        deg = arc_degrees(DependencyGraph.from_heads(heads))
        arcs = [(int(heads[d]), d) for d in range(1, n + 1)]
        for d in range(1, n + 1):
            if deg[d] > 0:
                assert any(oracles.crosses(arcs[d - 1], b) for b in arcs if b != arcs[d - 1])


def test_zero_degree_arc_may_still_be_crossed():
    # arc 0->2 has degree 0 (word 1 is a root child), yet 1->3 crosses it
    heads = [-1, 0, 0, 1]
    g = DependencyGraph.from_heads(heads)
    assert arc_degree(g, g.arc_of(2)) == 0
    assert oracles.crosses((0, 2), (1, 3))
    assert not is_projective(g)


def test_kernels_agree_exhaustively():
    from deplab._kernels import arc_degrees_nb, arc_degrees_np
    for n in range(1, 7):
        for heads in oracles.all_trees(n):
            assert (arc_degrees_nb(heads) == arc_degrees_np(heads)).all()


def test_vectorized_shapes():
    g = DependencyGraph.from_heads([-1, 2, 0, 2])
    assert dependency_lengths(g).tolist() == [0, 1, 2, 1]
    assert root_distances(g).tolist() == [0, 2, 1, 2]


def test_root_distance_cycle():
    heads = [-1, 2, 1, 0]
    g = DependencyGraph.from_heads(heads)
    with pytest.raises(ValueError):
        root_distances(g)
    assert root_distances(g, strict=False).tolist() == [0, -1, -1, 1]

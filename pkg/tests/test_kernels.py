import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deplab import _accel, _kernels
from deplab.treebank import DependencyGraph, validate_graph

import oracles


def _random_scores(rng, n, integer=True):
    if integer:
        return rng.integers(-5, 6, size=(n + 1, n + 1)).astype(np.float64)
    return rng.normal(size=(n + 1, n + 1))


@pytest.mark.parametrize("integer", [True, False])
def test_numba_and_numpy_cle_agree(integer):
    rng = np.random.default_rng(17)
    for _ in range(600):
        n = int(rng.integers(1, 12))
        s = _random_scores(rng, n, integer)
        a = _kernels.chu_liu_edmonds_nb(s.copy())
        b = _kernels.chu_liu_edmonds_np(s.copy())
        assert (a == b).all()
        assert a[0] == -1


def test_cle_does_not_mutate_input():
    rng = np.random.default_rng(0)
    s = _random_scores(rng, 6)
    before = s.copy()
    _kernels.chu_liu_edmonds_nb(s)
    _kernels.chu_liu_edmonds_np(s)
    assert np.array_equal(s, before)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 25))
def test_cle_output_is_tree(seed, n):
    s = _random_scores(np.random.default_rng(seed), n)
    for fn in (_kernels.chu_liu_edmonds_nb, _kernels.chu_liu_edmonds_np):
        h = fn(s)
        assert validate_graph(DependencyGraph.from_heads(h), strict=False).ok


def test_cle_tie_break_prefers_smaller_head():
    s = np.zeros((4, 4))
    h = _kernels.chu_liu_edmonds_nb(s)
    assert h.tolist() == [-1, 0, 0, 0]
    assert _kernels.chu_liu_edmonds_np(s).tolist() == [-1, 0, 0, 0]


def test_degree_kernels_agree_on_random_trees():
    rng = np.random.default_rng(5)
    from deplab.synthetic import random_tree
    for _ in range(500):
        h = random_tree(rng, int(rng.integers(1, 30))).heads()
        assert (_kernels.arc_degrees_nb(h) == _kernels.arc_degrees_np(h)).all()


def test_ancestor_matrix():
    h = np.array([-1, 2, 0, 2])
    A = _kernels.ancestor_matrix(h)
    assert A[1, 2] and A[1, 0] and A[1, 1]
    assert not A[2, 1] and not A[3, 1]


def test_env_flag_selects_numpy():
    code = ("from deplab import _accel, _kernels; "
            "print(_accel.USE_NUMBA, _kernels.chu_liu_edmonds is _kernels.chu_liu_edmonds_np, "
            "_kernels.arc_degrees is _kernels.arc_degrees_np)")
    env = dict(os.environ, DEPLAB_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True", "True"]


def test_default_uses_numba_when_available():
    if os.environ.get("DEPLAB_DISABLE_NUMBA"):
        pytest.skip("numpy path forced by the environment")
    assert _accel.USE_NUMBA == _accel.HAVE_NUMBA
    if _accel.HAVE_NUMBA:
        assert _kernels.chu_liu_edmonds is _kernels.chu_liu_edmonds_nb


def test_numpy_path_end_to_end():
    """The whole overfit path works with the numpy kernels."""
    code = ("from deplab.synthetic import synthetic_treebank; "
            "from deplab.graph_parser import train_graph_model, parse_treebank; "
            "from deplab.evaluation import evaluate; "
            "tb = synthetic_treebank(20, seed=4); "
            "print(evaluate(tb, parse_treebank(train_graph_model(tb, epochs=5), tb)).las)")
    env = dict(os.environ, DEPLAB_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) >= 95.0


def test_brute_force_helper_counts():
    # Cayley: (n+1)^(n-1) trees rooted at 0; n^(n-1) with a single root child
    for n in range(1, 6):
        assert len(oracles.all_trees(n)) == (n + 1) ** (n - 1)
        assert len(oracles.all_trees(n, strict=True)) == n ** (n - 1)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pipeopt import _pykernels, kernels

backends = kernels.available_backends()


def gini_split_brute(X, y, rows, features, min_leaf):
    """Enumerate every threshold between distinct sorted values."""
    best = (-1, 0.0, -np.inf)
    n = len(rows)
    for f in features:
        vals = np.unique(X[rows, f])
        for a, b in zip(vals[:-1], vals[1:]):
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            left = rows[X[rows, f] <= thr]
            right = rows[X[rows, f] > thr]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            score = sum(
                (y[s].sum() ** 2 + (len(s) - y[s].sum()) ** 2) / len(s) for s in (left, right)
            )
            if score > best[2] + 1e-12:
                best = (f, thr, score)
    return best[0], best[1]


def test_compiled_backend_built():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in backends


@pytest.mark.parametrize("seed", range(20))
def test_best_split_matches_enumeration(backend, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(40, 3)).astype(float)
    y = (rng.random(40) < 0.4).astype(float)
    rows = np.sort(rng.choice(40, size=30, replace=False))
    feats = np.array([2, 0, 1])
    f, thr, gain = kernels.best_split(X, y, rows, feats, 2, impl=backend)
    bf, bthr = gini_split_brute(X, y, rows, feats, 2)
    assert (f, thr) == (bf, bthr)
    assert gain >= 0


def test_best_split_no_valid_split(backend):
    X = np.ones((5, 2))
    y = np.array([0, 1, 0, 1, 0.0])
    assert kernels.best_split(X, y, np.arange(5), np.arange(2), 1, impl=backend)[0] == -1


@settings(max_examples=60, deadline=None)
@given(
    X=arrays(np.float64, (25, 3), elements=st.integers(-3, 3).map(float)),
    ybits=arrays(np.float64, 25, elements=st.sampled_from([0.0, 1.0])),
    min_leaf=st.integers(1, 5),
)
def test_backends_agree_on_splits(X, ybits, min_leaf):
    if len(backends) < 2:
        pytest.skip("compiled backend not built")
    rows = np.arange(25)
    feats = np.arange(3)
    a = kernels.best_split(X, ybits, rows, feats, min_leaf, impl=backends["cython"])
    b = kernels.best_split(X, ybits, rows, feats, min_leaf, impl=backends["python"])
    assert a == b


@pytest.mark.parametrize("exclude_self", [False, True])
def test_knn_matches_brute_force(backend, exclude_self):
    rng = np.random.default_rng(3)
    ref = rng.integers(0, 4, size=(30, 2)).astype(float)  # many exact ties
    query = ref.copy() if exclude_self else rng.integers(0, 4, size=(12, 2)).astype(float)
    k = 4
    got = kernels.knn_indices(ref, query, k, exclude_self, impl=backend)
    for q in range(len(query)):
        d = ((ref - query[q]) ** 2).sum(axis=1)
        cand = [(d[r], r) for r in range(len(ref)) if not (exclude_self and r == q)]
        want = [r for _, r in sorted(cand)[:k]]
        assert got[q].tolist() == want


def test_knn_k_out_of_range(backend):
    ref = np.zeros((3, 2))
    with pytest.raises(ValueError):
        kernels.knn_indices(ref, ref, 3, True, impl=backend)


def test_k_smallest_ties_and_inf(backend):
    D = np.array([[3.0, 1.0, 1.0, np.inf, 0.5], [np.inf, np.inf, 2.0, 2.0, 2.0]])
    got = kernels.k_smallest(D, 3, impl=backend)
    assert got.tolist() == [[4, 1, 2], [2, 3, 4]]


def test_tree_apply_matches_manual_walk(backend):
    # root splits f0 at 0.5; left child splits f1 at 2.0
    feature = np.array([0, 1, -1, -1, -1])
    threshold = np.array([0.5, 2.0, 0, 0, 0])
    left = np.array([1, 3, -1, -1, -1])
    right = np.array([2, 4, -1, -1, -1])
    X = np.array([[0.0, 1.0], [0.0, 3.0], [1.0, 0.0], [0.5, 2.0]])
    assert kernels.tree_apply(feature, threshold, left, right, X, impl=backend).tolist() == [3, 4, 2, 3]


def test_pure_python_env_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("PIPEOPT_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod._impl is _pykernels
    finally:
        monkeypatch.delenv("PIPEOPT_PURE_PYTHON")
        importlib.reload(kernels)

"""CART decision tree (Gini) and a bagged random forest built on it."""

from __future__ import annotations

import numpy as np

from .. import kernels


class DecisionTree:
    """Binary classification tree; the score of a leaf is its positive fraction.

    Nodes live in flat arrays (``feature == -1`` marks a leaf). An impure
    node is split even when the best split does not lower impurity, so with
    no depth limit and ``min_leaf=1`` distinct rows end up in pure leaves.
    """

    def __init__(self, max_depth=None, min_leaf=1, feature_fraction=1.0):
        self.max_depth = max_depth
        self.min_leaf = int(min_leaf)
        self.feature_fraction = float(feature_fraction)

    def fit(self, X, y, rng=None, rows=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        yf = np.ascontiguousarray(y, dtype=np.float64)
        rng = rng if rng is not None else np.random.default_rng(0)
        n_features = X.shape[1]
        n_try = max(1, int(round(self.feature_fraction * n_features)))
        all_features = np.arange(n_features, dtype=np.intp)
        rows = np.arange(X.shape[0], dtype=np.intp) if rows is None else np.asarray(rows, dtype=np.intp)
        feature, threshold, left, right, value, count = [], [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(float(yf[idx].mean()) if len(idx) else 0.0)
            count.append(len(idx))
            return len(feature) - 1

        root = new_node(rows)
        stack = [(root, rows, 0)]
        while stack:
            node, idx, depth = stack.pop()
            pos = value[node]
            if pos == 0.0 or pos == 1.0:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            if n_try < n_features:
                feats = np.sort(rng.choice(n_features, size=n_try, replace=False)).astype(np.intp)
            else:
                feats = all_features
            f, thr, _ = kernels.best_split(X, yf, idx, feats, self.min_leaf)
            if f < 0:
                continue
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            feature[node] = f
            threshold[node] = thr
            left[node] = new_node(li)
            right[node] = new_node(ri)
            stack.append((right[node], ri, depth + 1))
            stack.append((left[node], li, depth + 1))

        self.feature_ = np.array(feature, dtype=np.intp)
        self.threshold_ = np.array(threshold, dtype=np.float64)
        self.left_ = np.array(left, dtype=np.intp)
        self.right_ = np.array(right, dtype=np.intp)
        self.value_ = np.array(value, dtype=np.float64)
        self.count_ = np.array(count, dtype=np.intp)
        return self

    def apply(self, X):
        return kernels.tree_apply(self.feature_, self.threshold_, self.left_, self.right_, X)

    def predict_proba(self, X):
        return self.value_[self.apply(X)]

    @property
    def n_nodes(self):
        return len(self.feature_)

    def params(self):
        return {"n_nodes": int(self.n_nodes), "n_leaves": int((self.feature_ < 0).sum())}


class RandomForest:
    """Mean of tree scores; each tree sees a bootstrap sample and, per node,
    a random ``feature_fraction`` of the features."""

    def __init__(self, n_trees=100, max_depth=None, feature_fraction=1.0, min_leaf=1, bootstrap=True):
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.feature_fraction = float(feature_fraction)
        self.min_leaf = int(min_leaf)
        self.bootstrap = bool(bootstrap)

    def fit(self, X, y, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        X = np.ascontiguousarray(X, dtype=np.float64)
        n = X.shape[0]
        self.trees_ = []
        for seed in rng.integers(0, 2**63 - 1, size=self.n_trees):
            trng = np.random.default_rng(int(seed))
            rows = np.sort(trng.integers(0, n, size=n)) if self.bootstrap else None
            tree = DecisionTree(self.max_depth, self.min_leaf, self.feature_fraction)
            self.trees_.append(tree.fit(X, y, rng=trng, rows=rows))
        return self

    def predict_proba(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        return np.mean([t.predict_proba(X) for t in self.trees_], axis=0)

    def params(self):
        return {"n_trees": len(self.trees_), "total_nodes": int(sum(t.n_nodes for t in self.trees_))}

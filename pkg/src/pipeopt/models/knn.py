"""k-nearest-neighbour classifier; score is the positive share of the k neighbours."""

from __future__ import annotations

import numpy as np

from .. import kernels


class KNearestNeighbors:
    def __init__(self, k=5):
        self.k = int(k)

    def fit(self, X, y, rng=None):
        self.X_ = np.ascontiguousarray(X, dtype=np.float64)
        self.y_ = np.asarray(y, dtype=np.float64)
        self.k_ = min(self.k, len(self.y_))
        return self

    def predict_proba(self, X):
        nn = kernels.knn_indices(self.X_, X, self.k_)
        return self.y_[nn].mean(axis=1)

    def params(self):
        return {"k_effective": self.k_, "n_reference": int(len(self.y_))}

"""Gaussian naive Bayes."""

from __future__ import annotations

import numpy as np
from scipy.special import expit


class GaussianNB:
    def __init__(self, var_smoothing=1e-9):
        self.var_smoothing = float(var_smoothing)

    def fit(self, X, y, rng=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        eps = self.var_smoothing * max(float(X.var(axis=0).max(initial=0.0)), 1e-300)
        self.mean_ = np.zeros((2, X.shape[1]))
        self.var_ = np.ones((2, X.shape[1]))
        self.log_prior_ = np.full(2, -np.inf)
        for c in (0, 1):
            Xc = X[y == c]
            if len(Xc):
                self.mean_[c] = Xc.mean(axis=0)
                self.var_[c] = Xc.var(axis=0) + eps
                self.log_prior_[c] = np.log(len(Xc) / len(X))
        return self

    def _joint_log_likelihood(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            ll = -0.5 * np.sum(np.log(2 * np.pi * self.var_[c]) + (X - self.mean_[c]) ** 2 / self.var_[c], axis=1)
            out[:, c] = self.log_prior_[c] + ll
        return out

    def predict_proba(self, X):
        jll = self._joint_log_likelihood(X)
        with np.errstate(invalid="ignore"):
            diff = jll[:, 1] - jll[:, 0]
        # both classes impossible cannot happen after fit; guard inf - inf anyway
        return expit(np.nan_to_num(diff, nan=0.0))

    def params(self):
        return {"mean": self.mean_.tolist(), "var": self.var_.tolist(), "log_prior": self.log_prior_.tolist()}

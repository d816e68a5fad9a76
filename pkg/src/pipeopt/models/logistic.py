"""L2-regularised logistic regression fitted by batch gradient descent."""

from __future__ import annotations

import numpy as np
from scipy.special import expit


def loss_and_grad(w, X, y, l2):
    """Mean log-loss plus ``l2/2 * ||w[1:]||^2``; ``w[0]`` is the intercept."""
    z = w[0] + X @ w[1:]
    # log(1 + exp(z)) - y*z, written stably
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w[1:] @ w[1:])
    r = expit(z) - y
    g = np.empty_like(w)
    g[0] = r.mean()
    g[1:] = X.T @ r / len(y) + l2 * w[1:]
    return float(loss), g


class LogisticRegression:
    def __init__(self, l2=1e-2, max_iter=1000, tol=1e-6):
        self.l2 = float(l2)
        self.max_iter = int(max_iter)
        self.tol = float(tol)

    def fit(self, X, y, rng=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        w = np.zeros(X.shape[1] + 1)
        loss, g = loss_and_grad(w, X, y, self.l2)
        step = 1.0
        self.n_iter_ = 0
        for it in range(self.max_iter):
            gn2 = g @ g
            if np.sqrt(gn2) < self.tol:
                break
            # Armijo backtracking from a Barzilai-Borwein trial step
            while True:
                w_new = w - step * g
                loss_new, g_new = loss_and_grad(w_new, X, y, self.l2)
                if loss_new <= loss - 1e-4 * step * gn2 or step < 1e-12:
                    break
                step *= 0.5
            s_k, y_k = w_new - w, g_new - g
            sy = s_k @ y_k
            step = (s_k @ s_k) / sy if sy > 1e-300 else 2.0 * step
            w, loss, g = w_new, loss_new, g_new
            self.n_iter_ = it + 1
        self.coef_ = w[1:].copy()
        self.intercept_ = float(w[0])
        self.grad_norm_ = float(np.sqrt(g @ g))
        return self

    def decision_function(self, X):
        return self.intercept_ + np.asarray(X, dtype=np.float64) @ self.coef_

    def predict_proba(self, X):
        return expit(self.decision_function(X))

    def params(self):
        return {"intercept": self.intercept_, "coef": self.coef_.tolist(), "iterations": self.n_iter_}

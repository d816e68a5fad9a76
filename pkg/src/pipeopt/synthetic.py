"""Synthetic imbalanced datasets with a planted linear signal."""

from __future__ import annotations

import numpy as np

from .data import ColumnSchema, TabularDataset


def make_classification(
    n_rows: int = 2000,
    n_features: int = 25,
    positive_ratio: float = 0.2,
    n_informative: int = 5,
    missing_rate: float = 0.2,
    noise: float = 0.5,
    n_categorical: int = 0,
    seed: int = 0,
) -> TabularDataset:
    """Gaussian features; the label is 1 for the rows with the highest
    ``x[:, :n_informative] @ w + noise`` so that positives/negatives equals
    ``positive_ratio`` (up to rounding). Cells then go missing completely at
    random with probability ``missing_rate``.

    The last ``n_categorical`` columns are uninformative categoricals with
    three levels.
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_rows, n_features))
    w = np.linspace(1.0, 2.0, n_informative)
    latent = X[:, :n_informative] @ w / np.sqrt(w @ w) + noise * rng.normal(size=n_rows)
    n_pos = int(round(n_rows * positive_ratio / (1 + positive_ratio)))
    order = np.argsort(-latent, kind="stable")
    y = np.zeros(n_rows, dtype=np.int8)
    y[order[:n_pos]] = 1
    schema = [ColumnSchema(f"x{j}", "numeric") for j in range(n_features - n_categorical)]
    if n_categorical:
        X[:, n_features - n_categorical:] = rng.integers(0, 3, size=(n_rows, n_categorical))
        schema += [ColumnSchema(f"c{j}", "categorical", ("a", "b", "c")) for j in range(n_categorical)]
    X[rng.random(X.shape) < missing_rate] = np.nan
    return TabularDataset(tuple(schema), X, y, np.arange(n_rows), ("negative", "positive"), "label")

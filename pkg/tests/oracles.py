"""Independent reference implementations used only by the tests."""

import numpy as np
from scipy import stats


def prcc_by_inversion(X, y):
    """Partial rank correlations from the inverse Spearman correlation matrix."""
    data = np.column_stack([X, y])
    C = stats.spearmanr(data).statistic
    if np.ndim(C) == 0:
        C = np.array([[1.0, C], [C, 1.0]])
    P = np.linalg.inv(C)
    k = data.shape[1] - 1
    return np.array([-P[i, k] / np.sqrt(P[i, i] * P[k, k]) for i in range(k)])


def lhs_counts_ok(indices, step_sizes):
    n = indices.shape[0]
    for s, N in enumerate(step_sizes):
        counts = np.bincount(indices[:, s], minlength=N)
        if not set(counts.tolist()) <= {n // N, -(-n // N)}:
            return False
    return True

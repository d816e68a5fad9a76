"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""

from __future__ import annotations

import numpy as np


def best_split(X, y, rows, features, min_leaf):
    n = len(rows)
    if n < 2 * min_leaf or n < 2:
        return -1, 0.0, 0.0
    n_d = float(n)
    yr = y[rows]
    total_pos = float(yr.sum())
    parent = (total_pos * total_pos + (n_d - total_pos) * (n_d - total_pos)) / n_d

    best_score = -np.inf
    best_feature = -1
    best_threshold = 0.0
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n_d - n_left
    sizes_ok = (n_left >= min_leaf) & (n_right >= min_leaf)
    for f in features:
        v = X[rows, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        pos_left = np.cumsum(yr[order])[:-1]
        valid = sizes_ok & (vs[:-1] != vs[1:])
        if not valid.any():
            continue
        pos_right = total_pos - pos_left
        score = ((pos_left * pos_left + (n_left - pos_left) * (n_left - pos_left)) / n_left
                 + (pos_right * pos_right + (n_right - pos_right) * (n_right - pos_right)) / n_right)
        score[~valid] = -np.inf
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_score = float(score[i])
            best_feature = int(f)
            thr = 0.5 * (vs[i] + vs[i + 1])
            if thr >= vs[i + 1]:
                thr = vs[i]
            best_threshold = float(thr)
    if best_feature < 0:
        return -1, 0.0, 0.0
    return best_feature, best_threshold, (best_score - parent) / n_d


def knn_indices(ref, query, k, exclude_self=False):
    n_ref = ref.shape[0]
    avail = n_ref - 1 if exclude_self else n_ref
    if k < 1 or k > avail:
        raise ValueError(f"k={k} out of range for {avail} reference rows")
    out = np.empty((query.shape[0], k), dtype=np.intp)
    # chunked to bound the distance matrix size
    step = max(1, 2_000_000 // max(n_ref, 1))
    for start in range(0, query.shape[0], step):
        q = query[start:start + step]
        diff = q[:, None, :] - ref[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        if exclude_self:
            rows = np.arange(q.shape[0])
            dist[rows, rows + start] = np.inf
        # stable sort keeps the lower index first among equal distances
        out[start:start + step] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def tree_apply(feature, threshold, left, right, X):
    node = np.zeros(X.shape[0], dtype=np.intp)
    active = feature[node] >= 0
    while active.any():
        idx = np.flatnonzero(active)
        cur = node[idx]
        go_left = X[idx, feature[cur]] <= threshold[cur]
        node[idx] = np.where(go_left, left[cur], right[cur])
        active = feature[node] >= 0
    return node


def k_smallest(D, k):
    m = D.shape[1]
    if k < 1 or k > m:
        raise ValueError(f"k={k} out of range for {m} columns")
    return np.argsort(D, axis=1, kind="stable")[:, :k].astype(np.intp)

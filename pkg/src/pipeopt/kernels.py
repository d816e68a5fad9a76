"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled module is used when it was built at install time. Setting
``PIPEOPT_PURE_PYTHON=1`` in the environment forces the fallback.

Kernels
-------
best_split(X, y, rows, features, min_leaf)
    Best Gini split over the listed features for the given row subset.
knn_indices(ref, query, k, exclude_self=False)
    ``k`` nearest reference rows per query row (squared Euclidean).
tree_apply(feature, threshold, left, right, X)
    Leaf reached by each row in an array-encoded binary tree.
k_smallest(D, k)
    Per row, column indices of the ``k`` smallest entries (lower index wins ties).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("PIPEOPT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _ip(a):
    return np.ascontiguousarray(a, dtype=np.intp)


def best_split(X, y, rows, features, min_leaf=1, impl=None):
    impl = impl or _impl
    return impl.best_split(_f64(X), _f64(y), _ip(rows), _ip(features), int(min_leaf))


def knn_indices(ref, query, k, exclude_self=False, impl=None):
    impl = impl or _impl
    return impl.knn_indices(_f64(ref), _f64(query), int(k), bool(exclude_self))


def tree_apply(feature, threshold, left, right, X, impl=None):
    impl = impl or _impl
    return impl.tree_apply(_ip(feature), _f64(threshold), _ip(left), _ip(right), _f64(X))


def k_smallest(D, k, impl=None):
    impl = impl or _impl
    return impl.k_smallest(_f64(D), int(k))


def available_backends():
    """Map of backend name to implementation module, compiled one only if built."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

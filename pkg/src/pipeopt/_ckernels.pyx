# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for tree induction and nearest-neighbour search.

Semantics match :mod:`pipeopt._pykernels` exactly; the test suite checks
both backends against each other.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cnp.import_array()


cdef struct Pair:
    double value
    double label


cdef inline void _swap(Pair* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Pair t = a[i]
    a[i] = a[j]
    a[j] = t


cdef void _sort_pairs(Pair* a, Py_ssize_t n) noexcept nogil:
    """In-place sort by value: quicksort (median of three) down to short runs,
    then insertion sort. Order among equal values is irrelevant to callers."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot
    cdef Pair key
    while hi - lo > 16:
        mid = lo + (hi - lo) // 2
        if a[mid].value < a[lo].value:
            _swap(a, mid, lo)
        if a[hi].value < a[lo].value:
            _swap(a, hi, lo)
        if a[hi].value < a[mid].value:
            _swap(a, hi, mid)
        pivot = a[mid].value
        i = lo
        j = hi
        while i <= j:
            while a[i].value < pivot:
                i += 1
            while a[j].value > pivot:
                j -= 1
            if i <= j:
                _swap(a, i, j)
                i += 1
                j -= 1
        # recurse into the smaller side, loop on the larger
        if j - lo < hi - i:
            _sort_pairs(a + lo, j - lo + 1)
            lo = i
        else:
            _sort_pairs(a + i, hi - i + 1)
            hi = j
    for i in range(lo + 1, hi + 1):
        key = a[i]
        j = i - 1
        while j >= lo and a[j].value > key.value:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


def best_split(double[:, ::1] X, double[::1] y, cnp.intp_t[::1] rows,
               cnp.intp_t[::1] features, Py_ssize_t min_leaf):
    """Return ``(feature, threshold, gain)`` of the best Gini split.

    ``feature`` is -1 when no split leaves ``min_leaf`` rows on both sides.
    Ties keep the first feature in ``features`` and the lowest threshold.
    """
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t nf = features.shape[0]
    cdef Py_ssize_t i, j, f
    cdef double total_pos = 0.0
    cdef double n_d = <double>n
    cdef double parent, score, pos_left, n_left, n_right, pos_right
    cdef double best_score = -INFINITY
    cdef Py_ssize_t best_feature = -1
    cdef double best_threshold = 0.0
    cdef double thr
    cdef Pair* buf

    if n < 2 * min_leaf or n < 2:
        return -1, 0.0, 0.0

    for i in range(n):
        total_pos += y[rows[i]]
    parent = (total_pos * total_pos + (n_d - total_pos) * (n_d - total_pos)) / n_d

    buf = <Pair*>malloc(n * sizeof(Pair))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(nf):
                f = features[j]
                for i in range(n):
                    buf[i].value = X[rows[i], f]
                    buf[i].label = y[rows[i]]
                _sort_pairs(buf, n)
                pos_left = 0.0
                for i in range(n - 1):
                    pos_left += buf[i].label
                    if buf[i].value == buf[i + 1].value:
                        continue
                    n_left = <double>(i + 1)
                    n_right = n_d - n_left
                    if i + 1 < min_leaf or n - i - 1 < min_leaf:
                        continue
                    pos_right = total_pos - pos_left
                    score = ((pos_left * pos_left + (n_left - pos_left) * (n_left - pos_left)) / n_left
                             + (pos_right * pos_right + (n_right - pos_right) * (n_right - pos_right)) / n_right)
                    if score > best_score:
                        best_score = score
                        best_feature = f
                        thr = 0.5 * (buf[i].value + buf[i + 1].value)
                        if thr >= buf[i + 1].value:
                            thr = buf[i].value
                        best_threshold = thr
    finally:
        free(buf)

    if best_feature < 0:
        return -1, 0.0, 0.0
    return int(best_feature), float(best_threshold), float((best_score - parent) / n_d)


def knn_indices(double[:, ::1] ref, double[:, ::1] query, Py_ssize_t k,
                bint exclude_self=False):
    """Indices of the ``k`` nearest ``ref`` rows for every ``query`` row.

    Squared Euclidean distance; equal distances resolve to the lower index.
    With ``exclude_self`` the query is assumed to be ``ref`` and row ``i``
    never lists itself.
    """
    cdef Py_ssize_t n_ref = ref.shape[0]
    cdef Py_ssize_t n_q = query.shape[0]
    cdef Py_ssize_t d = ref.shape[1]
    cdef Py_ssize_t avail = n_ref - 1 if exclude_self else n_ref
    if k < 1 or k > avail:
        raise ValueError(f"k={k} out of range for {avail} reference rows")
    out_arr = np.empty((n_q, k), dtype=np.intp)
    cdef cnp.intp_t[:, ::1] out = out_arr
    cdef double* best_d = <double*>malloc(k * sizeof(double))
    cdef Py_ssize_t* best_i = <Py_ssize_t*>malloc(k * sizeof(Py_ssize_t))
    cdef Py_ssize_t q, r, c, filled, pos
    cdef double dist, diff
    if best_d == NULL or best_i == NULL:
        free(best_d)
        free(best_i)
        raise MemoryError()
    try:
        with nogil:
            for q in range(n_q):
                filled = 0
                for r in range(n_ref):
                    if exclude_self and r == q:
                        continue
                    dist = 0.0
                    for c in range(d):
                        diff = ref[r, c] - query[q, c]
                        dist = dist + diff * diff
                    # r increases monotonically, so strict < keeps lower index on ties
                    if filled == k and dist >= best_d[k - 1]:
                        continue
                    pos = filled if filled < k else k - 1
                    while pos > 0 and best_d[pos - 1] > dist:
                        if pos < k:
                            best_d[pos] = best_d[pos - 1]
                            best_i[pos] = best_i[pos - 1]
                        pos -= 1
                    best_d[pos] = dist
                    best_i[pos] = r
                    if filled < k:
                        filled += 1
                for c in range(k):
                    out[q, c] = best_i[c]
    finally:
        free(best_d)
        free(best_i)
    return out_arr


def tree_apply(cnp.intp_t[::1] feature, double[::1] threshold,
               cnp.intp_t[::1] left, cnp.intp_t[::1] right, double[:, ::1] X):
    """Leaf node index reached by every row of ``X``."""
    cdef Py_ssize_t n = X.shape[0]
    out_arr = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] out = out_arr
    cdef Py_ssize_t i, node
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
    return out_arr


def k_smallest(double[:, ::1] D, Py_ssize_t k):
    """Column indices of the ``k`` smallest entries of each row of ``D``,
    ascending; equal values resolve to the lower index."""
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t m = D.shape[1]
    if k < 1 or k > m:
        raise ValueError(f"k={k} out of range for {m} columns")
    out_arr = np.empty((n, k), dtype=np.intp)
    cdef cnp.intp_t[:, ::1] out = out_arr
    cdef double* best_d = <double*>malloc(k * sizeof(double))
    cdef Py_ssize_t* best_i = <Py_ssize_t*>malloc(k * sizeof(Py_ssize_t))
    cdef Py_ssize_t q, r, c, filled, pos
    cdef double dist
    if best_d == NULL or best_i == NULL:
        free(best_d)
        free(best_i)
        raise MemoryError()
    try:
        with nogil:
            for q in range(n):
                filled = 0
                for r in range(m):
                    dist = D[q, r]
                    if filled == k and not (dist < best_d[k - 1]):
                        continue
                    pos = filled if filled < k else k - 1
                    while pos > 0 and best_d[pos - 1] > dist:
                        best_d[pos] = best_d[pos - 1]
                        best_i[pos] = best_i[pos - 1]
                        pos -= 1
                    best_d[pos] = dist
                    best_i[pos] = r
                    if filled < k:
                        filled += 1
                for c in range(k):
                    out[q, c] = best_i[c]
    finally:
        free(best_d)
        free(best_i)
    return out_arr

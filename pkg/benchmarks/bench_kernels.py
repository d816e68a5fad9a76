"""Time each kernel under the compiled and the numpy backend.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Outputs are checked for equality before timing, so a speedup is never
reported for diverging results.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from pipeopt import kernels
from pipeopt.models.tree import DecisionTree


def cases(rng):
    X = rng.normal(size=(2000, 25))
    y = (rng.random(2000) < 0.2).astype(np.float64)
    rows = np.arange(2000)
    feats = np.arange(25)
    ref = rng.normal(size=(1500, 25))
    query = rng.normal(size=(600, 25))
    D = rng.random((1000, 800))
    tree = DecisionTree(max_depth=12).fit(X, y)
    small = np.arange(60)

    def fit_tree(impl):
        # whole-model timing: route the module-level kernel through ``impl``
        saved = kernels._impl
        kernels._impl = impl
        try:
            t = DecisionTree(max_depth=12).fit(X, y)
        finally:
            kernels._impl = saved
        return t.feature_
    Xt = rng.normal(size=(20000, 25))
    return {
        "best_split (2000x25)": lambda impl: kernels.best_split(X, y, rows, feats, 1, impl=impl),
        "best_split (60x25, typical inner node)": lambda impl: kernels.best_split(X, y, small, feats, 1, impl=impl),
        "DecisionTree.fit (2000x25, depth 12)": fit_tree,
        "knn_indices (600 q, 1500 ref, k=5)": lambda impl: kernels.knn_indices(ref, query, 5, impl=impl),
        "knn_indices self (1500, k=5)": lambda impl: kernels.knn_indices(ref, ref, 5, True, impl=impl),
        "k_smallest (1000x800, k=5)": lambda impl: kernels.k_smallest(D, 5, impl=impl),
        f"tree_apply ({tree.n_nodes} nodes, 20000 rows)": lambda impl: kernels.tree_apply(
            tree.feature_, tree.threshold_, tree.left_, tree.right_, Xt, impl=impl),
    }


def same(a, b):
    if isinstance(a, tuple):
        return a == b
    return np.array_equal(a, b)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy fallback is available", file=sys.stderr)
    rng = np.random.default_rng(0)
    results = []
    print(f"{'kernel':<44} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, fn in cases(rng).items():
        outs = {b: fn(impl) for b, impl in backends.items()}
        if len(outs) == 2 and not same(outs["cython"], outs["python"]):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        times = {}
        for b, impl in backends.items():
            number = 3
            times[b] = min(timeit.repeat(lambda: fn(impl), number=number, repeat=args.repeat)) / number
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        results.append({"kernel": name, "seconds": times, "speedup": speedup})
        print(f"{name:<44} " + " ".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends) + f"   {speedup:6.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

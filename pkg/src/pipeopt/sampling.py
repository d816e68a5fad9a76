"""Discrete Latin Hypercube Sampling over pipeline index space."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LhsDesign:
    step_sizes: tuple[int, ...]
    n_samples: int
    seed: int
    samples: np.ndarray  # n_samples x n_stages continuous draws, x in [0, N_s)
    indices: np.ndarray  # floor of samples
    attempts: int = 1
    duplicates: int = 0
    warnings: tuple[str, ...] = field(default=())

    @property
    def specs(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.indices]


def default_n_samples(step_sizes: Sequence[int]) -> int:
    return min(4 * max(step_sizes), math.prod(step_sizes))


def _draw(step_sizes, n, rng):
    x = np.empty((n, len(step_sizes)))
    idx = np.empty((n, len(step_sizes)), dtype=np.int64)
    j = np.arange(n)
    for s, size in enumerate(step_sizes):
        w = size / n
        # jitter stays inside the method cell holding the stratum centre, so
        # per-method counts are balanced as well as stratified
        cell = np.minimum(np.floor((j + 0.5) * w).astype(np.int64), size - 1)
        lo = np.maximum(j * w, cell)
        hi = np.minimum((j + 1) * w, cell + 1)
        strata = rng.permutation(n)
        u = rng.random(n)
        x[:, s] = lo[strata] + u * (hi - lo)[strata]
        idx[:, s] = cell[strata]
    return x, idx


def _n_duplicates(idx):
    return idx.shape[0] - np.unique(idx, axis=0).shape[0]


def lhs_design(step_sizes: Sequence[int], n_samples: int | None = None, seed: int = 0,
               max_attempts: int = 50) -> LhsDesign:
    """Stratified draws ``x_s`` in ``[0, N_s)``, one per equiprobable stratum.

    Each stage uses its own seed-determined permutation of strata. A design
    with repeated index tuples is redrawn whole (which keeps every stage
    stratified) up to ``max_attempts`` times; the draw with the fewest
    repeats is kept, with a warning if any remain.
    """
    step_sizes = tuple(int(v) for v in step_sizes)
    if not step_sizes or min(step_sizes) < 1:
        raise ValueError(f"every stage needs at least one method, got {step_sizes}")
    if n_samples is None:
        n_samples = default_n_samples(step_sizes)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    attempts = 0
    for attempts in range(1, max_attempts + 1):
        x, idx = _draw(step_sizes, n_samples, rng)
        dups = _n_duplicates(idx)
        if best is None or dups < best[2]:
            best = (x, idx, dups)
        if dups == 0:
            break
    x, idx, dups = best
    warnings = ()
    if dups:
        msg = f"LHS design kept {dups} duplicate pipeline(s) after {attempts} draws"
        log.warning(msg)
        warnings = (msg,)
    x.setflags(write=False)
    idx.setflags(write=False)
    return LhsDesign(step_sizes, n_samples, seed, x, idx, attempts, dups, warnings)


def lhs_pipelines(step_sizes: Sequence[int], n_samples: int | None = None, seed: int = 0) -> list[tuple[int, ...]]:
    return lhs_design(step_sizes, n_samples, seed).specs

"""Rank transform and partial rank correlation coefficients (PRCC).

For each input column the PRCC is the Pearson correlation between two
residual vectors: the rank of that input regressed on the ranks of the
other inputs, and the rank of the output regressed on the same columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

_RANK_TOL = 1e-10


class SensitivityError(ValueError):
    pass


def rank_transform(columns) -> np.ndarray:
    """Per-column ranks 1..n with average ranks for ties.

    Accepts a 1-D vector (returned 1-D) or an n x k matrix.
    """
    a = np.asarray(columns, dtype=np.float64)
    one_d = a.ndim == 1
    if one_d:
        a = a[:, None]
    n = a.shape[0]
    if n < 3:
        raise SensitivityError(f"rank transform needs n >= 3, got {n}")
    out = np.empty_like(a)
    for j in range(a.shape[1]):
        col = a[:, j]
        order = np.argsort(col, kind="mergesort")
        sc = col[order]
        # boundaries of runs of equal values
        starts = np.flatnonzero(np.r_[True, sc[1:] != sc[:-1]])
        stops = np.r_[starts[1:], n]
        avg = 0.5 * (starts + 1 + stops)
        out[order, j] = np.repeat(avg, stops - starts)
    return out[:, 0] if one_d else out


@dataclass(frozen=True)
class PrccReport:
    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    degenerate: tuple[bool, ...]
    influence_rank: tuple[int, ...]  # 1 = largest |coefficient|; degenerate stages ranked last
    n_rows: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def all_degenerate(self) -> bool:
        return all(self.degenerate)

    def as_rows(self) -> list[dict]:
        return [
            {"stage": n, "coefficient": c, "influence_rank": r, "degenerate": d}
            for n, c, r, d in zip(self.names, self.coefficients, self.influence_rank, self.degenerate)
        ]

    def to_text(self) -> str:
        lines = [f"{'stage':<12} {'PRCC':>9} {'rank':>5}  flag"]
        for row in self.as_rows():
            flag = "degenerate" if row["degenerate"] else ""
            lines.append(f"{row['stage']:<12} {row['coefficient']:>9.4f} {row['influence_rank']:>5}  {flag}")
        return "\n".join(lines)


def _independent_columns(Z: np.ndarray) -> list[int]:
    """Greedy left-to-right column selection; a column that adds no rank is dropped."""
    keep: list[int] = []
    scale = max(1.0, float(np.abs(Z).max(initial=0.0)))
    for j in range(Z.shape[1]):
        trial = Z[:, keep + [j]]
        r = np.linalg.qr(trial, mode="r")
        if abs(r[-1, -1]) > _RANK_TOL * scale * np.sqrt(Z.shape[0]):
            keep.append(j)
    return keep


def _residual(target: np.ndarray, covariates: np.ndarray) -> np.ndarray:
    """Least-squares residual of ``target`` on ``[1, covariates]``."""
    A = np.column_stack([np.ones(target.shape[0]), covariates])
    A = A[:, _independent_columns(A)]
    # column-pivoted QR is rank revealing; the selected columns are full rank
    q, r, _ = scipy.linalg.qr(A, mode="economic", pivoting=True)
    return target - q @ (q.T @ target)


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    a = a - a.mean()
    b = b - b.mean()
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    if na <= _RANK_TOL * np.sqrt(a.size) or nb <= _RANK_TOL * np.sqrt(b.size):
        return None
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


def _influence_ranks(coefs, degenerate):
    k = len(coefs)
    order = sorted(range(k), key=lambda i: (degenerate[i], -abs(coefs[i]), i))
    ranks = [0] * k
    for pos, i in enumerate(order, start=1):
        ranks[i] = pos
    return tuple(ranks)


def prcc(X, y, names: Sequence[str] | None = None) -> PrccReport:
    """Partial rank correlation of every column of ``X`` with ``y``.

    Constant columns are excluded from all regressions and get coefficient 0
    with the degenerate flag set; so does a column that the other columns
    explain exactly. A constant ``y`` makes every column degenerate.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise SensitivityError(f"y must have {n} entries")
    if names is None:
        names = tuple(f"x{i}" for i in range(k))
    names = tuple(names)
    if n < k + 3:
        raise SensitivityError(f"PRCC needs n >= k + 3 rows ({k + 3}), got {n}")
    constant = [bool(np.all(X[:, i] == X[0, i])) for i in range(k)]
    if all(constant):
        raise SensitivityError("all input columns are constant")
    warnings: list[str] = []
    RX = rank_transform(X)
    ry = rank_transform(y)
    live = [i for i in range(k) if not constant[i]]
    coefs = [0.0] * k
    degenerate = list(constant)
    y_constant = bool(np.all(y == y[0]))
    if y_constant:
        warnings.append("output is constant; every coefficient set to 0")
        degenerate = [True] * k
    else:
        for i in live:
            others = RX[:, [j for j in live if j != i]]
            eps = _residual(RX[:, i], others)
            delta = _residual(ry, others)
            c = _pearson(eps, delta)
            if c is None:
                degenerate[i] = True
                warnings.append(f"{names[i]}: residual variance vanished, coefficient set to 0")
            else:
                coefs[i] = c
    for w in warnings:
        log.warning(w)
    return PrccReport(
        names=names,
        coefficients=tuple(coefs),
        degenerate=tuple(degenerate),
        influence_rank=_influence_ranks(coefs, degenerate),
        n_rows=n,
        warnings=tuple(warnings),
    )


def top_m(report: PrccReport, m: int) -> list[int]:
    """Indices of the ``m`` most influential non-degenerate columns.

    Sorted by |coefficient| descending, ties in column order. If fewer than
    ``m`` columns qualify all of them are returned and a warning is logged.
    """
    if m < 1:
        raise SensitivityError("m must be >= 1")
    candidates = [i for i, d in enumerate(report.degenerate) if not d]
    candidates.sort(key=lambda i: (-abs(report.coefficients[i]), i))
    if len(candidates) < m:
        log.warning("only %d non-degenerate stage(s) for m=%d", len(candidates), m)
    return candidates[:m]

"""Confusion-matrix and ranking metrics for binary classification.

All metric names used in configs are listed in :data:`METRIC_NAMES`.
Zero denominators contribute 0 (precision, recall, MCC) so every metric is
total on non-empty input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

METRIC_NAMES = (
    "balanced_accuracy",
    "f1_macro",
    "f_beta_0.5",
    "mcc",
    "sensitivity",
    "specificity",
    "auc",
)


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    tn: int
    fp: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp


def _binary(a, name):
    arr = np.asarray(a)
    if arr.ndim != 1:
        raise MetricError(f"{name} must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise MetricError(f"{name} contains non-binary values")
    return arr.astype(np.int64)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = _binary(y_true, "y_true")
    p = _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise MetricError(f"length mismatch: {t.size} labels vs {p.size} predictions")
    if t.size == 0:
        raise MetricError("empty input")
    tp = int(np.sum((t == 1) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    tn = int(np.sum((t == 0) & (p == 0)))
    fp = int(np.sum((t == 0) & (p == 1)))
    return ConfusionMatrix(tp=tp, fn=fn, tn=tn, fp=fp)


def _ratio(num, den):
    return num / den if den else 0.0


def sensitivity(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn)


def specificity(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tn, cm.tn + cm.fp)


def balanced_accuracy_from_rates(sens: float, spec: float) -> float:
    return (sens + spec) / 2.0


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    return balanced_accuracy_from_rates(sensitivity(cm), specificity(cm))


def _f_beta(tp, fp, fn, beta):
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    b2 = beta * beta
    den = b2 * precision + recall
    return (1 + b2) * precision * recall / den if den else 0.0


def f_beta(cm: ConfusionMatrix, beta: float) -> float:
    """F-beta of the positive class."""
    if beta <= 0:
        raise MetricError("beta must be positive")
    return _f_beta(cm.tp, cm.fp, cm.fn, beta)


def f1_macro(cm: ConfusionMatrix) -> float:
    # negative class: its tp is tn, its fp is fn, its fn is fp
    pos = _f_beta(cm.tp, cm.fp, cm.fn, 1.0)
    neg = _f_beta(cm.tn, cm.fn, cm.fp, 1.0)
    return (pos + neg) / 2.0


def mcc(cm: ConfusionMatrix) -> float:
    tp, fn, tn, fp = (float(v) for v in (cm.tp, cm.fn, cm.tn, cm.fp))
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den)


def auc(y_true, scores) -> float:
    """ROC AUC via the Mann-Whitney rank statistic; ties get average ranks."""
    t = _binary(y_true, "y_true")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != t.shape:
        raise MetricError(f"length mismatch: {t.size} labels vs {s.size} scores")
    if t.size == 0:
        raise MetricError("empty input")
    n_pos = int(t.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC undefined: only one class present")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    ranks = np.empty(t.size, dtype=np.float64)
    start = 0
    while start < t.size:
        stop = start + 1
        while stop < t.size and sorted_s[stop] == sorted_s[start]:
            stop += 1
        ranks[order[start:stop]] = 0.5 * (start + 1 + stop)
        start = stop
    rank_sum = ranks[t == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def parse_metric(name: str) -> tuple[str, float | None]:
    """Validate a metric name; returns ``(kind, beta)``.

    ``f_beta_<b>`` is accepted for any positive ``b``.
    """
    if name in METRIC_NAMES and not name.startswith("f_beta"):
        return name, None
    if name.startswith("f_beta_"):
        try:
            beta = float(name[len("f_beta_"):])
        except ValueError:
            beta = float("nan")
        if beta > 0:
            return "f_beta", beta
    raise MetricError(f"unknown metric {name!r}; valid names: {', '.join(METRIC_NAMES)}")


def evaluate(kind: str, y_true, y_pred=None, scores=None) -> float:
    base, beta = parse_metric(kind)
    if base == "auc":
        if scores is None:
            raise MetricError("auc requires scores")
        return auc(y_true, scores)
    if y_pred is None:
        raise MetricError(f"{kind} requires predicted labels")
    cm = confusion(y_true, y_pred)
    if base == "balanced_accuracy":
        return balanced_accuracy(cm)
    if base == "sensitivity":
        return sensitivity(cm)
    if base == "specificity":
        return specificity(cm)
    if base == "f1_macro":
        return f1_macro(cm)
    if base == "mcc":
        return mcc(cm)
    return f_beta(cm, beta)


def metric_panel(y_true, y_pred, scores, names=METRIC_NAMES) -> dict[str, float]:
    """All requested metrics at once; AUC is NaN when only one class is present."""
    out = {}
    for name in names:
        try:
            out[name] = float(evaluate(name, y_true, y_pred, scores))
        except MetricError:
            if parse_metric(name)[0] != "auc":
                raise
            out[name] = float("nan")
    return out

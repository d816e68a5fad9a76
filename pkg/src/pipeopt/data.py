"""Tabular datasets with missing cells and binary labels.

Cells are stored in a float matrix: numeric columns hold their value,
categorical columns hold the index into the column's category list, and
missing cells are NaN. Datasets are immutable once built.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

DEFAULT_MISSING_TOKENS = ("", "NA", "NaN", "null")


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str  # "numeric" | "categorical"
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.categories:
                raise DataError(f"categorical column {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise DataError(f"categorical column {self.name!r} has duplicate categories")

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TabularDataset:
    schema: tuple[ColumnSchema, ...]
    values: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray
    label_names: tuple[str, str] = ("0", "1")
    label_column: str = "label"

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        values = _frozen(self.values, np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.schema):
            raise DataError(f"values shape {values.shape} does not match {len(self.schema)} columns")
        labels = _frozen(self.labels, np.int8)
        row_ids = _frozen(self.row_ids, np.int64)
        if labels.shape != (values.shape[0],) or row_ids.shape != labels.shape:
            raise DataError("labels and row_ids must have one entry per row")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise DataError("labels must be 0/1")
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        for j, col in enumerate(self.schema):
            if col.is_categorical:
                v = values[:, j]
                v = v[~np.isnan(v)]
                if v.size and ((v != np.round(v)).any() or v.min() < 0 or v.max() >= len(col.categories)):
                    raise DataError(f"column {col.name!r}: category code out of range")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def class_counts(self) -> tuple[int, int]:
        n_pos = int(self.labels.sum())
        return self.n_rows - n_pos, n_pos

    @property
    def class_ratio(self) -> float:
        """Positive/negative ratio (inf when there are no negatives)."""
        neg, pos = self.class_counts()
        return pos / neg if neg else math.inf

    def take(self, idx) -> "TabularDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return TabularDataset(
            schema=self.schema,
            values=self.values[idx],
            labels=self.labels[idx],
            row_ids=self.row_ids[idx],
            label_names=self.label_names,
            label_column=self.label_column,
        )

    def same_schema(self, other: "TabularDataset") -> bool:
        return self.schema == other.schema

    def summary(self) -> str:
        neg, pos = self.class_counts()
        lines = [
            f"rows: {self.n_rows}",
            f"columns: {self.n_cols}",
            f"label: {self.label_column} (positive={self.label_names[1]!r}, negative={self.label_names[0]!r})",
            f"class counts: {neg} negative, {pos} positive (ratio {self.class_ratio:.4f})",
            "missing per column:",
        ]
        miss = self.missing.sum(axis=0)
        width = max((len(c.name) for c in self.schema), default=0)
        for col, m in zip(self.schema, miss):
            extra = f" [{len(col.categories)} categories]" if col.is_categorical else ""
            lines.append(f"  {col.name:<{width}}  {col.kind:<11} {int(m)}{extra}")
        return "\n".join(lines)


@dataclass(frozen=True)
class SplitPair:
    train: TabularDataset
    test: TabularDataset


def _parse_float(tok: str):
    try:
        v = float(tok)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(
    path,
    label_column: str,
    type_hints: Mapping[str, str] | None = None,
    missing_tokens: Sequence[str] = DEFAULT_MISSING_TOKENS,
    positive_label: str | None = None,
    drop_missing_labels: bool = False,
) -> TabularDataset:
    """Read a CSV with a header row into a :class:`TabularDataset`.

    Columns without a hint are numeric when every non-missing cell parses as
    a finite number, categorical otherwise (categories sorted as strings).
    The minority label becomes the positive class unless ``positive_label``
    is given; on equal counts the lexicographically larger label is positive.
    """
    path = Path(path)
    type_hints = dict(type_hints or {})
    missing = set(missing_tokens)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not found")
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(r)} fields, expected {len(header)}")
    for name, kind in type_hints.items():
        if name not in header:
            raise DataError(f"type hint for unknown column {name!r}")
        if kind not in ("numeric", "categorical"):
            raise DataError(f"type hint for {name!r} must be numeric or categorical")

    li = header.index(label_column)
    raw_labels = [r[li].strip() for r in body]
    bad = [i + 2 for i, v in enumerate(raw_labels) if v in missing]
    if bad and not drop_missing_labels:
        raise DataError(f"{path}: {len(bad)} row(s) with missing label (lines {bad[:10]})")
    keep = [i for i, v in enumerate(raw_labels) if v not in missing]
    body = [body[i] for i in keep]
    raw_labels = [raw_labels[i] for i in keep]
    distinct = sorted(set(raw_labels))
    if len(distinct) > 2:
        raise DataError(f"{path}: more than two label values in {label_column!r}: {distinct[:5]}")
    if len(distinct) < 2:
        raise DataError(f"{path}: label column {label_column!r} needs exactly two distinct values")
    if positive_label is not None:
        if positive_label not in distinct:
            raise DataError(f"positive label {positive_label!r} not among {distinct}")
        pos = positive_label
    else:
        c0, c1 = (raw_labels.count(v) for v in distinct)
        pos = distinct[0] if c0 < c1 else distinct[1]
    neg = distinct[0] if distinct[1] == pos else distinct[1]
    labels = np.array([1 if v == pos else 0 for v in raw_labels], dtype=np.int8)

    feat_idx = [j for j in range(len(header)) if j != li]
    schema = []
    values = np.full((len(body), len(feat_idx)), np.nan)
    for out_j, j in enumerate(feat_idx):
        cells = [r[j].strip() for r in body]
        present = [c for c in cells if c not in missing]
        kind = type_hints.get(header[j])
        if kind is None:
            kind = "numeric" if all(_parse_float(c) is not None for c in present) else "categorical"
        if kind == "numeric":
            for i, c in enumerate(cells):
                if c in missing:
                    continue
                v = _parse_float(c)
                if v is None:
                    raise DataError(f"column {header[j]!r}: non-numeric value {c!r} in numeric column")
                values[i, out_j] = v
            schema.append(ColumnSchema(header[j], "numeric"))
        else:
            cats = tuple(sorted(set(present)))
            if not cats:
                raise DataError(f"categorical column {header[j]!r} has no observed values")
            code = {c: k for k, c in enumerate(cats)}
            for i, c in enumerate(cells):
                if c not in missing:
                    values[i, out_j] = code[c]
            schema.append(ColumnSchema(header[j], "categorical", cats))
    return TabularDataset(
        schema=tuple(schema),
        values=values,
        labels=labels,
        row_ids=np.arange(len(body)),
        label_names=(neg, pos),
        label_column=label_column,
    )


def write_csv(ds: TabularDataset, path, missing_token: str = "") -> None:
    """Write ``ds`` so that :func:`load_csv` reads it back identically."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([c.name for c in ds.schema] + [ds.label_column])
        for i in range(ds.n_rows):
            row = []
            for j, col in enumerate(ds.schema):
                v = ds.values[i, j]
                if np.isnan(v):
                    row.append(missing_token)
                elif col.is_categorical:
                    row.append(col.categories[int(v)])
                else:
                    row.append(repr(float(v)))
            row.append(ds.label_names[int(ds.labels[i])])
            w.writerow(row)


def allocate(counts: Sequence[int], fraction: float, minority: int) -> list[int]:
    """Split ``sum(counts)*fraction`` across classes by largest remainder.

    The total is rounded half up; remainder ties go to ``minority`` first,
    then lower class index.
    """
    total = sum(counts)
    target = math.floor(total * fraction + 0.5 + 1e-9)
    quotas = [c * fraction for c in counts]
    base = [min(c, math.floor(q + 1e-9)) for c, q in zip(counts, quotas)]
    rem = [q - b for q, b in zip(quotas, base)]
    order = sorted(range(len(counts)), key=lambda k: (-round(rem[k], 9), k != minority, k))
    left = target - sum(base)
    for k in order:
        if left <= 0:
            break
        if base[k] < counts[k]:
            base[k] += 1
            left -= 1
    return base


def _class_indices(ds: TabularDataset, rng: np.random.Generator):
    out = []
    for cls in (0, 1):
        idx = np.flatnonzero(ds.labels == cls)
        out.append(idx[rng.permutation(idx.size)])
    return out


def _minority(ds: TabularDataset) -> int:
    neg, pos = ds.class_counts()
    return 1 if pos <= neg else 0


def stratified_split(ds: TabularDataset, test_fraction: float, seed: int) -> SplitPair:
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must lie in (0, 1)")
    counts = ds.class_counts()
    if min(counts) < 2:
        raise DataError(f"stratified split needs >=2 rows per class, got {counts[0]} negative / {counts[1]} positive")
    rng = np.random.default_rng(seed)
    per_class = _class_indices(ds, rng)
    n_test = allocate(counts, test_fraction, _minority(ds))
    # both sides keep at least one row of each class
    n_test = [min(max(t, 1), c - 1) for t, c in zip(n_test, counts)]
    test_idx = np.concatenate([p[:t] for p, t in zip(per_class, n_test)])
    train_idx = np.concatenate([p[t:] for p, t in zip(per_class, n_test)])
    return SplitPair(train=ds.take(np.sort(train_idx)), test=ds.take(np.sort(test_idx)))


def subsample(ds: TabularDataset, fraction: float, seed: int) -> TabularDataset:
    """Stratified sample without replacement; allocation as in :func:`allocate`."""
    if not 0 < fraction <= 1:
        raise DataError("fraction must lie in (0, 1]")
    if fraction == 1:
        return ds
    counts = ds.class_counts()
    keep = allocate(counts, fraction, _minority(ds))
    if min(keep) < 1:
        raise DataError(f"subsample fraction {fraction} would leave a class empty (counts {counts} -> {keep})")
    rng = np.random.default_rng(seed)
    per_class = _class_indices(ds, rng)
    idx = np.concatenate([p[:k] for p, k in zip(per_class, keep)])
    return ds.take(np.sort(idx))

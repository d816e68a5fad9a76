"""The five preprocessing stages and fit/transform of a pipeline spec.

Stages run in a fixed order: imputation, balancing, feature engineering,
scaling, selection. All statistics are fitted on training rows only;
balancing touches training rows only and is skipped by :func:`transform`.

Balancing sits before encoding, so it works on the imputed matrix where
categorical columns hold their category code. SMOTE snaps interpolated
codes back to the nearest valid category.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import kernels
from .data import TabularDataset

STAGES = ("imputation", "balancing", "engineering", "scaling", "selection")

# name -> default parameters
METHODS: dict[str, dict[str, dict[str, Any]]] = {
    "imputation": {
        "mean": {},
        "median": {},
        "constant": {"fill_value": 0.0},
        "knn": {"k": 5},
    },
    "balancing": {
        "none": {},
        "random_oversample": {},
        "random_undersample": {},
        "smote": {"k": 5},
    },
    "engineering": {
        "ordinal": {},
        "onehot": {},
        "onehot_interactions": {},
    },
    "scaling": {
        "none": {},
        "zscore": {},
        "minmax": {},
        "robust": {},
    },
    "selection": {
        "none": {},
        "variance_threshold": {"threshold": 1e-8},
        "top_k_correlation": {"k": None},
        "top_k_mutual_info": {"k": None, "bins": 10},
    },
}

# what "skip" maps to for each stage
IDENTITY = {
    "balancing": "none",
    "engineering": "ordinal",
    "scaling": "none",
    "selection": "none",
}

_CONST_TOL = 1e-12


class CatalogError(ValueError):
    pass


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class MethodDescriptor:
    name: str
    params: tuple[tuple[str, Any], ...] = ()

    @property
    def kwargs(self) -> dict[str, Any]:
        return dict(self.params)

    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}({inner})"


@dataclass(frozen=True)
class StageCatalog:
    stages: tuple[tuple[MethodDescriptor, ...], ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.stages)

    def method(self, stage: int, index: int) -> MethodDescriptor:
        return self.stages[stage][index]

    def names(self, spec: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.stages[s][i].label() for s, i in enumerate(spec))

    def validate(self, spec: Sequence[int]) -> tuple[int, ...]:
        spec = tuple(int(i) for i in spec)
        if len(spec) != len(STAGES):
            raise CatalogError(f"pipeline spec needs {len(STAGES)} indices, got {len(spec)}")
        for s, (i, n) in enumerate(zip(spec, self.sizes)):
            if not 0 <= i < n:
                raise CatalogError(f"{STAGES[s]} index {i} out of range [0, {n})")
        return spec

    def to_config(self) -> dict[str, list]:
        out = {}
        for name, methods in zip(STAGES, self.stages):
            out[name] = [m.name if not m.params else {"name": m.name, "params": m.kwargs} for m in methods]
        return out


def _descriptor(stage: str, entry) -> MethodDescriptor:
    if isinstance(entry, str):
        name, params = entry, {}
    elif isinstance(entry, Mapping):
        if "name" in entry:
            name, params = entry["name"], dict(entry.get("params") or {})
        elif len(entry) == 1:
            ((name, params),) = entry.items()
            params = dict(params or {})
        else:
            raise CatalogError(f"{stage}: cannot read method entry {entry!r}")
    else:
        raise CatalogError(f"{stage}: cannot read method entry {entry!r}")
    known = METHODS[stage]
    if name not in known:
        raise CatalogError(f"{stage}: unknown method {name!r}; valid: {', '.join(known)}")
    merged = dict(known[name])
    for k, v in params.items():
        if k not in merged:
            raise CatalogError(f"{stage}.{name}: unknown parameter {k!r}; valid: {', '.join(merged) or 'none'}")
        merged[k] = v
    # non-default parameters only, in a stable order
    extra = tuple((k, merged[k]) for k in sorted(merged) if merged[k] != known[name][k])
    return MethodDescriptor(name, extra)


def default_catalog(config: Mapping[str, Any] | None = None) -> StageCatalog:
    """Build the method catalog; unspecified stages use every built-in method.

    A stage set to ``"skip"`` becomes a single identity method. An explicit
    empty list is an error.
    """
    config = dict(config or {})
    unknown = set(config) - set(STAGES)
    if unknown:
        raise CatalogError(f"unknown stage(s) {sorted(unknown)}; valid: {', '.join(STAGES)}")
    stages = []
    for stage in STAGES:
        entries = config.get(stage)
        if entries is None:
            entries = list(METHODS[stage])
        elif entries == "skip" or entries is False:
            if stage not in IDENTITY:
                raise CatalogError(f"stage {stage!r} cannot be skipped")
            entries = [IDENTITY[stage]]
        elif isinstance(entries, (str, Mapping)):
            entries = [entries]
        entries = list(entries)
        if not entries:
            raise CatalogError(f"stage {stage!r} has zero methods")
        methods = tuple(_descriptor(stage, e) for e in entries)
        if len(set(methods)) != len(methods):
            raise CatalogError(f"stage {stage!r} lists the same method twice")
        stages.append(methods)
    return StageCatalog(tuple(stages))


@dataclass(frozen=True)
class Transformed:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    row_ids: np.ndarray  # -1 for synthetic rows
    unknown_categories: dict[str, int] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass
class FittedPipeline:
    spec: tuple[int, ...]
    methods: tuple[MethodDescriptor, ...]
    schema: tuple
    impute: dict
    encode: dict
    scale: dict
    select: dict
    feature_names: tuple[str, ...]
    audit: list[str] = field(default_factory=list)
    balance_counts: tuple[tuple[int, int], tuple[int, int]] | None = None

    def to_dict(self) -> dict:
        return {
            "spec": list(self.spec),
            "methods": [m.label() for m in self.methods],
            "n_features_out": len(self.feature_names),
            "features": list(self.feature_names),
            "audit": list(self.audit),
        }

    def to_text(self) -> str:
        lines = [f"pipeline {self.spec}"]
        for stage, m in zip(STAGES, self.methods):
            lines.append(f"  {stage:<12} {m.label()}")
        lines.append(f"  output features: {len(self.feature_names)}")
        lines.extend(f"  note: {a}" for a in self.audit)
        return "\n".join(lines)


# ---------------------------------------------------------------- imputation


def _mode(codes: np.ndarray, n_cats: int) -> float:
    counts = np.bincount(codes.astype(np.intp), minlength=n_cats)
    return float(np.argmax(counts))


def _fit_impute(method: MethodDescriptor, values: np.ndarray, schema, audit) -> dict:
    params = {**METHODS["imputation"][method.name], **method.kwargs}
    fill = np.zeros(values.shape[1])
    for j, col in enumerate(schema):
        v = values[:, j]
        v = v[~np.isnan(v)]
        if v.size == 0:
            audit.append(f"imputation: column {col.name!r} has no observed training values, filled with 0")
            continue
        if col.is_categorical:
            fill[j] = _mode(v, len(col.categories))
        elif method.name == "median":
            fill[j] = float(np.median(v))
        elif method.name == "constant":
            fill[j] = float(params["fill_value"])
        else:
            fill[j] = float(v.mean())
    state = {"method": method.name, "fill": fill}
    if method.name == "knn":
        num = [j for j, c in enumerate(schema) if not c.is_categorical]
        ref = values[:, num]
        mu = np.zeros(len(num))
        sd = np.ones(len(num))
        for c in range(len(num)):
            v = ref[:, c][~np.isnan(ref[:, c])]
            if v.size:
                mu[c] = v.mean()
                sd[c] = v.std() if v.std() > _CONST_TOL else 1.0
        state.update(num_cols=num, ref=ref.copy(), mu=mu, sd=sd, k=int(params["k"]))
    return state


def _masked_sq_dist(q, q_obs, r, r_obs):
    """Squared distance over coordinates observed in both rows, rescaled by
    p / (shared coordinates); inf when nothing is shared."""
    qz, rz = np.where(q_obs, q, 0.0), np.where(r_obs, r, 0.0)
    qm, rm = q_obs.astype(np.float64), r_obs.astype(np.float64)
    d2 = (qz * qz) @ rm.T + qm @ (rz * rz).T - 2.0 * qz @ rz.T
    shared = qm @ rm.T
    np.maximum(d2, 0.0, out=d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(shared > 0, d2 * (q.shape[1] / np.maximum(shared, 1.0)), np.inf)


def _knn_fill(state: dict, values: np.ndarray, out: np.ndarray, block: int = 512) -> None:
    num = state["num_cols"]
    if not num:
        return
    raw_ref = state["ref"]
    ref = (raw_ref - state["mu"]) / state["sd"]
    ref_obs = ~np.isnan(ref)
    q_all = (values[:, num] - state["mu"]) / state["sd"]
    k = state["k"]
    rows = np.flatnonzero(np.isnan(q_all).any(axis=1))
    for start in range(0, rows.size, block):
        blk = rows[start:start + block]
        q = q_all[blk]
        q_obs = ~np.isnan(q)
        d2 = _masked_sq_dist(q, q_obs, ref, ref_obs)
        for c in np.flatnonzero((~q_obs).any(axis=0)):
            need = np.flatnonzero(~q_obs[:, c])
            donors = np.flatnonzero(ref_obs[:, c])
            if donors.size == 0:
                continue
            sub = d2[np.ix_(need, donors)]
            # equal distances keep the lower training row first
            nearest = kernels.k_smallest(sub, min(k, donors.size))
            dist = np.take_along_axis(sub, nearest, axis=1)
            vals = raw_ref[donors[nearest], c]
            fin = np.isfinite(dist)
            cnt = fin.sum(axis=1)
            ok = cnt > 0
            fill = np.where(fin, vals, 0.0).sum(axis=1)
            out[blk[need[ok]], num[c]] = fill[ok] / cnt[ok]


def _apply_impute(state: dict, values: np.ndarray) -> np.ndarray:
    out = values.copy()
    if state["method"] == "knn":
        _knn_fill(state, values, out)
    miss = np.isnan(out)
    if miss.any():
        out[miss] = np.broadcast_to(state["fill"], out.shape)[miss]
    return out


# ----------------------------------------------------------------- balancing


def _smote(X, y, minority, k, n_new, rng, schema):
    minor_idx = np.flatnonzero(y == minority)
    M = X[minor_idx]
    nn = kernels.knn_indices(M, M, k, exclude_self=True)
    base = rng.integers(0, M.shape[0], size=n_new)
    pick = nn[base, rng.integers(0, k, size=n_new)]
    gap = rng.random(n_new)[:, None]
    synth = M[base] + gap * (M[pick] - M[base])
    for j, col in enumerate(schema):
        if col.is_categorical:
            synth[:, j] = np.clip(np.rint(synth[:, j]), 0, len(col.categories) - 1)
    return synth, minor_idx[base], minor_idx[pick], gap[:, 0]


def _balance(method: MethodDescriptor, X, y, row_ids, schema, rng, audit):
    """Returns (X, y, row_ids, info)."""
    counts = np.bincount(y, minlength=2)
    info: dict[str, Any] = {"method": method.name}
    if method.name == "none" or counts[0] == counts[1] or counts.min() == 0:
        if method.name != "none" and counts.min() == 0:
            audit.append("balancing: a class is absent from training data, balancing skipped")
        return X, y, row_ids, info
    minority = int(np.argmin(counts))
    n_min, n_maj = int(counts[minority]), int(counts[1 - minority])
    name = method.name
    if name == "smote":
        k = int(method.kwargs.get("k", METHODS["balancing"]["smote"]["k"]))
        if n_min < 2:
            audit.append(f"balancing: SMOTE needs >=2 minority rows, got {n_min}; fell back to random_oversample")
            name = "random_oversample"
        elif n_min <= k:
            audit.append(f"balancing: SMOTE k reduced from {k} to {n_min - 1} ({n_min} minority rows)")
            k = n_min - 1
    if name == "random_oversample":
        minor_idx = np.flatnonzero(y == minority)
        extra = minor_idx[rng.integers(0, n_min, size=n_maj - n_min)]
        keep = np.concatenate([np.arange(len(y)), extra])
        return X[keep], y[keep], np.concatenate([row_ids, row_ids[extra]]), info
    if name == "random_undersample":
        maj_idx = np.flatnonzero(y != minority)
        kept_maj = np.sort(rng.choice(maj_idx, size=n_min, replace=False))
        keep = np.sort(np.concatenate([np.flatnonzero(y == minority), kept_maj]))
        return X[keep], y[keep], row_ids[keep], info
    synth, a, b, gap = _smote(X, y, minority, k, n_maj - n_min, rng, schema)
    info.update(k=k, base=a, neighbor=b, gap=gap)
    Xb = np.vstack([X, synth])
    yb = np.concatenate([y, np.full(len(synth), minority, dtype=y.dtype)])
    rb = np.concatenate([row_ids, np.full(len(synth), -1, dtype=row_ids.dtype)])
    return Xb, yb, rb, info


# --------------------------------------------------------------- engineering


def _fit_encode(method: MethodDescriptor, X, schema) -> dict:
    seen = {}
    for j, col in enumerate(schema):
        if col.is_categorical:
            seen[j] = np.unique(X[:, j]).astype(np.intp)
    num = [j for j, c in enumerate(schema) if not c.is_categorical]
    names: list[str] = []
    if method.name == "ordinal":
        names = [c.name for c in schema]
    else:
        for j, col in enumerate(schema):
            if col.is_categorical:
                names.extend(f"{col.name}={col.categories[c]}" for c in seen[j])
            else:
                names.append(col.name)
        if method.name == "onehot_interactions":
            for a in range(len(num)):
                for b in range(a + 1, len(num)):
                    names.append(f"{schema[num[a]].name}*{schema[num[b]].name}")
    return {"method": method.name, "seen": seen, "num": num, "names": tuple(names)}


def _apply_encode(state: dict, X, schema, unknown: dict[str, int]) -> np.ndarray:
    parts = []
    for j, col in enumerate(schema):
        x = X[:, j]
        if not col.is_categorical:
            parts.append(x[:, None])
            continue
        seen = state["seen"][j]
        codes = x.astype(np.intp)
        pos = np.searchsorted(seen, codes)
        pos_c = np.minimum(pos, len(seen) - 1) if len(seen) else pos
        known = (pos < len(seen)) & (seen[pos_c] == codes) if len(seen) else np.zeros(len(codes), bool)
        n_unknown = int((~known).sum())
        if n_unknown:
            unknown[col.name] = unknown.get(col.name, 0) + n_unknown
        if state["method"] == "ordinal":
            # unseen categories get the code one past the last seen one
            parts.append(np.where(known, pos, len(seen)).astype(np.float64)[:, None])
        else:
            onehot = np.zeros((len(codes), len(seen)))
            r = np.flatnonzero(known)
            onehot[r, pos[r]] = 1.0
            parts.append(onehot)
    if state["method"] == "onehot_interactions":
        num = state["num"]
        for a in range(len(num)):
            for b in range(a + 1, len(num)):
                parts.append((X[:, num[a]] * X[:, num[b]])[:, None])
    if not parts:
        return np.zeros((X.shape[0], 0))
    return np.hstack(parts)


# ------------------------------------------------------------------- scaling


def _fit_scale(method: MethodDescriptor, X) -> dict:
    p = X.shape[1]
    center = np.zeros(p)
    mult = np.ones(p)
    if method.name == "zscore":
        center = X.mean(axis=0)
        sd = np.sqrt(((X - center) ** 2).mean(axis=0))
        const = sd <= _CONST_TOL * np.maximum(1.0, np.abs(center))
        mult = np.where(const, 0.0, 1.0 / np.where(const, 1.0, sd))
    elif method.name == "minmax":
        lo = X.min(axis=0) if len(X) else np.zeros(p)
        hi = X.max(axis=0) if len(X) else np.zeros(p)
        rng = hi - lo
        center = lo
        const = rng <= 0
        mult = np.where(const, 0.0, 1.0 / np.where(const, 1.0, rng))
    elif method.name == "robust":
        center = np.median(X, axis=0)
        iqr = np.percentile(X, 75, axis=0) - np.percentile(X, 25, axis=0)
        mult = np.where(iqr > 0, 1.0 / np.where(iqr > 0, iqr, 1.0), 1.0)
    return {"method": method.name, "center": center, "mult": mult}


def _apply_scale(state: dict, X) -> np.ndarray:
    if state["method"] == "none":
        return X
    out = (X - state["center"]) * state["mult"]
    if state["method"] == "zscore":
        # constant columns map to exactly 0
        out[:, state["mult"] == 0] = 0.0
    return out


# ----------------------------------------------------------------- selection


def _abs_corr(X, y):
    yc = y - y.mean()
    Xc = X - X.mean(axis=0)
    num = Xc.T @ yc
    den = np.sqrt((Xc ** 2).sum(axis=0) * (yc @ yc))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return np.abs(r)


def equal_frequency_edges(x, bins):
    """Interior quantile edges for ``bins`` equal-frequency bins; repeats collapse."""
    return np.unique(np.quantile(x, np.linspace(0, 1, bins + 1)[1:-1]))


def mutual_information(X, y, bins=10):
    """MI (nats) between each column, cut into equal-frequency bins, and ``y``."""
    n = len(y)
    out = np.zeros(X.shape[1])
    py = np.bincount(y, minlength=2) / n
    for j in range(X.shape[1]):
        edges = equal_frequency_edges(X[:, j], bins)
        b = np.searchsorted(edges, X[:, j], side="right")
        joint = np.zeros((len(edges) + 1, 2))
        np.add.at(joint, (b, y), 1.0)
        joint /= n
        pb = joint.sum(axis=1)
        nz = joint > 0
        out[j] = float((joint[nz] * np.log(joint[nz] / (pb[:, None] * py[None, :])[nz])).sum())
    return out


def _top_k(score, k):
    order = np.argsort(-score, kind="stable")
    mask = np.zeros(len(score), bool)
    mask[order[:k]] = True
    return mask


def _fit_select(method: MethodDescriptor, X, y) -> dict:
    p = X.shape[1]
    kw = method.kwargs
    if method.name == "none":
        mask = np.ones(p, bool)
        score = None
    elif method.name == "variance_threshold":
        thr = float(kw.get("threshold", METHODS["selection"]["variance_threshold"]["threshold"]))
        score = X.var(axis=0) if len(X) else np.zeros(p)
        mask = score > thr
    else:
        k = kw.get("k")
        k = math.ceil(p / 2) if k is None else min(int(k), p)
        if method.name == "top_k_correlation":
            score = _abs_corr(X, y)
        else:
            score = mutual_information(X, y, int(kw.get("bins", 10)))
        mask = _top_k(score, k)
    return {"method": method.name, "mask": mask, "score": score}


# ------------------------------------------------------------------ pipeline


def fit_apply(spec: Sequence[int], catalog: StageCatalog, train: TabularDataset, seed: int):
    """Fit every stage on ``train``; returns ``(FittedPipeline, Transformed)``."""
    spec = catalog.validate(spec)
    methods = tuple(catalog.method(s, i) for s, i in enumerate(spec))
    schema = train.schema
    audit: list[str] = []
    rng = np.random.default_rng(seed)

    impute = _fit_impute(methods[0], train.values, schema, audit)
    X = _apply_impute(impute, train.values)
    y = train.labels.astype(np.intp)
    before = tuple(int(c) for c in np.bincount(y, minlength=2))
    X, y, row_ids, _ = _balance(methods[1], X, y, train.row_ids.copy(), schema, rng, audit)
    after = tuple(int(c) for c in np.bincount(y, minlength=2))

    encode = _fit_encode(methods[2], X, schema)
    unknown: dict[str, int] = {}
    X = _apply_encode(encode, X, schema, unknown)
    names = encode["names"]

    scale = _fit_scale(methods[3], X)
    X = _apply_scale(scale, X)

    select = _fit_select(methods[4], X, y)
    X = X[:, select["mask"]]
    names = tuple(n for n, keep in zip(names, select["mask"]) if keep)
    if X.shape[1] == 0:
        raise PipelineError("empty feature matrix")
    if not np.isfinite(X).all():
        raise PipelineError("non-finite values after preprocessing")

    fp = FittedPipeline(
        spec=spec, methods=methods, schema=schema, impute=impute, encode=encode,
        scale=scale, select=select, feature_names=names, audit=audit,
        balance_counts=(before, after),
    )
    return fp, Transformed(X, y.astype(np.int8), names, row_ids, unknown)


def transform(fp: FittedPipeline, eval_ds: TabularDataset) -> Transformed:
    """Apply fitted state to evaluation rows; balancing is not applied."""
    if eval_ds.schema != fp.schema:
        raise PipelineError("schema mismatch between training and evaluation data")
    X = _apply_impute(fp.impute, eval_ds.values)
    unknown: dict[str, int] = {}
    X = _apply_encode(fp.encode, X, fp.schema, unknown)
    X = _apply_scale(fp.scale, X)
    X = X[:, fp.select["mask"]]
    return Transformed(X, eval_ds.labels.copy(), fp.feature_names, eval_ds.row_ids.copy(), unknown)

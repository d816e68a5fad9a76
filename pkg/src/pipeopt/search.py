"""Search orchestration: sample, evaluate, lock a model, PRCC, refine, report.

Phases
------
a. LHS over the catalog's index space.
b/c. Every sampled pipeline is fitted on the selection-train part, every
   configured model is tuned by CV random search, and all metrics are
   measured on the validation part. Results land in a :class:`ResultsTable`.
   The model with the best row (aggregated target) is locked.
d. PRCC of the stage indices against the locked model's target.
e. Full grid over the top-m stages with the incumbent's other stages
   frozen, evaluated with the locked model only.

The outer test partition is read once, after the winner is retrained on
the whole training partition.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__, metrics, preprocess
from .data import DataError, SplitPair, TabularDataset, stratified_split, subsample
from .models import CvConfig, ModelKind, get_kind, predict, random_search_fit
from .preprocess import STAGES, StageCatalog, default_catalog, fit_apply, transform
from .sampling import default_n_samples, lhs_design
from .sensitivity import PrccReport, SensitivityError, prcc, top_m

log = logging.getLogger(__name__)

ALL_MODELS = ("logistic_regression", "decision_tree", "random_forest", "gaussian_nb", "knn")


class SearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    catalog: dict | None = None
    models: tuple[str, ...] = ALL_MODELS
    model_spaces: dict = field(default_factory=dict)
    targets: tuple[str, ...] = ("balanced_accuracy",)
    metrics: tuple[str, ...] = metrics.METRIC_NAMES
    n_samples: int | None = None
    m: int = 2
    refinement_budget: int = 64
    folds: int = 5
    budget: int = 20
    cv_scoring: str | None = None
    seed: int = 0
    test_fraction: float = 1 / 3
    validation_fraction: float = 0.25
    subsample: float = 1.0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "metrics", tuple(dict.fromkeys((*self.metrics, *self.targets))))
        if not self.targets:
            raise ValueError("at least one target metric is required")
        if not self.models:
            raise ValueError("at least one model is required")
        if not 1 <= self.m <= len(STAGES):
            raise ValueError(f"m must lie in [1, {len(STAGES)}]")
        if self.refinement_budget < 1:
            raise ValueError("refinement_budget must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for name in (*self.metrics, *([self.cv_scoring] if self.cv_scoring else [])):
            metrics.parse_metric(name)
        for name in self.models:
            get_kind(name, self.model_spaces.get(name))

    @property
    def scoring(self) -> str:
        return self.cv_scoring or self.targets[0]

    def model_kinds(self) -> list[ModelKind]:
        return [get_kind(n, self.model_spaces.get(n)) for n in self.models]


# ------------------------------------------------------------------ seeds


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from ints and strings."""
    ints = [p if isinstance(p, int) else zlib.crc32(str(p).encode()) for p in parts]
    return int(np.random.SeedSequence([abs(i) for i in ints]).generate_state(1)[0])


def pipeline_seed(global_seed: int, spec: Sequence[int]) -> int:
    return derive_seed(global_seed, "pipeline", *spec)


# ------------------------------------------------------------ results table


@dataclass
class ModelResult:
    metrics: dict[str, float] | None = None
    cv_score: float | None = None
    hyperparameters: dict | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class EvalRow:
    spec: tuple[int, ...]
    provenance: str  # "lhs" | "refinement"
    seed: int
    results: dict[str, ModelResult]
    audit: list[str] = field(default_factory=list)

    def target(self, model: str, targets: Sequence[str]) -> float | None:
        r = self.results.get(model)
        if r is None or r.failed:
            return None
        vals = [r.metrics[t] for t in targets]
        if any(v is None or math.isnan(v) for v in vals):
            return None
        return float(np.mean(vals))


@dataclass
class ResultsTable:
    models: tuple[str, ...]
    metric_names: tuple[str, ...]
    rows: list[EvalRow] = field(default_factory=list)

    def columns(self) -> list[str]:
        cols = ["row", "provenance", *STAGES]
        for m in self.models:
            cols += [f"{m}.{k}" for k in self.metric_names] + [f"{m}.cv_score", f"{m}.error"]
        return cols

    def to_csv(self) -> str:
        """Failed cells read ``FAILED`` with the reason in ``<model>.error``;
        models not evaluated for a row are left empty."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns())
        for i, row in enumerate(self.rows):
            cells: list[Any] = [i, row.provenance, *row.spec]
            for m in self.models:
                r = row.results.get(m)
                if r is None:
                    cells += [""] * (len(self.metric_names) + 2)
                elif r.failed:
                    cells += ["FAILED"] * (len(self.metric_names) + 1) + [r.error]
                else:
                    cells += [_fmt(r.metrics[k]) for k in self.metric_names] + [_fmt(r.cv_score), ""]
            w.writerow(cells)
        return buf.getvalue()

    def to_dict(self) -> list[dict]:
        return [
            {
                "row": i,
                "spec": list(r.spec),
                "provenance": r.provenance,
                "seed": r.seed,
                "results": {m: asdict(res) for m, res in r.results.items()},
                "audit": r.audit,
            }
            for i, r in enumerate(self.rows)
        ]


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v))


# ------------------------------------------------------------- evaluation


def evaluate_pipeline(spec, catalog: StageCatalog, split: SplitPair, models: Sequence[ModelKind],
                      cv: CvConfig, seed: int, metric_names: Sequence[str] = metrics.METRIC_NAMES,
                      provenance: str = "lhs") -> EvalRow:
    """Fit ``spec`` on ``split.train``, tune each model there, score on ``split.test``.

    ``split`` is the selection split carved from the training partition.
    Seeds depend only on ``(seed, spec, model name)``, never on the order
    of evaluation. Failures become row-level markers.
    """
    spec = catalog.validate(spec)
    pseed = pipeline_seed(seed, spec)
    try:
        fp, tr = fit_apply(spec, catalog, split.train, pseed)
        va = transform(fp, split.test)
    except Exception as exc:  # noqa: BLE001 - recorded as failure marker
        reason = str(exc) or type(exc).__name__
        return EvalRow(spec, provenance, pseed, {k.name: ModelResult(error=reason) for k in models}, [reason])
    results = {}
    for kind in models:
        mcv = CvConfig(cv.folds, cv.budget, cv.scoring, derive_seed(pseed, kind.name))
        try:
            model, score = random_search_fit(kind, tr.X, tr.y, mcv)
            labels, scores = predict(model, va.X)
            panel = metrics.metric_panel(va.y, labels, scores, metric_names)
            results[kind.name] = ModelResult(panel, score, model.hyperparameters)
        except Exception as exc:  # noqa: BLE001
            results[kind.name] = ModelResult(error=str(exc) or type(exc).__name__)
    return EvalRow(spec, provenance, pseed, results, list(fp.audit))


def _task(args):
    return evaluate_pipeline(*args)


def evaluate_many(specs, catalog, split, models, cv, seed, metric_names, provenance, workers) -> list[EvalRow]:
    """Evaluate specs, possibly in parallel; output follows input order."""
    args = [(s, catalog, split, models, cv, seed, metric_names, provenance) for s in specs]
    if workers <= 1 or len(args) <= 1:
        return [_task(a) for a in args]
    with ProcessPoolExecutor(max_workers=min(workers, len(args))) as pool:
        return list(pool.map(_task, args))


# ---------------------------------------------------------------- report


@dataclass
class SearchReport:
    config: dict
    dataset: dict
    seeds: dict
    design: dict
    table: ResultsTable
    locked_model: str
    model_summary: dict
    incumbent: dict
    prcc: PrccReport | None
    refinement: dict
    winner: dict
    final: dict
    warnings: list[str]
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Machine-readable form. Timings are excluded so reruns are byte-identical."""
        return {
            "tool": {"name": "pipeopt", "version": __version__},
            "config": self.config,
            "dataset": self.dataset,
            "seeds": self.seeds,
            "design": self.design,
            "results_table": self.table.to_dict(),
            "locked_model": self.locked_model,
            "model_summary": self.model_summary,
            "incumbent": self.incumbent,
            "prcc": None if self.prcc is None else {
                "rows": self.prcc.as_rows(),
                "n_rows": self.prcc.n_rows,
                "warnings": list(self.prcc.warnings),
                "note": "stage method indices are treated as ordinal values in catalog order",
            },
            "refinement": self.refinement,
            "winner": self.winner,
            "final": self.final,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_text(self) -> str:
        return format_report(self.to_dict(), self.timings)


def _clean(obj):
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt4(v):
    return "n/a" if v is None else f"{v:.4f}"


def format_report(d: dict, timings: dict | None = None) -> str:
    """Human-readable summary of a report dict (as produced by ``to_dict``)."""
    w = d["winner"]
    f = d["final"]
    lines = [
        f"pipeopt {d['tool']['version']} search report",
        f"dataset: {d['dataset']['n_rows']} rows, {d['dataset']['n_cols']} columns, "
        f"positive/negative ratio {d['dataset']['class_ratio']:.4f}",
        f"global seed: {d['seeds']['global']}",
        f"sampled pipelines: {d['design']['n_samples']} (space size {d['design']['space_size']})",
        f"locked model: {d['locked_model']}",
        "",
        "winning pipeline:",
    ]
    for stage, name in zip(STAGES, w["methods"]):
        lines.append(f"  {stage:<12} {name}")
    lines += [
        f"  provenance   {w['provenance']}",
        f"validation target ({'+'.join(d['config']['search']['targets'])}): {_fmt4(w['validation_target'])}",
        f"best LHS validation target: {_fmt4(d['incumbent']['validation_target'])}",
        f"hyperparameters: {json.dumps(f['hyperparameters'], sort_keys=True)}",
        f"cv score ({d['config']['cv']['scoring']}): {_fmt4(f['cv_score'])}",
        "",
        "test metrics:",
    ]
    for k, v in f["test_metrics"].items():
        lines.append(f"  {k:<18} {_fmt4(v)}")
    lines += ["", "PRCC (stage index vs target):"]
    if d["prcc"] is None:
        lines.append("  not computed")
    else:
        for r in d["prcc"]["rows"]:
            flag = " degenerate" if r["degenerate"] else ""
            lines.append(f"  {r['stage']:<12} {r['coefficient']:>8.4f}  rank {r['influence_rank']}{flag}")
    ref = d["refinement"]
    if ref["skipped"]:
        lines.append(f"refinement: skipped ({ref['reason']})")
    else:
        lines.append(f"refinement: stages {', '.join(ref['stages'])}; {len(ref['specs'])} pipelines evaluated")
    if d["warnings"]:
        lines += ["", "warnings:"] + [f"  - {x}" for x in d["warnings"]]
    if timings:
        lines += ["", "timings (s): " + ", ".join(f"{k}={v:.2f}" for k, v in timings.items())]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- search


def _lock_model(table: ResultsTable, targets) -> tuple[str, dict]:
    summary = {}
    for name in table.models:
        vals = [r.target(name, targets) for r in table.rows]
        ok = [v for v in vals if v is not None]
        summary[name] = {
            "best": max(ok) if ok else None,
            "mean": float(np.mean(ok)) if ok else None,
            "failed_rows": len(vals) - len(ok),
        }
    ranked = [
        (s["best"], s["mean"], -i, name)
        for i, (name, s) in enumerate(summary.items())
        if s["best"] is not None
    ]
    if not ranked:
        raise SearchError("all pipelines failed for every model")
    return max(ranked)[3], summary


def refinement_grid(incumbent: Sequence[int], stages: Sequence[int], sizes: Sequence[int], cap: int) -> list[tuple[int, ...]]:
    """Cartesian grid over ``stages`` around ``incumbent``, nearest first.

    Ordered by L1 distance to the incumbent then lexicographically, and cut
    to ``cap`` entries. The incumbent (distance 0) always comes first.
    """
    axes = [range(sizes[s]) if s in stages else [incumbent[s]] for s in range(len(sizes))]
    grid = [tuple(p) for p in itertools.product(*axes)]
    grid.sort(key=lambda p: (sum(abs(a - b) for a, b in zip(p, incumbent)), p))
    return grid[:cap]


def run_search(config: SearchConfig, dataset: TabularDataset, split: SplitPair | None = None) -> SearchReport:
    """All phases end to end; returns the full report.

    ``split`` overrides the outer train/test partition (otherwise drawn from
    the global seed).
    """
    t0 = time.perf_counter()
    timings = {}
    warnings: list[str] = []
    seed = int(config.seed)
    catalog = default_catalog(config.catalog)
    kinds = config.model_kinds()
    seeds: dict[str, Any] = {"global": seed}

    if split is None:
        ds = dataset
        if config.subsample < 1:
            seeds["subsample"] = derive_seed(seed, "subsample")
            ds = subsample(dataset, config.subsample, seeds["subsample"])
        seeds["outer_split"] = derive_seed(seed, "outer_split")
        split = stratified_split(ds, config.test_fraction, seeds["outer_split"])
    seeds["validation_split"] = derive_seed(seed, "validation_split")
    selection = stratified_split(split.train, config.validation_fraction, seeds["validation_split"])
    cv = CvConfig(config.folds, config.budget, config.scoring, 0)

    # (a) sampling
    sizes = catalog.sizes
    n_samples = config.n_samples or default_n_samples(sizes)
    seeds["lhs"] = derive_seed(seed, "lhs")
    design = lhs_design(sizes, n_samples, seeds["lhs"])
    warnings.extend(design.warnings)
    specs = design.specs

    # (b, c) evaluation of every sampled pipeline with every model
    t = time.perf_counter()
    rows = evaluate_many(specs, catalog, selection, kinds, cv, seed, config.metrics, "lhs", config.workers)
    timings["lhs_evaluation"] = time.perf_counter() - t
    table = ResultsTable(tuple(k.name for k in kinds), config.metrics, rows)
    locked, model_summary = _lock_model(table, config.targets)
    locked_kind = next(k for k in kinds if k.name == locked)
    scored = [(r.target(locked, config.targets), -i, i) for i, r in enumerate(rows)]
    scored = [s for s in scored if s[0] is not None]
    inc_value, _, inc_row = max(scored)
    incumbent = rows[inc_row].spec

    # (d) sensitivity on the locked model's target
    ok_rows = [r for r in rows if r.target(locked, config.targets) is not None]
    report_prcc = None
    skip_reason = None
    try:
        X = np.array([r.spec for r in ok_rows], dtype=np.float64).reshape(-1, len(STAGES))
        yv = np.array([r.target(locked, config.targets) for r in ok_rows])
        report_prcc = prcc(X, yv, STAGES)
        warnings.extend(report_prcc.warnings)
        if report_prcc.all_degenerate:
            skip_reason = "PRCC degenerate for every stage"
    except SensitivityError as exc:
        skip_reason = f"PRCC not computable: {exc}"

    # (e) refinement around the incumbent
    refined_stages: list[int] = []
    grid: list[tuple[int, ...]] = []
    ref_rows: list[EvalRow] = []
    if skip_reason is None:
        refined_stages = top_m(report_prcc, config.m)
        if len(refined_stages) < config.m:
            warnings.append(f"only {len(refined_stages)} non-degenerate stage(s) available for m={config.m}")
        grid = refinement_grid(incumbent, refined_stages, sizes, config.refinement_budget)
        cache = {r.spec: r for r in rows}
        todo = [g for g in grid if g not in cache]
        t = time.perf_counter()
        fresh = evaluate_many(todo, catalog, selection, [locked_kind], cv, seed, config.metrics,
                              "refinement", config.workers)
        timings["refinement_evaluation"] = time.perf_counter() - t
        fresh_by_spec = dict(zip(todo, fresh))
        for g in grid:
            if g in cache:
                # same spec and seed give the same result; reuse it
                src = cache[g]
                ref_rows.append(EvalRow(g, "refinement", src.seed, {locked: src.results[locked]}, list(src.audit)))
            else:
                ref_rows.append(fresh_by_spec[g])
        table.rows.extend(ref_rows)
    else:
        warnings.append(f"refinement skipped: {skip_reason}")

    candidates = ref_rows if ref_rows else [rows[inc_row]]
    best_val, best_row = None, None
    for r in candidates:
        v = r.target(locked, config.targets)
        if v is not None and (best_val is None or v > best_val):
            best_val, best_row = v, r
    if best_row is None:
        best_val, best_row = inc_value, rows[inc_row]
    winner_spec = best_row.spec
    winner_index = table.rows.index(best_row)

    # final retrain on the whole training partition; first read of test rows
    t = time.perf_counter()
    final = final_evaluation(winner_spec, catalog, split, locked_kind, cv, seed, config.metrics)
    timings["final"] = time.perf_counter() - t
    seeds["final_pipeline"] = final.pop("pipeline_seed")
    seeds["final_model"] = final.pop("model_seed")
    warnings.extend(f"final pipeline: {a}" for a in final["pipeline"]["audit"])
    timings["total"] = time.perf_counter() - t0

    n_neg, n_pos = dataset.class_counts()
    return SearchReport(
        config=config_to_dict(config),
        dataset={
            "n_rows": dataset.n_rows,
            "n_cols": dataset.n_cols,
            "class_counts": {"negative": n_neg, "positive": n_pos},
            "class_ratio": dataset.class_ratio,
            "missing_cells": int(dataset.missing.sum()),
            "train_rows": split.train.n_rows,
            "test_rows": split.test.n_rows,
            "selection_train_rows": selection.train.n_rows,
            "validation_rows": selection.test.n_rows,
        },
        seeds=seeds,
        design={
            "step_sizes": list(sizes),
            "n_samples": n_samples,
            "space_size": math.prod(sizes),
            "attempts": design.attempts,
            "duplicates": design.duplicates,
            "samples": design.samples.tolist(),
            "indices": design.indices.tolist(),
            "catalog": {s: [m.label() for m in ms] for s, ms in zip(STAGES, catalog.stages)},
        },
        table=table,
        locked_model=locked,
        model_summary=model_summary,
        incumbent={"spec": list(incumbent), "row": inc_row, "validation_target": inc_value},
        prcc=report_prcc,
        refinement={
            "skipped": skip_reason is not None,
            "reason": skip_reason,
            "stages": [STAGES[s] for s in refined_stages],
            "specs": [list(g) for g in grid],
        },
        winner={
            "spec": list(winner_spec),
            "methods": list(catalog.names(winner_spec)),
            "provenance": best_row.provenance,
            "row": winner_index,
            "validation_target": best_val,
            "model": locked,
        },
        final=final,
        warnings=warnings,
        timings=timings,
    )


def final_evaluation(spec, catalog, split: SplitPair, kind: ModelKind, cv: CvConfig, seed: int,
                     metric_names) -> dict:
    """Retrain the winner on ``split.train`` and score it on ``split.test``."""
    pseed = pipeline_seed(seed, spec)
    mseed = derive_seed(seed, "final", kind.name, *spec)
    fp, tr = fit_apply(spec, catalog, split.train, pseed)
    model, score = random_search_fit(kind, tr.X, tr.y, CvConfig(cv.folds, cv.budget, cv.scoring, mseed))
    te = transform(fp, split.test)
    labels, scores = predict(model, te.X)
    return {
        "pipeline": fp.to_dict(),
        "hyperparameters": model.hyperparameters,
        "cv_score": score,
        "test_metrics": metrics.metric_panel(te.y, labels, scores, metric_names),
        "unknown_categories": te.unknown_categories,
        "pipeline_seed": pseed,
        "model_seed": mseed,
    }


def config_to_dict(config: SearchConfig) -> dict:
    """Nested layout mirroring the run-config file's ``search``/``cv``/``catalog`` sections.

    ``workers`` is left out: it cannot change results, and reports must be
    byte-identical across worker counts.
    """
    catalog = default_catalog(config.catalog).to_config()
    return {
        "search": {
            "seed": config.seed,
            "models": list(config.models),
            "model_spaces": config.model_spaces,
            "targets": list(config.targets),
            "metrics": list(config.metrics),
            "n_samples": config.n_samples,
            "m": config.m,
            "refinement_budget": config.refinement_budget,
            "test_fraction": config.test_fraction,
            "validation_fraction": config.validation_fraction,
            "subsample": config.subsample,
        },
        "cv": {"folds": config.folds, "budget": config.budget, "scoring": config.scoring},
        "catalog": catalog,
    }


# ------------------------------------------------------------- experiment


@dataclass
class ExperimentReport:
    runs: list[SearchReport | None]
    errors: list[str | None]
    aggregate: dict[str, dict[str, float]]
    seeds: list[int]

    def to_dict(self) -> dict:
        return {
            "tool": {"name": "pipeopt", "version": __version__},
            "seeds": self.seeds,
            "aggregate": self.aggregate,
            "errors": self.errors,
            "runs": [None if r is None else r.to_dict() for r in self.runs],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_text(self) -> str:
        return format_experiment(self.to_dict())

    def results_csv(self) -> str:
        out = []
        for i, r in enumerate(self.runs):
            if r is None:
                continue
            lines = r.table.to_csv().splitlines()
            if not out:
                out.append("run," + lines[0])
            out.extend(f"{i},{line}" for line in lines[1:])
        return "\n".join(out) + "\n"


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.4f} ±{std:.4f}"


def format_experiment(d: dict) -> str:
    n_ok = sum(r is not None for r in d["runs"])
    lines = [f"pipeopt {d['tool']['version']} experiment: {n_ok}/{len(d['runs'])} runs succeeded",
             f"seeds: {d['seeds']}", "", "test metrics (mean ±std over runs):"]
    for k, v in d["aggregate"].items():
        lines.append(f"  {k:<18} {format_mean_std(v['mean'], v['std'])}  (n={v['n']})")
    for i, e in enumerate(d["errors"]):
        if e:
            lines.append(f"run {i} failed: {e}")
    lines.append("")
    for i, r in enumerate(d["runs"]):
        if r is None:
            continue
        w = r["winner"]
        lines.append(f"run {i}: {r['locked_model']} + {' | '.join(w['methods'])}")
    return "\n".join(lines) + "\n"


def aggregate_metrics(reports: Sequence[SearchReport]) -> dict[str, dict[str, float]]:
    """Mean and population std of each test metric over runs (NaN values skipped)."""
    out = {}
    if not reports:
        return out
    for name in reports[0].final["test_metrics"]:
        vals = [r.final["test_metrics"][name] for r in reports]
        vals = [v for v in vals if v is not None and not math.isnan(v)]
        if vals:
            out[name] = {"mean": float(np.mean(vals)), "std": float(np.std(vals)), "n": len(vals)}
    return out


def run_experiment(config: SearchConfig, dataset: TabularDataset, runs: int) -> ExperimentReport:
    """Repeat :func:`run_search` with seeds ``seed + r``; each run draws its own split."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    reports: list[SearchReport | None] = []
    errors: list[str | None] = []
    seeds = []
    for r in range(runs):
        cfg = SearchConfig(**{**config.__dict__, "seed": config.seed + r})
        seeds.append(cfg.seed)
        try:
            reports.append(run_search(cfg, dataset))
            errors.append(None)
        except (SearchError, DataError, preprocess.PipelineError, ValueError) as exc:
            log.error("run %d failed: %s", r, exc)
            reports.append(None)
            errors.append(str(exc))
    ok = [r for r in reports if r is not None]
    if not ok:
        raise SearchError(f"all {runs} runs failed: {errors[0]}")
    return ExperimentReport(reports, errors, aggregate_metrics(ok), seeds)

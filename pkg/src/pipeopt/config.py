"""Run configuration: YAML file + dotted-path overrides, fully resolved.

Grammar (YAML mapping; every key optional except ``dataset.path`` and
``dataset.label``)::

    dataset:
      path: data.csv
      label: outcome
      missing_tokens: ["", "NA", "NaN", "null"]
      positive_label: null          # default: minority class
      drop_missing_labels: false
      type_hints: {}                # column -> numeric | categorical
    search:
      seed: 0
      models: [logistic_regression, decision_tree, random_forest, gaussian_nb, knn]
      model_spaces: {}              # model -> param -> [low, high] | {choices: [...]}
      targets: [balanced_accuracy]
      metrics: [balanced_accuracy, f1_macro, f_beta_0.5, mcc, sensitivity, specificity, auc]
      n_samples: null               # default: min(4 * max N_s, space size)
      m: 2
      refinement_budget: 64
      test_fraction: 0.3333333333333333
      validation_fraction: 0.25
      subsample: 1.0
      workers: 1
    cv:
      folds: 5
      budget: 20
      scoring: null                 # default: first target
    catalog:                        # stage -> list of methods | skip
      imputation: [mean, median, constant, knn]
    output:
      dir: pipeopt-out
    runs: 1
    verbosity: 1

The resolved form written next to the outputs has every default filled in
and reproduces the run when passed back with ``--config``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from . import metrics
from .data import DEFAULT_MISSING_TOKENS
from .models import ModelError
from .preprocess import CatalogError, default_catalog
from .sampling import default_n_samples
from .search import ALL_MODELS, SearchConfig

DEFAULTS: dict[str, Any] = {
    "dataset": {
        "path": None,
        "label": None,
        "missing_tokens": list(DEFAULT_MISSING_TOKENS),
        "positive_label": None,
        "drop_missing_labels": False,
        "type_hints": {},
    },
    "search": {
        "seed": 0,
        "models": list(ALL_MODELS),
        "model_spaces": {},
        "targets": ["balanced_accuracy"],
        "metrics": list(metrics.METRIC_NAMES),
        "n_samples": None,
        "m": 2,
        "refinement_budget": 64,
        "test_fraction": 1 / 3,
        "validation_fraction": 0.25,
        "subsample": 1.0,
        "workers": 1,
    },
    "cv": {"folds": 5, "budget": 20, "scoring": None},
    "catalog": None,
    "output": {"dir": "pipeopt-out"},
    "runs": 1,
    "verbosity": 1,
}

# sections whose contents are free-form mappings
_OPEN = {"dataset.type_hints", "search.model_spaces", "catalog"}


class ConfigError(ValueError):
    pass


def _merge(base: dict, update: Mapping, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        path = f"{prefix}{key}"
        if key not in base:
            valid = ", ".join(f"{prefix}{k}" for k in base)
            raise ConfigError(f"unknown config key {path!r}; valid keys: {valid}")
        if path in _OPEN or val is None:
            out[key] = copy.deepcopy(val)
        elif isinstance(base[key], dict):
            if not isinstance(val, Mapping):
                raise ConfigError(f"{path} must be a mapping")
            out[key] = _merge(base[key], val, path + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def set_dotted(tree: dict, dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = tree
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: {p} is not a section")
    node[parts[-1]] = value


def get_dotted(tree: Mapping, dotted: str, default=None):
    node: Any = tree
    for p in dotted.split("."):
        if not isinstance(node, Mapping) or p not in node:
            return default
        node = node[p]
    return node


@dataclass(frozen=True)
class RunConfig:
    tree: dict
    search: SearchConfig

    @property
    def dataset(self) -> dict:
        return self.tree["dataset"]

    @property
    def out_dir(self) -> Path:
        return Path(self.tree["output"]["dir"])

    @property
    def runs(self) -> int:
        return int(self.tree["runs"])

    @property
    def verbosity(self) -> int:
        return int(self.tree["verbosity"])

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.tree, sort_keys=True, default_flow_style=False, allow_unicode=True)


def _as_int(tree, key):
    v = get_dotted(tree, key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def resolve(tree: Mapping[str, Any]) -> RunConfig:
    """Validate a merged config tree and fill in derived defaults."""
    tree = _merge(DEFAULTS, tree)
    ds = tree["dataset"]
    if not ds.get("path"):
        raise ConfigError("dataset.path is required")
    if not ds.get("label"):
        raise ConfigError("dataset.label is required")
    ds["path"] = str(ds["path"])
    s, cv = tree["search"], tree["cv"]
    for key in ("search.seed", "search.m", "search.refinement_budget", "search.workers",
                "cv.folds", "cv.budget", "runs", "verbosity"):
        _as_int(tree, key)
    if tree["runs"] < 1:
        raise ConfigError("runs must be >= 1")
    for key in ("targets", "metrics", "models"):
        if isinstance(s[key], str):
            s[key] = [s[key]]
    try:
        for name in (*s["targets"], *s["metrics"], *([cv["scoring"]] if cv["scoring"] else [])):
            metrics.parse_metric(name)
        catalog = default_catalog(tree["catalog"])
    except (metrics.MetricError, CatalogError) as exc:
        raise ConfigError(str(exc)) from exc
    tree["catalog"] = catalog.to_config()
    if s["n_samples"] is None:
        s["n_samples"] = default_n_samples(catalog.sizes)
    if not s["targets"]:
        raise ConfigError("search.targets must name at least one metric")
    if cv["scoring"] is None:
        cv["scoring"] = s["targets"][0]
    try:
        search = SearchConfig(
            catalog=tree["catalog"],
            models=tuple(s["models"]),
            model_spaces=dict(s["model_spaces"] or {}),
            targets=tuple(s["targets"]),
            metrics=tuple(s["metrics"]),
            n_samples=_as_int(tree, "search.n_samples"),
            m=s["m"],
            refinement_budget=s["refinement_budget"],
            folds=cv["folds"],
            budget=cv["budget"],
            cv_scoring=cv["scoring"],
            seed=s["seed"],
            test_fraction=float(s["test_fraction"]),
            validation_fraction=float(s["validation_fraction"]),
            subsample=float(s["subsample"]),
            workers=s["workers"],
        )
    except (ModelError, metrics.MetricError, CatalogError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    s["metrics"] = list(search.metrics)
    return RunConfig(tree, search)


def load_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return data


def parse_config(path=None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """File values first, then dotted-path ``overrides`` on top."""
    tree = load_file(path) if path else {}
    tree = copy.deepcopy(tree)
    for dotted, value in (overrides or {}).items():
        set_dotted(tree, dotted, value)
    return resolve(tree)

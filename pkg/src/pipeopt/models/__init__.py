"""Binary classifiers and cross-validated random hyperparameter search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .. import metrics
from .bayes import GaussianNB
from .knn import KNearestNeighbors
from .logistic import LogisticRegression
from .space import Choice, IntRange, LogUniform, Uniform, draw_settings
from .tree import DecisionTree, RandomForest

THRESHOLD = 0.5


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelKind:
    name: str
    space: Mapping[str, Any]
    build: Callable[[dict], Any]


def _logistic(p):
    return LogisticRegression(l2=p["l2"], max_iter=p["max_iter"])


def _tree(p):
    return DecisionTree(max_depth=p["max_depth"], min_leaf=p["min_leaf"])


def _forest(p):
    return RandomForest(n_trees=p["n_trees"], max_depth=p["max_depth"], feature_fraction=p["feature_fraction"])


def _bayes(p):
    return GaussianNB(var_smoothing=p["var_smoothing"])


def _knn(p):
    return KNearestNeighbors(k=p["k"])


# builders are module-level functions so kinds pickle into worker processes
MODEL_KINDS: dict[str, ModelKind] = {
    k.name: k
    for k in (
        ModelKind(
            "logistic_regression",
            {"l2": LogUniform(1e-4, 1e2), "max_iter": IntRange(200, 2000)},
            _logistic,
        ),
        ModelKind(
            "decision_tree",
            {"max_depth": IntRange(2, 16), "min_leaf": IntRange(1, 20)},
            _tree,
        ),
        ModelKind(
            "random_forest",
            {"n_trees": IntRange(20, 200), "max_depth": IntRange(2, 16), "feature_fraction": Uniform(0.3, 1.0)},
            _forest,
        ),
        ModelKind(
            "gaussian_nb",
            {"var_smoothing": LogUniform(1e-12, 1e-6)},
            _bayes,
        ),
        ModelKind(
            "knn",
            {"k": Choice(tuple(range(1, 26, 2)))},
            _knn,
        ),
    )
}


ALIASES = {"gaussian_naive_bayes": "gaussian_nb", "k_nearest_neighbors": "knn"}


def get_kind(name: str, space_overrides: Mapping[str, Any] | None = None) -> ModelKind:
    """Registry lookup; hyphens and long names (``k-nearest-neighbors``) are accepted.

    ``space_overrides`` maps a parameter to ``[low, high]`` (range of the
    same family as the default) or ``{"choices": [...]}``.
    """
    key = name.replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in MODEL_KINDS:
        raise ModelError(f"unknown model {name!r}; valid: {', '.join(MODEL_KINDS)}")
    kind = MODEL_KINDS[key]
    if not space_overrides:
        return kind
    space = dict(kind.space)
    for param, spec in space_overrides.items():
        if param not in space:
            raise ModelError(f"{key}: unknown hyperparameter {param!r}; valid: {', '.join(space)}")
        if isinstance(spec, Mapping) and "choices" in spec:
            space[param] = Choice(tuple(spec["choices"]))
        elif isinstance(spec, (list, tuple)) and len(spec) == 2:
            lo, hi = spec
            if lo > hi:
                raise ModelError(f"{key}.{param}: low > high")
            space[param] = type(space[param])(lo, hi) if not isinstance(space[param], Choice) else Choice((lo, hi))
        else:
            raise ModelError(f"{key}.{param}: expected [low, high] or {{choices: [...]}}")
    return ModelKind(key, space, kind.build)


@dataclass(frozen=True)
class FittedModel:
    kind: str
    hyperparameters: dict
    estimator: Any
    n_features: int

    def learned(self) -> dict:
        return self.estimator.params()


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    budget: int = 20
    scoring: str = "balanced_accuracy"
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ModelError("folds must be >= 2")
        if self.budget < 1:
            raise ModelError("budget must be >= 1")
        metrics.parse_metric(self.scoring)


def fit_model(kind: ModelKind, params: dict, X, y, seed) -> FittedModel:
    X = np.asarray(X, dtype=np.float64)
    est = kind.build(params)
    est.fit(X, np.asarray(y), rng=np.random.default_rng(seed))
    return FittedModel(kind.name, dict(params), est, X.shape[1])


def predict(model: FittedModel, X):
    """Hard labels (score >= 0.5) and scores in [0, 1]."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ModelError(f"feature count mismatch: model has {model.n_features}, input has {X.shape[-1]}")
    scores = np.clip(model.estimator.predict_proba(X), 0.0, 1.0)
    return (scores >= THRESHOLD).astype(np.int8), scores


def stratified_kfold(y, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-class shuffle then round-robin fold assignment."""
    y = np.asarray(y)
    counts = np.bincount(y.astype(np.intp), minlength=2)
    if counts.min() < folds:
        raise ModelError(f"{folds}-fold stratified CV needs >= {folds} rows per class, got {counts.tolist()}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.intp)
    offset = 0
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        fold_of[idx] = (np.arange(idx.size) + offset) % folds
        offset += idx.size
    return [(np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)) for f in range(folds)]


def cv_score(kind: ModelKind, params: dict, X, y, splits, scoring: str, seed) -> float:
    vals = []
    for f, (tr, va) in enumerate(splits):
        m = fit_model(kind, params, X[tr], y[tr], np.random.SeedSequence([*seed, f]))
        labels, scores = predict(m, X[va])
        vals.append(metrics.evaluate(scoring, y[va], labels, scores))
    return float(np.mean(vals))


@dataclass
class SearchTrace:
    settings: list[dict] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    best_index: int = 0


def random_search_fit(kind: ModelKind | str, X, y, cv: CvConfig, trace: SearchTrace | None = None):
    """Draw ``cv.budget`` settings, score each by stratified k-fold CV and
    refit the best one (earliest draw on ties) on all rows.

    Returns ``(FittedModel, cv_score)``.
    """
    if isinstance(kind, str):
        kind = get_kind(kind)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int8)
    if X.ndim != 2 or not np.isfinite(X).all():
        raise ModelError("training matrix must be 2-D and fully numeric")
    splits = stratified_kfold(y, cv.folds, cv.seed)
    settings = draw_settings(kind.space, cv.budget, np.random.default_rng([cv.seed, 1]))
    best_i, best_score = 0, -np.inf
    scores = []
    for i, params in enumerate(settings):
        s = cv_score(kind, params, X, y, splits, cv.scoring, [cv.seed, 2, i])
        scores.append(s)
        if s > best_score:
            best_i, best_score = i, s
    if trace is not None:
        trace.settings, trace.scores, trace.best_index = settings, scores, best_i
    model = fit_model(kind, settings[best_i], X, y, np.random.SeedSequence([cv.seed, 3, best_i]))
    return model, float(best_score)


__all__ = [
    "CvConfig",
    "DecisionTree",
    "FittedModel",
    "GaussianNB",
    "KNearestNeighbors",
    "LogisticRegression",
    "MODEL_KINDS",
    "ModelError",
    "ModelKind",
    "RandomForest",
    "get_kind",
    "fit_model",
    "predict",
    "random_search_fit",
    "stratified_kfold",
]

import numpy as np
import pytest

from pipeopt import metrics
from pipeopt.models import (
    MODEL_KINDS,
    CvConfig,
    DecisionTree,
    GaussianNB,
    KNearestNeighbors,
    ModelError,
    RandomForest,
    SearchTrace,
    fit_model,
    get_kind,
    predict,
    random_search_fit,
    stratified_kfold,
)
from pipeopt.models.logistic import LogisticRegression, loss_and_grad


def numeric_grad(w, X, y, l2, h=1e-6):
    g = np.empty_like(w)
    for i in range(len(w)):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (loss_and_grad(w + e, X, y, l2)[0] - loss_and_grad(w - e, X, y, l2)[0]) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(15, 3))
    y = rng.integers(0, 2, 15).astype(float)
    w = rng.normal(size=4)
    l2 = 10 ** rng.uniform(-3, 0)
    g = loss_and_grad(w, X, y, l2)[1]
    num = numeric_grad(w, X, y, l2)
    assert np.linalg.norm(g - num) <= 1e-6 * max(np.linalg.norm(num), 1e-8)


def test_logistic_converges():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 4))
    y = (X @ [1.0, -1, 0.5, 0] + rng.normal(size=200) > 0).astype(float)
    m = LogisticRegression(l2=0.1, max_iter=5000).fit(X, y)
    w = np.r_[m.intercept_, m.coef_]
    assert np.linalg.norm(loss_and_grad(w, X, y, 0.1)[1]) < 1e-4


def separable_fixture():
    rng = np.random.default_rng(4)
    X = rng.uniform(-3, 3, size=(80, 2))
    margin = X[:, 0] + 2 * X[:, 1] - 0.5
    X = X[np.abs(margin) > 0.3]
    y = (X[:, 0] + 2 * X[:, 1] - 0.5 > 0).astype(np.int8)
    return X, y


def test_separable_fixture_training_accuracy():
    X, y = separable_fixture()
    # the generating line separates every point: exhaustive check
    side = X[:, 0] + 2 * X[:, 1] - 0.5
    assert ((side > 0) == (y == 1)).all()
    kind = get_kind("logistic_regression", {"l2": [1e-4, 1e-3]})
    model, score = random_search_fit(kind, X, y, CvConfig(folds=3, budget=2, seed=0))
    labels, _ = predict(model, X)
    assert metrics.evaluate("balanced_accuracy", y, labels) == 1.0
    # the fitted line separates too
    est = model.estimator
    assert (((X @ est.coef_ + est.intercept_) > 0) == (y == 1)).all()


def test_budget_one_cv_score_is_fold_mean():
    X, y = separable_fixture()
    cv = CvConfig(folds=4, budget=1, seed=3)
    trace = SearchTrace()
    model, score = random_search_fit("gaussian_nb", X, y, cv, trace)
    assert trace.best_index == 0 and model.hyperparameters == trace.settings[0]
    folds = []
    kind = get_kind("gaussian_nb")
    for f, (tr, va) in enumerate(stratified_kfold(y, 4, 3)):
        m = fit_model(kind, trace.settings[0], X[tr], y[tr], np.random.SeedSequence([3, 2, 0, f]))
        folds.append(metrics.evaluate("balanced_accuracy", y[va], predict(m, X[va])[0]))
    assert score == pytest.approx(np.mean(folds), abs=1e-15)


def test_ties_keep_earliest_draw():
    X, y = separable_fixture()
    trace = SearchTrace()
    random_search_fit(get_kind("knn", {"k": {"choices": [1]}}), X, y, CvConfig(folds=3, budget=4), trace)
    assert len(set(trace.scores)) == 1 and trace.best_index == 0


def test_too_few_minority_rows():
    X = np.random.default_rng(0).normal(size=(20, 2))
    y = np.array([1, 1, 1] + [0] * 17)
    with pytest.raises(ModelError):
        random_search_fit("logistic_regression", X, y, CvConfig(folds=5, budget=1))


def test_stratified_folds_partition():
    y = np.array([0] * 17 + [1] * 8)
    splits = stratified_kfold(y, 4, 1)
    allva = np.sort(np.concatenate([va for _, va in splits]))
    assert allva.tolist() == list(range(25))
    for tr, va in splits:
        assert set(tr).isdisjoint(va)
        assert abs(y[va].sum() - 8 / 4) <= 1


def test_nb_equidistant_is_half():
    X = np.array([[-1.0], [-3.0], [1.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    nb = GaussianNB(1e-9).fit(X, y)
    assert nb.predict_proba([[0.0]])[0] == pytest.approx(0.5, abs=1e-12)


def test_knn_unanimous():
    X = np.array([[0.0, 0], [0.1, 0], [0, 0.1], [5, 5], [5, 6]])
    y = np.array([1, 1, 1, 0, 0])
    m = fit_model(get_kind("knn"), {"k": 3}, X, y, seed=0)
    labels, scores = predict(m, [[0.05, 0.05]])
    assert scores[0] == 1.0 and labels[0] == 1


def test_tree_leaf_fraction():
    X = np.zeros((10, 1))  # nothing to split on
    y = np.array([1] * 7 + [0] * 3)
    t = DecisionTree().fit(X, y)
    assert t.n_nodes == 1
    assert t.predict_proba(X[:1])[0] == pytest.approx(0.7)


def test_tree_leaves_match_class_fraction():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(150, 3))
    y = (X[:, 0] + rng.normal(size=150) > 0).astype(int)
    t = DecisionTree(max_depth=3, min_leaf=5).fit(X, y)
    leaves = t.apply(X)
    for leaf in np.unique(leaves):
        assert t.feature_[leaf] == -1
        assert t.value_[leaf] == pytest.approx(y[leaves == leaf].mean())


def test_unbounded_tree_fits_distinct_rows():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(100, 2))
    y = rng.integers(0, 2, 100)
    t = DecisionTree(max_depth=None, min_leaf=1).fit(X, y)
    assert ((t.predict_proba(X) >= 0.5) == y).all()


def test_forest_single_tree_equals_tree():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(80, 4))
    y = (X[:, 1] > 0.2).astype(int)
    f = RandomForest(n_trees=1, max_depth=4, feature_fraction=1.0, bootstrap=False).fit(X, y)
    t = DecisionTree(max_depth=4).fit(X, y)
    np.testing.assert_array_equal(f.predict_proba(X), t.predict_proba(X))


def test_forest_is_mean_of_trees():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] > 0).astype(int)
    f = RandomForest(n_trees=7, max_depth=3, feature_fraction=0.5).fit(X, y, np.random.default_rng(1))
    np.testing.assert_allclose(f.predict_proba(X), np.mean([t.predict_proba(X) for t in f.trees_], axis=0))


@pytest.mark.parametrize("name", list(MODEL_KINDS))
def test_determinism_and_score_range(name):
    rng = np.random.default_rng(8)
    X = rng.normal(size=(90, 3))
    y = (X[:, 0] + rng.normal(size=90) > 0.5).astype(int)
    kind = get_kind(name, {"n_trees": [5, 10]} if name == "random_forest" else None)
    cv = CvConfig(folds=3, budget=3, seed=11)
    a, sa = random_search_fit(kind, X, y, cv)
    b, sb = random_search_fit(kind, X, y, cv)
    assert sa == sb and a.hyperparameters == b.hyperparameters
    la, pa = predict(a, X)
    lb, pb = predict(b, X)
    np.testing.assert_array_equal(pa, pb)
    assert ((pa >= 0) & (pa <= 1)).all()
    np.testing.assert_array_equal(la, (pa >= 0.5).astype(int))
    with pytest.raises(ModelError):
        predict(a, X[:, :2])


def test_default_spaces_draw_valid_settings():
    rng = np.random.default_rng(0)
    for kind in MODEL_KINDS.values():
        for _ in range(50):
            p = {k: v.draw(rng) for k, v in kind.space.items()}
            kind.build(p)
            if kind.name == "knn":
                assert p["k"] % 2 == 1 and 1 <= p["k"] <= 25
            if kind.name == "logistic_regression":
                assert 1e-4 <= p["l2"] <= 1e2 and 200 <= p["max_iter"] <= 2000


def test_unknown_model():
    with pytest.raises(ModelError, match="valid: logistic_regression"):
        get_kind("xgboost")
    assert get_kind("k-nearest-neighbors").name == "knn"
    assert get_kind("gaussian-naive-bayes").name == "gaussian_nb"
    assert get_kind("logistic-regression").name == "logistic_regression"

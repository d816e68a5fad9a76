import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pipeopt.sensitivity import PrccReport, SensitivityError, prcc, rank_transform, top_m

from oracles import prcc_by_inversion


def test_rank_examples():
    assert rank_transform([10, 30, 20]).tolist() == [1, 3, 2]
    assert rank_transform([5, 5, 7]).tolist() == [1.5, 1.5, 3]
    assert rank_transform([4, 4, 4, 4]).tolist() == [2.5] * 4


def test_rank_column_sums():
    rng = np.random.default_rng(0)
    R = rank_transform(rng.integers(0, 4, size=(17, 3)))
    assert np.allclose(R.sum(axis=0), 17 * 18 / 2)


def test_single_column_is_spearman():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 5, 40)
    y = x + rng.normal(size=40)
    assert prcc(x, y).coefficients[0] == pytest.approx(stats.spearmanr(x, y).statistic, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_matches_inversion_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(50, 4)).astype(float)
    y = X @ rng.normal(size=4) + rng.normal(size=50)
    got = np.array(prcc(X, y).coefficients)
    assert np.max(np.abs(got - prcc_by_inversion(X, y))) < 1e-9


def test_monotone_driver_recovered():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 4))
    y = np.exp(X[:, 0] + 0.05 * rng.normal(size=200))
    r = prcc(X, y)
    assert abs(r.coefficients[0]) > 0.99
    assert abs(r.coefficients[0] - prcc_by_inversion(X, y)[0]) < 1e-9


def test_constant_column_flagged():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 3))
    X[:, 0] = 2.0
    r = prcc(X, X[:, 1] + rng.normal(size=30))
    assert r.coefficients[0] == 0.0 and r.degenerate[0]
    assert not r.degenerate[1]
    assert r.influence_rank[0] == 3


def test_constant_output_all_degenerate():
    X = np.random.default_rng(0).normal(size=(10, 2))
    r = prcc(X, np.ones(10))
    assert r.all_degenerate and r.warnings


def test_too_few_rows():
    with pytest.raises(SensitivityError):
        prcc(np.zeros((4, 2)) + np.arange(4)[:, None], np.arange(4.0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_invariances(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(25, 3))
    y = X[:, 0] - X[:, 2] + rng.normal(size=25)
    base = np.array(prcc(X, y).coefficients)
    Xt = X.copy()
    Xt[:, 1] = np.exp(Xt[:, 1])
    np.testing.assert_allclose(prcc(Xt, y ** 3).coefficients, base, atol=1e-12)
    neg = prcc(X, -y)
    np.testing.assert_allclose(neg.coefficients, -base, atol=1e-12)
    assert top_m(neg, 2) == top_m(prcc(X, y), 2)
    assert np.all(np.abs(base) <= 1 + 1e-12)


def report(coefs, degenerate=None):
    degenerate = degenerate or [False] * len(coefs)
    return PrccReport(tuple(f"s{i}" for i in range(len(coefs))), tuple(coefs), tuple(degenerate), (), 20)


def test_top_m_examples():
    r = report([0.9, -0.95, 0.1, 0.0, 0.2], [False, False, False, True, False])
    assert top_m(r, 2) == [1, 0]
    assert top_m(report([0.0, 0.4, 0.0], [True, False, True]), 1) == [1]
    assert top_m(report([0.5, -0.5, 0.5, 0.5]), 2) == [0, 1]


def test_top_m_fewer_than_m():
    assert top_m(report([0.3, 0.0], [False, True]), 2) == [0]

import numpy as np
import pytest
from scipy import stats

from depapprox.errors import ResourceLimitError
from depapprox.models import (
    IndependentModel,
    build_model,
    char_diff,
    factorial_power,
    group_blocks,
    identity,
    k1k2,
    k1k2_a,
    k1k2_blocks,
    k1k2_sequence,
    two_runs,
)

from oracles import expect, independent_outcomes, k1k2_blocks as k1k2_oracle, sum_pmf, two_runs_blocks

X = identity()


def test_two_runs_small_law():
    F = two_runs(2, 0.5).exact_distribution()
    assert np.allclose(F.weights, [5 / 8, 2 / 8, 1 / 8], atol=1e-15)


@pytest.mark.parametrize("n,p", [(1, 0.3), (6, 0.2), (11, 0.5)])
def test_two_runs_matches_enumeration(n, p):
    Xs, prob = two_runs_blocks(n, p)
    F = two_runs(n, p).exact_distribution()
    ref = sum_pmf(Xs, prob)
    assert np.allclose(F.on_window(0, len(ref) - 1), ref, atol=1e-12, rtol=0)


@pytest.mark.parametrize("n,k1,k2,p", [(14, 1, 2, 0.4), (15, 2, 2, 0.3), (13, 2, 1, 0.2)])
def test_k1k2_matches_enumeration(n, k1, k2, p):
    Xs, prob = k1k2_oracle(n, k1, k2, p)
    model = k1k2(n, k1, k2, p)
    ref = sum_pmf(Xs, prob)
    assert np.allclose(model.exact_distribution().on_window(0, len(ref) - 1), ref, atol=1e-12, rtol=0)
    # grouping preserves the sum law
    assert model.exact_distribution().allclose(k1k2_sequence(n, k1, k2, p).exact_distribution(), atol=1e-12)
    # window expectations against enumeration
    for start in range(1, model.n + 1):
        for funcs in [(X,), (factorial_power(2),), (X, X), (X, factorial_power(2), X)]:
            if start + len(funcs) - 1 > model.n:
                continue
            oracle = expect(Xs, prob, start, [lambda v, f=f: f(v) for f in funcs])
            assert np.isclose(model.window_expectation(start, funcs), oracle, atol=1e-12)


@pytest.mark.parametrize(
    "model,oracle",
    [
        (two_runs(9, 0.3), lambda: two_runs_blocks(9, 0.3)),
        (k1k2(15, 1, 2, 0.35), lambda: k1k2_oracle(15, 1, 2, 0.35)),
    ],
)
def test_one_dependence_by_enumeration(model, oracle):
    Xs, prob = oracle()
    f, g = (lambda v: v**2 + 1.0), (lambda v: np.cos(v))
    for j in range(1, model.n + 1):
        for k in range(j + 2, model.n + 1):
            joint = np.dot(prob, f(Xs[:, j - 1]) * g(Xs[:, k - 1]))
            assert abs(joint - np.dot(prob, f(Xs[:, j - 1])) * np.dot(prob, g(Xs[:, k - 1]))) < 1e-12
    assert model.dependence == 1


def test_two_runs_window_values():
    p = 0.2
    m = two_runs(10, p)
    assert np.isclose(m.window_expectation(4, (X, X)).real, p**3)
    assert np.isclose(m.window_expectation(4, (char_diff(0.0),)), 0.0)
    assert np.isclose(m.exact_distribution().moment(), 10 * p**2)


def test_k1k2_block_moments():
    n, k1, k2, p = 405, 2, 2, 0.1
    m = k1 + k2
    a = k1k2_a(k1, k2, p)
    model = k1k2(n, k1, k2, p)
    K, frac = k1k2_blocks(n, m)
    assert model.n == K + (1 if frac > 0 else 0)
    assert np.isclose(model.mean(3), m * a)
    assert np.isclose(model.mean(model.n), frac * m * a)
    assert np.isclose(model.window_expectation(5, (X, X)).real, m * (m + 1) * a**2 / 2)
    # block variables are Bernoulli: at most one occurrence per block of m
    assert np.isclose(model.factorial_moment(3, 2), 0.0)


@pytest.mark.parametrize("n,k1,k2,p", [(60, 2, 2, 0.2), (300, 1, 3, 0.3), (1000, 3, 2, 0.15)])
def test_k1k2_mean_and_variance(n, k1, k2, p):
    m = k1 + k2
    a = k1k2_a(k1, k2, p)
    F = k1k2(n, k1, k2, p).exact_distribution()
    mean = F.moment(1)
    var = F.moment(2) - mean**2
    assert np.isclose(mean, (n - m + 1) * a, rtol=1e-10)
    assert np.isclose(var, (n - m + 1) * a + (1 - 4 * m + 3 * m * m - n * (2 * m - 1)) * a**2, rtol=1e-8)


def test_independent_model():
    pmfs = [[0.5, 0.3, 0.2], [0.9, 0.1], [0.6, 0.0, 0.4]]
    model = IndependentModel(pmfs)
    Xs, prob = independent_outcomes(pmfs)
    ref = sum_pmf(Xs, prob)
    assert np.allclose(model.exact_distribution().on_window(0, len(ref) - 1), ref)
    assert model.dependence == 0
    bern = build_model({"kind": "bernoulli", "p": 0.2, "n": 12})
    assert np.allclose(bern.exact_distribution().weights, stats.binom.pmf(np.arange(13), 12, 0.2))


def test_group_independent_preserves_law():
    base = build_model({"kind": "independent", "n": 7, "pmf": [0.7, 0.2, 0.1]})
    grouped = group_blocks(base, 3)
    assert grouped.n == 3
    assert grouped.exact_distribution().allclose(base.exact_distribution(), atol=1e-12)
    with pytest.raises(ValueError):
        group_blocks(base, 8)


def test_build_model_shapes_and_errors():
    assert build_model('{"kind": "two_runs", "n": 5, "p": 0.1}').n == 5
    assert build_model({"kind": "k1k2", "n": 50, "k1": 2, "k2": 2, "p": 0.1}).dependence == 1
    assert build_model({"kind": "k1k2_sequence", "n": 50, "k1": 2, "k2": 2, "p": 0.1}).dependence == 3
    g = build_model({"kind": "grouped", "base": {"kind": "k1k2_sequence", "n": 30, "k1": 1, "k2": 1, "p": 0.3}, "m": 2})
    assert g.dependence == 1
    for bad in ['{"kind": "two_runs", "n": 5}', '{"kind": "two_runs", "n": 5, "p": 1.5}', "{", '{"kind": "x"}', "[]"]:
        with pytest.raises(ValueError):
            build_model(bad)
    with pytest.raises(ValueError):
        k1k2(10, 0, 2, 0.1)


def test_window_limit():
    m = two_runs(100, 0.1)
    with pytest.raises(ResourceLimitError):
        m.window_expectation(1, (X,) * (m.max_window + 1))
    with pytest.raises(ValueError):
        m.window_expectation(99, (X, X, X))

import numpy as np
import pytest

from depapprox.cumulants import (
    check_conditions,
    gamma_set,
    hat_e,
    hat_e_plus,
    k1k2_closed_form,
    two_runs_closed_form,
)
from depapprox.models import IndependentModel, build_model, char_diff, factorial_power, identity, k1k2, k1k2_a, k1k2_sequence, two_runs

from oracles import hat_e_recursive, k1k2_blocks, two_runs_blocks

X = identity()
F2 = factorial_power(2)


def test_hat_e_vanishes_for_independent():
    model = IndependentModel([[0.6, 0.3, 0.1]] * 6)
    for funcs in [(X, X), (X, F2, X), (X, X, X, X), (char_diff(0.4), char_diff(0.4))]:
        assert abs(hat_e(model, 2, funcs)) < 1e-15


def test_hat_e_two_runs_pair():
    p = 0.3
    assert np.isclose(hat_e(two_runs(12, p), 5, (X, X)).real, p**3 - p**4)


def test_hat_e_k1k2_interior_pair():
    n, k1, k2, p = 200, 2, 2, 0.15
    m, a = k1 + k2, k1k2_a(k1, k2, p)
    assert np.isclose(hat_e(k1k2(n, k1, k2, p), 7, (X, X)).real, -m * (m - 1) * a**2 / 2)


def test_hat_e_plus_small_cases():
    model = two_runs(10, 0.4)
    assert np.isclose(hat_e_plus(model, 3, (X,)), model.mean(3))
    pair = model.window_expectation(3, (X, X)).real + model.mean(3) * model.mean(4)
    assert np.isclose(hat_e_plus(model, 3, (X, X)), pair)
    with pytest.raises(ValueError):
        hat_e_plus(model, 3, (char_diff(1.0), X))


def test_centered_moments_against_enumeration():
    n, k1, k2, p = 15, 1, 2, 0.35
    model = k1k2(n, k1, k2, p)
    Xs, prob = k1k2_blocks(n, k1, k2, p)
    ident = lambda v: v.astype(float)
    ff = lambda v: v * (v - 1.0)
    z = lambda v: np.exp(0.7j * v) - 1.0
    cases = [((X, X, X, X), [ident] * 4), ((F2, X, X), [ff, ident, ident]), ((char_diff(0.7),) * 3, [z] * 3)]
    for start in (1, 2):
        for funcs, oracle_funcs in cases:
            assert np.isclose(hat_e(model, start, funcs), hat_e_recursive(Xs, prob, start, oracle_funcs), atol=1e-14)
            if funcs[0].is_real:
                plus = hat_e_recursive(Xs, prob, start, oracle_funcs, sign=1.0).real
                assert np.isclose(hat_e_plus(model, start, funcs), plus, atol=1e-14)
                assert hat_e_plus(model, start, funcs) >= abs(hat_e(model, start, funcs).real) - 1e-15


def test_window_checks():
    model = two_runs(5, 0.2)
    with pytest.raises(ValueError):
        hat_e(model, 4, (X, X, X))
    with pytest.raises(ValueError):
        hat_e(model, 1, ())


@pytest.mark.parametrize("n,p", [(5, 0.5), (40, 0.1), (300, 0.03), (2000, 0.2)])
def test_two_runs_closed_forms(n, p):
    cs = gamma_set(two_runs(n, p))
    assert np.allclose([cs.gamma1, cs.gamma2, cs.gamma3], two_runs_closed_form(n, p), rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("n,k1,k2,p", [(40, 2, 2, 0.1), (503, 1, 3, 0.2), (1000, 3, 3, 0.3)])
def test_k1k2_closed_forms(n, k1, k2, p):
    cs = gamma_set(k1k2(n, k1, k2, p))
    assert np.allclose([cs.gamma1, cs.gamma2, cs.gamma3], k1k2_closed_form(n, k1, k2, p), rtol=1e-10, atol=1e-14)


def test_independent_bernoulli_cumulants():
    ps = np.array([0.01, 0.004, 0.02, 0.008, 0.015])
    cs = gamma_set(build_model({"kind": "bernoulli", "p": ps.tolist()}))
    assert np.isclose(cs.gamma1, ps.sum())
    assert np.isclose(cs.gamma2, -0.5 * np.sum(ps**2))
    assert np.isclose(cs.gamma3, np.sum(ps**3) / 3)
    # R0 = sum(nu2 + nu1^2 + E X_{k-1} X_k) with X_0 = 0
    assert np.isclose(cs.r0, np.sum(ps**2) + np.sum(ps[:-1] * ps[1:]))


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "two_runs", "n": 60, "p": 0.2},
        {"kind": "k1k2", "n": 300, "k1": 2, "k2": 1, "p": 0.3},
        {"kind": "independent", "n": 20, "pmf": [0.7, 0.2, 0.1]},
    ],
)
def test_mean_and_variance_match_exact(spec):
    model = build_model(spec)
    cs = gamma_set(model)
    F = model.exact_distribution()
    mean = F.moment(1)
    assert np.isclose(cs.gamma1, mean, rtol=1e-10)
    assert np.isclose(cs.gamma1 + 2 * cs.gamma2, F.moment(2) - mean**2, rtol=1e-8, atol=1e-12)


def test_condition_flags():
    f = check_conditions(two_runs(1000, 0.05))
    assert f.nu12 and f.lambda_ok and f.ab3 and f.implication_ok
    assert not check_conditions(build_model({"kind": "bernoulli", "p": 0.5, "n": 10})).nu12
    n, k1, k2, p = 2000, 2, 2, 0.05
    assert (k1 + k2) * k1k2_a(k1, k2, p) <= 0.01 and (n - 3) * k1k2_a(k1, k2, p) >= 1
    f = check_conditions(k1k2(n, k1, k2, p))
    assert f.nu12 and f.ab3 and f.implication_ok
    cs = gamma_set(two_runs(1000, 0.05))
    assert cs.flags.lambda_ok == (cs.lam > 0)
    assert cs.lam > 0.2 * cs.gamma1
    assert "nu12" in cs.flags.as_string()


def test_remainders_are_positive_and_ordered():
    cs = gamma_set(two_runs(500, 0.05))
    assert cs.r0 > cs.r1 > cs.r2 > 0


def test_rejects_m_dependent():
    with pytest.raises(ValueError):
        gamma_set(k1k2_sequence(40, 2, 2, 0.1))
    with pytest.raises(ValueError):
        gamma_set(two_runs(10, 0.1), n=11)

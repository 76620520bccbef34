import math

import numpy as np
import pytest

from depapprox.approximants import (
    Kind,
    bi_params,
    correction_coefficient,
    expansion_factor,
    k1k2_expansion_coefficient,
    make_approximant,
    nb_params,
    nb_pmf,
    tp_params,
)
from depapprox.cumulants import ConditionFlags, CumulantSet, gamma_set
from depapprox.errors import DegenerateParameterError, PreconditionError
from depapprox.measure import bernoulli, conv_power, norm
from depapprox.models import k1k2, two_runs


def cset(g1, g2=0.0, g3=0.0):
    flags = ConditionFlags(True, True, True, True)
    return CumulantSet(g1, g2, g3, lam=g1, r0=0.0, r1=0.0, r2=0.0, n=1, flags=flags)


def test_kind_parsing():
    assert Kind.parse("g_signed") is Kind.G
    assert Kind.parse("NB+") is Kind.NB_EXPANDED
    assert Kind.parse(Kind.TP) is Kind.TP
    with pytest.raises(ValueError):
        Kind.parse("normal")


def test_poisson():
    a = make_approximant("pois", cset(0.5))
    assert np.isclose(a.measure[0], math.exp(-0.5))
    assert a.measure.mass() >= 1 - a.truncation_mass - 1e-15
    assert a.truncation_mass < 1e-12


@pytest.mark.parametrize("g1,g2", [(2.0, 0.1), (5.0, -0.4), (30.0, 0.9)])
def test_signed_compound_poisson_matches_two_moments(g1, g2):
    m = make_approximant("g", cset(g1, g2)).measure
    mean = m.moment(1)
    assert np.isclose(m.mass(), 1.0, atol=1e-10)
    assert np.isclose(mean, g1, atol=1e-8)
    assert np.isclose(m.factorial_moment(2) - mean**2, 2 * g2, atol=1e-8)


def test_translated_poisson():
    cs = cset(6.0, -1.3)
    params = tp_params(cs)
    assert params["a"] == math.floor(2.6) and 0 <= params["delta_tilde"] < 1
    assert np.isclose(params["a"] + params["delta_tilde"], -2 * cs.gamma2)
    m = make_approximant("tp", cs).measure
    assert m.offset >= params["a"]
    assert np.isclose(m.moment(1), cs.gamma1, atol=1e-9)
    with pytest.raises(PreconditionError):
        make_approximant("tp", cset(0.5, 0.01))


def test_negative_binomial():
    cs = gamma_set(two_runs(2000, 0.03))
    prm = nb_params(cs)
    odds = (1 - prm["q_bar"]) / prm["q_bar"]
    assert np.isclose(prm["r"] * odds, cs.gamma1, rtol=1e-12)
    assert np.isclose(prm["r"] * odds**2, 2 * cs.gamma2, rtol=1e-12)
    a = make_approximant("nb", cs)
    k = a.measure.support
    assert np.allclose(a.measure.weights, nb_pmf(k, prm["r"], prm["q_bar"]), rtol=1e-9, atol=1e-300)
    assert 1 - 1e-12 <= a.measure.mass() <= 1 + 1e-12
    with pytest.raises(PreconditionError):
        make_approximant("nb", cset(2.0, -0.1))
    with pytest.raises(DegenerateParameterError):
        make_approximant("nb", cset(2.0, 0.0))


def test_binomial():
    cs = gamma_set(k1k2(3000, 2, 2, 0.1))
    prm = bi_params(cs)
    N, p = int(prm["N"]), prm["p_bar"]
    assert 0 <= prm["epsilon"] < 1
    assert np.isclose(N + prm["epsilon"], cs.gamma1**2 / (2 * abs(cs.gamma2)))
    m = make_approximant("bi", cs).measure
    assert np.isclose(m.moment(1), cs.gamma1, rtol=1e-10)
    assert norm(m - conv_power(bernoulli(p), N)) < 1e-11
    with pytest.raises(PreconditionError):
        make_approximant("bi", cset(2.0, 0.1))
    with pytest.raises(PreconditionError):
        make_approximant("bi", cset(0.5, -0.01))
    with pytest.raises(DegenerateParameterError):
        make_approximant("bi", cset(2.0, 0.0))


def test_expansion_factors():
    cs = cset(3.0, 0.2, 0.05)
    f = expansion_factor("pois+", cs)
    assert f.offset == 0 and np.allclose(f.weights, [1 + 0.2, -0.4, 0.2])
    assert np.isclose(correction_coefficient("g+", cs), 0.05)
    assert np.isclose(correction_coefficient("nb+", cs), 0.05 - 4 * 0.04 / 9)
    assert np.allclose(expansion_factor("g+", cs).weights, [1 - 0.05, 0.15, -0.15, 0.05])
    with pytest.raises(ValueError):
        expansion_factor("tp", cs)


def test_expanded_measures_are_base_times_factor():
    cs = gamma_set(two_runs(800, 0.04))
    for kind, base in [("pois+", "pois"), ("g+", "g"), ("nb+", "nb")]:
        exp_m = make_approximant(kind, cs).measure
        # mass is preserved because U^j has zero mass
        assert np.isclose(exp_m.mass(), make_approximant(base, cs).measure.mass(), atol=1e-12)


def test_k1k2_coefficient_override():
    n, k1, k2, p = 4000, 2, 2, 0.05
    A = k1k2_expansion_coefficient(n, k1, k2, p)
    a = (1 - p) ** 2 * p**2
    assert np.isclose(A, a**3 / 6 * (n - 3) * 4 * 3)
    cs = gamma_set(k1k2(n, k1, k2, p))
    m = make_approximant("bi+", cs, coefficient=A)
    assert m.params["correction"] == A


def test_parameter_bounds_under_conditions():
    for n, p in [(1000, 0.05), (5000, 0.02)]:
        cs = gamma_set(two_runs(n, p))
        assert cs.flags.nu12 and cs.flags.ab3
        assert nb_params(cs)["odds"] <= 0.15
    cs = gamma_set(k1k2(5000, 2, 2, 0.05))
    assert cs.flags.nu12 and cs.flags.ab3
    assert bi_params(cs)["p_bar"] < 0.2

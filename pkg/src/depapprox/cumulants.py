"""Centered mixed moments, factorial cumulants and remainder terms.

``hat_e`` is Heinrich's recursively centered expectation

    hat_e(Y_1..Y_k) = E Y_1...Y_k - sum_{j<k} hat_e(Y_1..Y_j) E Y_{j+1}...Y_k,

and ``hat_e_plus`` is the same recursion with ``+`` in place of ``-``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from .models import DependentModel, WindowFunc, factorial_power, identity

X = identity()
F2 = factorial_power(2)
F3 = factorial_power(3)


def _check(model: DependentModel, start: int, funcs: Sequence[WindowFunc]) -> Tuple[WindowFunc, ...]:
    funcs = tuple(funcs)
    if not funcs:
        raise ValueError("need at least one window function")
    if start < 1 or start + len(funcs) - 1 > model.n:
        raise ValueError(f"window [{start}, {start + len(funcs) - 1}] outside [1, {model.n}]")
    return funcs


def _recursion(model: DependentModel, start: int, funcs: Tuple[WindowFunc, ...], sign: float) -> complex:
    k = len(funcs)
    cache = model._expectation_cache
    key = ("hat", sign, model.window_key(start, k), funcs)
    if key in cache:
        return cache[key]
    prefix = [model.window_expectation(start, funcs[:1])]
    for length in range(2, k + 1):
        val = model.window_expectation(start, funcs[:length])
        for j in range(1, length):
            val += sign * prefix[j - 1] * model.window_expectation(start + j, funcs[j:length])
        prefix.append(val)
    cache[key] = prefix[-1]
    return prefix[-1]


def hat_e(model: DependentModel, start: int, funcs: Sequence[WindowFunc]) -> complex:
    """Centered mixed moment of ``f_i(X_{start+i})`` over a contiguous window."""
    return _recursion(model, start, _check(model, start, funcs), -1.0)


def hat_e_plus(model: DependentModel, start: int, funcs: Sequence[WindowFunc]) -> float:
    """The all-plus majorant of :func:`hat_e` (real-valued functions only)."""
    funcs = _check(model, start, funcs)
    if not all(f.is_real for f in funcs):
        raise ValueError("hat_e_plus takes real-valued window functions")
    return _recursion(model, start, funcs, 1.0).real


# -- zero-padded helpers: summands with index < 1 are identically zero -----


def _he(model, start, funcs) -> float:
    if start < 1 or start + len(funcs) - 1 > model.n:
        return 0.0
    return hat_e(model, start, funcs).real


def _hep(model, start, funcs) -> float:
    if start < 1 or start + len(funcs) - 1 > model.n:
        return 0.0
    return hat_e_plus(model, start, funcs)


def _ex(model, start, funcs) -> float:
    if start < 1 or start + len(funcs) - 1 > model.n:
        return 0.0
    return model.window_expectation(start, funcs).real


def _hep2_pair(model, k) -> float:
    """hat_e_plus with one factorial-square factor on the pair (k-1, k)."""
    return _hep(model, k - 1, (F2, X)) + _hep(model, k - 1, (X, F2))


def _hep2_triple(model, k) -> float:
    return _hep(model, k - 2, (F2, X, X)) + _hep(model, k - 2, (X, F2, X)) + _hep(model, k - 2, (X, X, F2))


def _hep3_pair(model, k) -> float:
    return _hep(model, k - 1, (F3, X)) + _hep(model, k - 1, (F2, F2)) + _hep(model, k - 1, (X, F3))


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionFlags:
    nu12: bool
    lambda_ok: bool
    ab3: bool
    # lambda > 0.2 * gamma1 whenever nu12 and ab3 hold
    implication_ok: bool

    def as_string(self) -> str:
        names = [k for k, v in asdict(self).items() if v]
        return "|".join(names) if names else "none"


@dataclass(frozen=True)
class CumulantSet:
    """Factorial cumulants, condition quantity and remainders of one instance."""

    gamma1: float
    gamma2: float
    gamma3: float
    lam: float
    r0: float
    r1: float
    r2: float
    n: int
    flags: ConditionFlags
    sum_nu2: float = 0.0
    sum_abs_cov: float = 0.0
    max_nu1: float = 0.0

    @property
    def lambda_(self) -> float:
        return self.lam

    def as_dict(self) -> Dict[str, float]:
        d = asdict(self)
        d.update(asdict(self.flags))
        del d["flags"]
        return d


def _flags(max_nu1_ok: bool, lam: float, gamma1: float, sum_nu2: float, sum_abs_cov: float) -> ConditionFlags:
    ab3 = sum_nu2 <= gamma1 / 20 and sum_abs_cov <= gamma1 / 20
    return ConditionFlags(
        nu12=max_nu1_ok,
        lambda_ok=lam > 0,
        ab3=ab3,
        implication_ok=(not (max_nu1_ok and ab3)) or lam > 0.2 * gamma1,
    )


def gamma_set(model: DependentModel, n: Optional[int] = None) -> CumulantSet:
    """Compute ``Gamma_1..3``, ``lambda`` and ``R_0..2`` for a 1-dependent model."""
    if n is not None and n != model.n:
        raise ValueError(f"model has {model.n} summands, not {n}")
    if model.dependence > 1:
        raise ValueError(f"model is {model.dependence}-dependent; group it into 1-dependent blocks first")
    n = model.n
    nu = {j: [0.0] * 4 + [model.factorial_moment(k, j) for k in range(1, n + 1)] for j in (1, 2, 3, 4)}

    def v(j, k):  # nu_j(k) with the zero-padding convention; offset by 3
        return nu[j][k + 3] if k >= -2 else 0.0

    g1 = g2 = g3 = 0.0
    r0 = r1 = r2 = 0.0
    s_nu2 = s_cov = s_pair = 0.0
    nu12 = True
    max_nu1 = 0.0
    for k in range(1, n + 1):
        n1, n2, n3, n4 = v(1, k), v(2, k), v(3, k), v(4, k)
        max_nu1 = max(max_nu1, n1)
        if n1 > 0.01 or n2 > n1:
            nu12 = False
        he_pair = _he(model, k - 1, (X, X))
        he_triple = _he(model, k - 2, (X, X, X))
        e_pair = _ex(model, k - 1, (X, X))
        g1 += n1
        g2 += 0.5 * (n2 - n1 * n1) + he_pair
        g3 += (n3 - 3 * n1 * n2 + 2 * n1**3) / 6.0
        g3 += -(v(1, k - 1) + n1) * he_pair
        g3 += 0.5 * (_he(model, k - 1, (F2, X)) + _he(model, k - 1, (X, F2)))
        g3 += he_triple
        s_nu2 += n2
        s_cov += abs(he_pair)
        s_pair += e_pair

        lag3 = v(1, k - 2) + v(1, k - 1) + n1
        hp2 = _hep2_pair(model, k)
        hp_triple = _hep(model, k - 2, (X, X, X))
        r0 += n2 + n1 * n1 + e_pair
        r1 += n1**3 + n1 * n2 + n3 + lag3 * e_pair + hp2 + hp_triple
        r2 += (
            n1**4
            + n2 * n2
            + n4
            + lag3 * (n3 + hp2)
            + e_pair**2
            + sum(v(1, k - l) for l in range(4)) * hp_triple
            + _hep2_triple(model, k)
            + _hep3_pair(model, k)
            + _hep(model, k - 3, (X, X, X, X))
        )
    lam = g1 - 1.52 * s_nu2 - 12.0 * s_pair
    return CumulantSet(
        gamma1=g1,
        gamma2=g2,
        gamma3=g3,
        lam=lam,
        r0=r0,
        r1=r1,
        r2=r2,
        n=n,
        flags=_flags(nu12, lam, g1, s_nu2, s_cov),
        sum_nu2=s_nu2,
        sum_abs_cov=s_cov,
        max_nu1=max_nu1,
    )


def check_conditions(model: DependentModel, n: Optional[int] = None) -> ConditionFlags:
    """Condition flags for ``(nu12)``, ``(lambda)``, ``(3ab)`` and the implied bound."""
    return gamma_set(model, n).flags


def two_runs_closed_form(n: int, p: float) -> Tuple[float, float, float]:
    """Known closed forms of ``Gamma_1..3`` for 2-runs with edge effects."""
    g1 = n * p**2
    g2 = (n * p**3 * (2 - 3 * p) - 2 * p**3 * (1 - p)) / 2
    g3 = (n * p**4 * (3 - 12 * p + 10 * p**2) - 6 * p**4 * (1 - p) * (1 - 2 * p)) / 3
    return g1, g2, g3


def k1k2_closed_form(n: int, k1: int, k2: int, p: float) -> Tuple[float, float, float]:
    """Known closed forms of ``Gamma_1..3`` for ``N(n; k1, k2)``."""
    m = k1 + k2
    a = (1 - p) ** k1 * p**k2
    w = n - m + 1
    g1 = w * a
    g2 = -(a**2 / 2) * (w * (2 * m - 1) - m * (m - 1))
    g3 = (a**3 / 6) * (w * (3 * m - 1) * (3 * m - 2) - 4 * m * (2 * m - 1) * (m - 1))
    return g1, g2, g3

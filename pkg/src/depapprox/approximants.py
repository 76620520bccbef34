"""Approximating measures built from a :class:`~depapprox.cumulants.CumulantSet`."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .cumulants import CumulantSet
from .errors import DegenerateParameterError, PreconditionError
from .measure import (
    DEFAULT_EXP_TOL,
    LatticeMeasure,
    convolve,
    difference,
    exp_measure,
    from_pmf,
    linear_combine,
    one_plus_c_u_power,
    truncate_tail,
    u_power,
)


class Kind(str, enum.Enum):
    POIS = "pois"
    G = "g"
    POIS_EXPANDED = "pois+"
    G_EXPANDED = "g+"
    TP = "tp"
    NB = "nb"
    NB_EXPANDED = "nb+"
    BI = "bi"
    BI_EXPANDED = "bi+"

    @classmethod
    def parse(cls, value) -> "Kind":
        if isinstance(value, Kind):
            return value
        key = str(value).strip().lower()
        if key in _ALIASES:
            return _ALIASES[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown approximant kind {value!r}") from None


_ALIASES = {
    "g_signed": Kind.G,
    "pois_expanded": Kind.POIS_EXPANDED,
    "g_expanded": Kind.G_EXPANDED,
    "translated_pois": Kind.TP,
    "neg_binomial": Kind.NB,
    "nb_expanded": Kind.NB_EXPANDED,
    "binomial": Kind.BI,
    "bi_expanded": Kind.BI_EXPANDED,
}

_BASE = {
    Kind.POIS_EXPANDED: Kind.POIS,
    Kind.G_EXPANDED: Kind.G,
    Kind.NB_EXPANDED: Kind.NB,
    Kind.BI_EXPANDED: Kind.BI,
}


@dataclass(frozen=True)
class Approximant:
    kind: Kind
    params: Dict[str, float]
    measure: LatticeMeasure
    truncation_mass: float = 0.0


# -- parameters ----------------------------------------------------------------


def tp_params(cs: CumulantSet) -> Dict[str, float]:
    """Shift ``a`` and fraction ``delta~`` with ``-2 Gamma_2 = a + delta~``."""
    x = -2.0 * cs.gamma2
    a = math.floor(x)
    frac = x - a
    return {"a": float(a), "delta_tilde": frac, "rate": cs.gamma1 + 2.0 * cs.gamma2 + frac}


def nb_params(cs: CumulantSet) -> Dict[str, float]:
    """``r`` and ``q`` with ``r(1-q)/q = Gamma_1`` and ``r((1-q)/q)**2 = 2 Gamma_2``."""
    if cs.gamma2 == 0:
        raise DegenerateParameterError("Gamma_2 != 0", "negative binomial parameters diverge")
    if cs.gamma2 < 0:
        raise PreconditionError("Gamma_2 > 0", f"Gamma_2 = {cs.gamma2:.6g}")
    odds = 2.0 * cs.gamma2 / cs.gamma1
    return {"r": cs.gamma1 / odds, "q_bar": 1.0 / (1.0 + odds), "odds": odds}


def bi_params(cs: CumulantSet) -> Dict[str, float]:
    """``N = floor(N~)``, ``p = Gamma_1 / N`` and ``eps = N~ - N`` with ``N~ = Gamma_1^2 / (2|Gamma_2|)``."""
    if cs.gamma2 == 0:
        raise DegenerateParameterError("Gamma_2 != 0", "binomial parameters diverge")
    if cs.gamma2 > 0:
        raise PreconditionError("Gamma_2 < 0", f"Gamma_2 = {cs.gamma2:.6g}")
    if cs.gamma1 < 1:
        raise PreconditionError("Gamma_1 >= 1", f"Gamma_1 = {cs.gamma1:.6g}")
    n_tilde = cs.gamma1**2 / (2.0 * abs(cs.gamma2))
    N = math.floor(n_tilde)
    p_bar = cs.gamma1 / N
    if p_bar > 1:
        raise PreconditionError("Gamma_1 / N <= 1", f"p = {p_bar:.6g}")
    return {"N": float(N), "p_bar": p_bar, "epsilon": n_tilde - N, "N_tilde": n_tilde}


def correction_coefficient(kind, cs: CumulantSet) -> float:
    kind = Kind.parse(kind)
    if kind is Kind.POIS_EXPANDED:
        return cs.gamma2
    if kind is Kind.G_EXPANDED:
        return cs.gamma3
    if kind is Kind.NB_EXPANDED:
        return cs.gamma3 - 4.0 * cs.gamma2**2 / (3.0 * cs.gamma1)
    if kind is Kind.BI_EXPANDED:
        bp = bi_params(cs)
        return cs.gamma3 - bp["N"] * bp["p_bar"] ** 3 / 3.0
    raise ValueError(f"approximant kind {kind.value!r} has no expansion correction")


def expansion_factor(kind, cs: CumulantSet, coefficient: Optional[float] = None) -> LatticeMeasure:
    """The correction ``delta + c U**j`` (``j = 2`` for Poisson, 3 otherwise).

    ``coefficient`` overrides ``c``, e.g. with :func:`k1k2_expansion_coefficient`.
    """
    kind = Kind.parse(kind)
    c = correction_coefficient(kind, cs) if coefficient is None else float(coefficient)
    j = 2 if kind is Kind.POIS_EXPANDED else 3
    return one_plus_c_u_power(c, j)


def k1k2_expansion_coefficient(n: int, k1: int, k2: int, p: float) -> float:
    """``A = a^3 (n-m+1) m (m-1) / 6`` used for ``(k1, k2)`` events."""
    m = k1 + k2
    a = (1 - p) ** k1 * p**k2
    return a**3 / 6.0 * (n - m + 1) * m * (m - 1)


# -- realised measures -----------------------------------------------------------


def _pmf_window(dist, tol: float):
    lo = int(dist.ppf(tol / 4)) if tol / 4 > 0 else 0
    hi = int(dist.isf(tol / 4))
    lo = max(lo - 1, 0)
    k = np.arange(lo, hi + 2)
    w = dist.pmf(k)
    m = from_pmf(w, lo)
    m, _ = truncate_tail(m, tol / 2)
    return m, max(0.0, 1.0 - m.mass())


def _poisson(rate: float, tol: float):
    if rate < 0:
        raise PreconditionError("Poisson parameter >= 0", f"rate = {rate:.6g}")
    if rate == 0:
        return from_pmf([1.0]), 0.0
    return _pmf_window(stats.poisson(rate), tol)


def make_approximant(kind, cs: CumulantSet, tol: float = DEFAULT_EXP_TOL, coefficient: Optional[float] = None) -> Approximant:
    """Build the approximant ``kind`` for the cumulants ``cs``.

    Infinite-support laws are cut to a window whose discarded mass is
    below ``tol``; the discarded mass is returned as ``truncation_mass``.
    """
    kind = Kind.parse(kind)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if kind in _BASE:
        base = make_approximant(_BASE[kind], cs, tol)
        c = correction_coefficient(kind, cs) if coefficient is None else float(coefficient)
        factor = expansion_factor(kind, cs, c)
        params = dict(base.params, correction=c)
        # the factor has norm 1 + 2^j |c|, which scales the truncation error
        scale = 1.0 + (4.0 if kind is Kind.POIS_EXPANDED else 8.0) * abs(c)
        return Approximant(kind, params, convolve(base.measure, factor), base.truncation_mass * scale)

    if kind is Kind.POIS:
        m, lost = _poisson(cs.gamma1, tol)
        return Approximant(kind, {"rate": cs.gamma1}, m, lost)

    if kind is Kind.G:
        u = difference()
        arg = linear_combine([(cs.gamma1, u), (cs.gamma2, u_power(2))])
        m = exp_measure(arg, tol / 2)
        m, lost = truncate_tail(m, tol / 2)
        return Approximant(kind, {"gamma1": cs.gamma1, "gamma2": cs.gamma2}, m, lost + tol / 2)

    if kind is Kind.TP:
        if cs.gamma1 < 1:
            raise PreconditionError("Gamma_1 >= 1", f"Gamma_1 = {cs.gamma1:.6g}")
        params = tp_params(cs)
        m, lost = _poisson(params["rate"], tol)
        shifted = LatticeMeasure(m.offset + int(params["a"]), m.weights)
        return Approximant(kind, params, shifted, lost)

    if kind is Kind.NB:
        params = nb_params(cs)
        m, lost = _pmf_window(stats.nbinom(params["r"], params["q_bar"]), tol)
        return Approximant(kind, params, m, lost)

    if kind is Kind.BI:
        params = bi_params(cs)
        N = int(params["N"])
        k = np.arange(N + 1)
        m = from_pmf(stats.binom.pmf(k, N, params["p_bar"]))
        m, lost = truncate_tail(m, tol)
        return Approximant(kind, params, m, lost)

    raise ValueError(f"unsupported approximant kind {kind!r}")


def nb_pmf(j, r: float, q: float):
    """``Gamma(r+j) / (j! Gamma(r)) q^r (1-q)^j`` evaluated in log space."""
    j = np.asarray(j, dtype=float)
    return np.exp(gammaln(r + j) - gammaln(j + 1) - gammaln(r) + r * math.log(q) + j * math.log1p(-q))

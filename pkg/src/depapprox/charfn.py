"""Heinrich factorization of the characteristic function and Bergström terms.

For a 1-dependent sequence with ``Z_k = exp(i t X_k) - 1`` the transform of
``S_n`` factorizes as ``prod_k phi_k(t)`` with

    phi_k = 1 + E Z_k + sum_{j<k} hat_e(Z_j, ..., Z_k) / (phi_j ... phi_{k-1}).

The reference factors are ``psi_j = exp(nu_1(j) z)`` (Poisson) and
``g_j = exp(nu_1(j) z + c_j z^2)`` (signed compound Poisson) with
``z = exp(i t) - 1``.  Swapping ``m`` of the reference factors for
``phi_j - ref_j`` and summing over all choices gives the order-``m``
Bergström term; its measure is recovered by an inverse DFT.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .cumulants import X, _he
from .errors import NumericalValidityError
from .measure import LatticeMeasure, from_pmf, norm
from .models import DependentModel

EXACT_DEPTH_LIMIT = 64
DEFAULT_DEPTH = 40
# geometric decay of centered moments of Z (ratio 0.4) times the 10/9 bound on 1/|phi|
_DECAY = 4.0 / 9.0
_T_CHUNK = 128
BASES = ("pois", "g")


@dataclass(frozen=True)
class FactorSet:
    """Factors on a grid of ``t`` values; arrays have shape ``(n, len(t))``."""

    t: np.ndarray
    phis: np.ndarray
    psis: np.ndarray
    gs: np.ndarray
    depth: int
    tail_bound: float

    @property
    def n(self) -> int:
        return self.phis.shape[0]

    def product(self) -> np.ndarray:
        """``prod_k phi_k(t)``, which equals the transform of ``S_n``."""
        return np.prod(self.phis, axis=0)

    def reference(self, base: str) -> np.ndarray:
        if base == "pois":
            return self.psis
        if base == "g":
            return self.gs
        raise ValueError(f"unknown base {base!r}; expected one of {BASES}")


def default_depth(n: int) -> int:
    return n if n <= EXACT_DEPTH_LIMIT else DEFAULT_DEPTH


def _moment_table(model: DependentModel, ts: np.ndarray, depth: int) -> np.ndarray:
    """``E[a, d] = E Z_a ... Z_{a+d}`` for ``d <= depth`` (zero past ``n``)."""
    n = model.n
    table = np.zeros((n + 2, depth + 1, ts.size), dtype=complex)

    def z(x):
        return np.exp(1j * np.multiply.outer(x, ts)) - 1.0

    chains = {}
    for a in range(1, n + 1):
        stop = min(n, a + depth)
        key = model.window_key(a, stop - a + 1)
        if key not in chains:
            chains[key] = model.window_chain(a, stop, z)
        table[a, : stop - a + 1] = chains[key]
    return table


def _phis(model: DependentModel, ts: np.ndarray, depth: int) -> np.ndarray:
    n = model.n
    E = _moment_table(model, ts, depth)
    # H[j, d] = hat_e(Z_j, ..., Z_{j+d})
    H = np.zeros_like(E)
    phis = np.empty((n, ts.size), dtype=complex)
    log_cum = np.zeros((n + 1, ts.size), dtype=complex)  # sum_{i<=k} log phi_i
    for k in range(1, n + 1):
        lo = max(1, k - depth)
        js = np.arange(lo, k + 1)
        hk = E[js, k - js].copy()
        for e in range(0, k - lo):
            sel = js[js <= k - e - 1]
            hk[: sel.size] -= H[sel, e] * E[sel + e + 1, k - sel - e - 1]
        H[js, k - js] = hk
        phi = 1.0 + E[k, 0]
        if k > lo:
            inner = js[:-1]
            scale = np.exp(log_cum[inner - 1] - log_cum[k - 1])
            phi = phi + np.sum(hk[:-1] * scale, axis=0)
        if np.any(np.abs(phi) < 0.5):
            raise NumericalValidityError(
                f"|phi_{k}| fell below 1/2; the sequence is too strongly dependent or dense"
            )
        phis[k - 1] = phi
        log_cum[k] = log_cum[k - 1] + np.log(phi)
    return phis


def heinrich_factors(model: DependentModel, t, depth: Optional[int] = None) -> FactorSet:
    """Factors ``phi_k``, ``psi_k`` and ``g_k`` at ``t`` (scalar or array).

    ``depth`` keeps the last ``depth`` terms of the sum defining ``phi_k``;
    ``depth >= n - 1`` is the exact recursion.  The default is exact for
    ``n <= 64`` and 40 otherwise.  ``tail_bound`` bounds the dropped part of
    the sum for any ``k`` and ``t``.
    """
    n = model.n
    if model.dependence > 1:
        raise ValueError(f"model is {model.dependence}-dependent; group it into 1-dependent blocks first")
    depth = default_depth(n) if depth is None else int(depth)
    if not 1 <= depth <= n:
        raise ValueError(f"depth must lie in [1, {n}]")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    eff = min(depth, n - 1)
    phis = np.concatenate(
        [_phis(model, ts[i : i + _T_CHUNK], max(eff, 0)) for i in range(0, ts.size, _T_CHUNK)], axis=1
    )

    nu1 = np.array([model.factorial_moment(k, 1) for k in range(1, n + 1)])
    nu2 = np.array([model.factorial_moment(k, 2) for k in range(1, n + 1)])
    cov = np.array([_he(model, k - 1, (X, X)) for k in range(1, n + 1)])
    z = np.exp(1j * ts) - 1.0
    psis = np.exp(np.multiply.outer(nu1, z))
    c2 = (nu2 - nu1**2) / 2.0 + cov
    gs = np.exp(np.multiply.outer(nu1, z) + np.multiply.outer(c2, z * z))

    tail = 0.0
    if eff < n - 1:
        pair = nu1[1:] + nu1[:-1]
        s2 = np.max(np.sin(ts / 2.0) ** 2)
        tail = 18.0 * s2 * float(pair.max()) * _DECAY ** (eff + 1)
    return FactorSet(ts, phis, psis, gs, depth, tail)


# --------------------------------------------------------------------------
# Bergström expansion


def bergstrom_coefficients(factors: FactorSet, order: int, base: str = "pois") -> np.ndarray:
    """Transforms of ``Brg_0 .. Brg_order`` on the factor grid, shape ``(order+1, T)``.

    ``Brg_l`` is the coefficient of ``x^l`` in ``prod_j (b_j + x (phi_j - b_j))``,
    accumulated by a running polynomial product truncated at degree ``order``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    ref = factors.reference(base)
    coef = np.zeros((order + 1, factors.t.size), dtype=complex)
    coef[0] = 1.0
    for b, phi in zip(ref, factors.phis):
        d = phi - b
        coef[1:] = coef[1:] * b + coef[:-1] * d
        coef[0] = coef[0] * b
    return coef


def dft_grid(size: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(size) / size


def invert_transform(values: np.ndarray) -> "tuple[LatticeMeasure, float]":
    """Measure on ``0..L-1`` whose transform matches ``values`` on the DFT grid.

    Returns the measure and the largest imaginary part discarded.
    """
    values = np.asarray(values, dtype=complex)
    w = np.fft.fft(values) / values.size
    return from_pmf(w.real), float(np.max(np.abs(w.imag), initial=0.0))


def minimum_grid(model: DependentModel, order: int) -> int:
    return model.max_sum() + order + 1


def default_grid(model: DependentModel, order: int) -> int:
    need = 2 * minimum_grid(model, order)
    return 1 << (need - 1).bit_length()


def _grid(model, order, grid):
    need = minimum_grid(model, order)
    if grid is None:
        return default_grid(model, order)
    grid = int(grid)
    if grid < need:
        raise ValueError(f"grid {grid} too small; need at least {need} points")
    return grid


def bergstrom_measure(
    model: DependentModel,
    l: int,
    base: str = "pois",
    grid: Optional[int] = None,
    depth: Optional[int] = None,
) -> LatticeMeasure:
    """The order-``l`` Bergström term around ``base`` (``"pois"`` or ``"g"``)."""
    if not 0 <= l <= model.n:
        raise ValueError(f"order must lie in [0, {model.n}]")
    size = _grid(model, l, grid)
    factors = heinrich_factors(model, dft_grid(size), depth)
    coef = bergstrom_coefficients(factors, l, base)
    m, _ = invert_transform(coef[l])
    return m


def bergstrom_remainders(
    model: DependentModel,
    orders: Sequence[int] = (0, 1, 2),
    base: str = "pois",
    grid: Optional[int] = None,
    depth: Optional[int] = None,
    norm_kind: str = "total_variation",
    exact: Optional[LatticeMeasure] = None,
) -> List[float]:
    """``||F_n - sum_{l<=s} Brg_l||`` for each ``s`` in ``orders``."""
    orders = list(orders)
    top = max(orders)
    size = _grid(model, top, grid)
    factors = heinrich_factors(model, dft_grid(size), depth)
    coef = bergstrom_coefficients(factors, top, base)
    partial = np.cumsum(coef, axis=0)
    F = model.exact_distribution() if exact is None else exact
    out = []
    for s in orders:
        approx, _ = invert_transform(partial[s])
        out.append(norm(F - approx, norm_kind))
    return out

"""Finite signed measures on the integer lattice.

A :class:`LatticeMeasure` stores the weights ``M{offset}, M{offset+1}, ...``
as a float array.  Products of measures are convolutions, ``M**0`` is the
unit mass at zero, and ``exp`` is the convolution exponential.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence, Tuple

import numpy as np
from scipy import signal

from .errors import ResourceLimitError

DEFAULT_MAX_SUPPORT = 2**20
DEFAULT_EXP_TOL = 1e-12

# Direct convolution is exact up to rounding of each product; beyond this
# many multiply-adds we switch to FFT convolution.
_DIRECT_CONV_LIMIT = 4e7

NormKind = Literal["total_variation", "local", "tv"]


def max_support() -> int:
    """Current support-length cap (``DEPAPPROX_MAX_SUPPORT`` overrides)."""
    raw = os.environ.get("DEPAPPROX_MAX_SUPPORT")
    if raw is None:
        return DEFAULT_MAX_SUPPORT
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"DEPAPPROX_MAX_SUPPORT must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError("DEPAPPROX_MAX_SUPPORT must be positive")
    return value


def _check_length(length: int) -> None:
    cap = max_support()
    if length > cap:
        raise ResourceLimitError(f"support length {length} exceeds the configured maximum {cap}")


@dataclass(frozen=True, eq=False)
class LatticeMeasure:
    """Signed measure ``M`` with ``M{k} = weights[k - offset]``.

    Instances are canonical: leading and trailing zero weights are stripped,
    and the zero measure is a single zero weight at offset 0.
    """

    offset: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0:
            w = np.zeros(1)
        if not np.all(np.isfinite(w)):
            raise ValueError("measure weights must be finite")
        nz = np.flatnonzero(w)
        offset = int(self.offset)
        if nz.size == 0:
            w, offset = np.zeros(1), 0
        elif nz[0] > 0 or nz[-1] < w.size - 1:
            offset += int(nz[0])
            w = w[nz[0] : nz[-1] + 1]
        w = np.array(w, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "offset", offset)

    # -- basic views -------------------------------------------------------
    @property
    def support(self) -> np.ndarray:
        """Integer points ``offset, ..., offset + len(weights) - 1``."""
        return np.arange(self.offset, self.offset + self.weights.size)

    @property
    def last(self) -> int:
        return self.offset + self.weights.size - 1

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < self.weights.size:
            return float(self.weights[i])
        return 0.0

    def is_zero(self) -> bool:
        return self.weights.size == 1 and self.weights[0] == 0.0

    def mass(self) -> float:
        return float(self.weights.sum())

    def moment(self, order: int = 1) -> float:
        """Raw moment ``sum_k k**order M{k}``."""
        return float(np.dot(self.support.astype(float) ** order, self.weights))

    def factorial_moment(self, order: int) -> float:
        """Factorial moment ``sum_k k(k-1)...(k-order+1) M{k}``."""
        k = self.support.astype(float)
        prod = np.ones_like(k)
        for i in range(order):
            prod *= k - i
        return float(np.dot(prod, self.weights))

    def on_window(self, lo: int, hi: int) -> np.ndarray:
        """Weights at ``lo..hi`` inclusive, zero-filled outside the support."""
        out = np.zeros(hi - lo + 1)
        a, b = max(lo, self.offset), min(hi, self.last)
        if a <= b:
            out[a - lo : b - lo + 1] = self.weights[a - self.offset : b - self.offset + 1]
        return out

    def is_probability(self, tol: float = 1e-10) -> bool:
        return bool(np.all(self.weights >= 0) and abs(self.mass() - 1.0) <= tol)

    def allclose(self, other: "LatticeMeasure", atol: float = 1e-12) -> bool:
        lo = min(self.offset, other.offset)
        hi = max(self.last, other.last)
        return bool(np.allclose(self.on_window(lo, hi), other.on_window(lo, hi), rtol=0.0, atol=atol))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "LatticeMeasure") -> "LatticeMeasure":
        return linear_combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "LatticeMeasure") -> "LatticeMeasure":
        return linear_combine([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "LatticeMeasure":
        return LatticeMeasure(self.offset, -self.weights)

    def __mul__(self, other):
        if isinstance(other, LatticeMeasure):
            return convolve(self, other)
        return LatticeMeasure(self.offset, float(other) * self.weights)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LatticeMeasure":
        return conv_power(self, k)

    def __repr__(self) -> str:
        if self.weights.size <= 8:
            body = ", ".join(f"{w:.6g}" for w in self.weights)
        else:
            body = f"{self.weights.size} weights"
        return f"LatticeMeasure(offset={self.offset}, [{body}])"


def from_pmf(weights: Sequence[float], offset: int = 0) -> LatticeMeasure:
    return LatticeMeasure(offset, np.asarray(weights, dtype=float))


def delta(a: int = 0) -> LatticeMeasure:
    """Unit mass at the integer ``a``."""
    if int(a) != a:
        raise ValueError("only integer support points are supported")
    return LatticeMeasure(int(a), np.ones(1))


def zero() -> LatticeMeasure:
    return LatticeMeasure(0, np.zeros(1))


def difference() -> LatticeMeasure:
    """The first-difference measure ``U = delta(1) - delta(0)``."""
    return LatticeMeasure(0, np.array([-1.0, 1.0]))


def bernoulli(p: float) -> LatticeMeasure:
    return LatticeMeasure(0, np.array([1.0 - p, p]))


def convolve(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    """Convolution ``(A*B){k} = sum_j A{j} B{k-j}``."""
    if a.is_zero() or b.is_zero():
        return zero()
    _check_length(a.weights.size + b.weights.size - 1)
    if a.weights.size * b.weights.size <= _DIRECT_CONV_LIMIT:
        w = np.convolve(a.weights, b.weights)
    else:
        w = signal.fftconvolve(a.weights, b.weights)
    return LatticeMeasure(a.offset + b.offset, w)


def linear_combine(terms: Iterable[Tuple[float, LatticeMeasure]]) -> LatticeMeasure:
    """Pointwise sum ``sum_i c_i M_i``."""
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    lo = min(m.offset for _, m in terms)
    hi = max(m.last for _, m in terms)
    _check_length(hi - lo + 1)
    out = np.zeros(hi - lo + 1)
    for c, m in terms:
        i = m.offset - lo
        out[i : i + m.weights.size] += float(c) * m.weights
    return LatticeMeasure(lo, out)


def conv_power(a: LatticeMeasure, k: int) -> LatticeMeasure:
    """``k``-fold convolution power by repeated squaring; ``A**0 = delta(0)``."""
    if k < 0 or int(k) != k:
        raise ValueError("convolution power must be a nonnegative integer")
    k = int(k)
    _check_length(k * (a.weights.size - 1) + 1)
    result = delta(0)
    base = a
    while k:
        if k & 1:
            result = convolve(result, base)
        k >>= 1
        if k:
            base = convolve(base, base)
    return result


def norm(a: LatticeMeasure, kind: NormKind = "total_variation") -> float:
    """Total variation norm ``sum |M{k}|`` or local norm ``max |M{k}|``."""
    if kind in ("total_variation", "tv"):
        return float(np.abs(a.weights).sum())
    if kind == "local":
        return float(np.abs(a.weights).max())
    raise ValueError(f"unknown norm kind {kind!r}")


def fourier_at(a: LatticeMeasure, t):
    """``sum_k M{k} exp(i t k)`` for scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    k = a.support.astype(float)
    vals = np.exp(1j * np.multiply.outer(t_arr, k)) @ a.weights
    if t_arr.ndim == 0:
        return complex(vals)
    return vals


def truncate_tail(a: LatticeMeasure, eps: float) -> Tuple[LatticeMeasure, float]:
    """Shortest contiguous window whose discarded absolute mass is below ``eps``.

    Returns the truncated measure and the discarded absolute mass.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    w = np.abs(a.weights)
    n = w.size
    left = np.concatenate(([0.0], np.cumsum(w)))  # mass of w[:i]
    right = np.concatenate(([0.0], np.cumsum(w[::-1])))  # mass of w[n-j:]
    best = (0, 0, 0.0)
    # two pointers: for each left cut i, the largest right cut j with total < eps
    j = int(np.searchsorted(right, eps, side="left")) - 1
    for i in range(n + 1):
        if left[i] >= eps:
            break
        while j >= 0 and (left[i] + right[j] >= eps or i + j > n - 1):
            j -= 1
        if j < 0:
            break
        if i + j > best[0] + best[1]:
            best = (i, j, left[i] + right[j])
    i, j, dropped = best
    if i == 0 and j == 0:
        return a, 0.0
    return LatticeMeasure(a.offset + i, a.weights[i : n - j]), float(dropped)


def _trim_small(a: LatticeMeasure, budget: float) -> Tuple[LatticeMeasure, float]:
    if budget <= 0:
        return a, 0.0
    w = np.abs(a.weights)
    lcum = np.cumsum(w)
    rcum = np.cumsum(w[::-1])
    i = int(np.searchsorted(lcum, budget / 2, side="left"))
    j = int(np.searchsorted(rcum, budget / 2, side="left"))
    if i + j >= w.size:
        return a, 0.0
    dropped = (lcum[i - 1] if i else 0.0) + (rcum[j - 1] if j else 0.0)
    if i == 0 and j == 0:
        return a, 0.0
    return LatticeMeasure(a.offset + i, a.weights[i : w.size - j]), float(dropped)


def _taylor_exp(a: LatticeMeasure, tol: float) -> LatticeMeasure:
    s = norm(a)
    total = delta(0)
    term = delta(0)
    k = 0
    # stop once s^(K+1) e^s / (K+1)! < tol
    while True:
        bound = math.exp((k + 1) * math.log(s) + s - math.lgamma(k + 2)) if s > 0 else 0.0
        if bound < tol:
            break
        k += 1
        term = convolve(term, a) * (1.0 / k)
        total = total + term
    return total


def exp_measure(a: LatticeMeasure, tol: float = DEFAULT_EXP_TOL) -> LatticeMeasure:
    """Convolution exponential ``sum_k A**k / k!`` to within ``tol`` in total variation.

    For ``||A|| <= 1/2`` the Taylor series is summed directly with the
    factorial tail bound.  Larger arguments use scaling and squaring:
    ``exp(A) = exp(A / 2**s) ** (2**s)``, trimming edge weights whose
    accumulated contribution stays within the tolerance budget.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.is_zero():
        return delta(0)
    s_norm = norm(a)
    squarings = 0
    if s_norm > 0.5:
        squarings = int(math.ceil(math.log2(s_norm / 0.5)))
    scale = 2.0**squarings
    budget = tol / 2
    result = _taylor_exp(a * (1.0 / scale), budget / scale)
    for level in range(squarings):
        result = convolve(result, result)
        remaining = squarings - level - 1
        # an error e at this level is amplified by at most 2**remaining * ||result||**(2**remaining - 1)
        amp = 2.0**remaining * max(1.0, norm(result)) ** (2.0**remaining)
        level_budget = budget / ((squarings + 1) * amp) if np.isfinite(amp) else 0.0
        result, _ = _trim_small(result, level_budget)
    return result


# -- frequently used building blocks ------------------------------------


def u_power(j: int) -> LatticeMeasure:
    """``U**j`` with ``U = delta(1) - delta(0)``."""
    return conv_power(difference(), j)


def one_plus_c_u_power(c: float, j: int) -> LatticeMeasure:
    """The correction factor ``delta(0) + c U**j``."""
    return linear_combine([(1.0, delta(0)), (c, u_power(j))])

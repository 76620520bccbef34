"""Dependent integer-valued sequences with exact oracles.

Two families are supported:

* :class:`IndependentModel` -- independent summands with finite pmfs.
* :class:`PatternModel` -- counts of a fixed 0/1 pattern in an i.i.d.
  Bernoulli driver sequence, optionally grouped into consecutive blocks.
  2-runs are the pattern ``11``; ``(k1, k2)`` events are ``0^k1 1^k2``.

For pattern models the latent Markov chain state is the last ``len(pattern)-1``
driver values, and every expectation is computed by a forward pass over that
chain.  Because the drivers are i.i.d., the joint law of a window of blocks
depends only on the block sizes inside it, which is used as a cache key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ResourceLimitError
from .measure import LatticeMeasure, convolve, from_pmf, max_support

DEFAULT_MAX_WINDOW = 64
MAX_PATTERN_LENGTH = 13

# Partial-sum columns whose total weight falls below this are dropped
# during the exact forward pass; they are far below double resolution of
# any quantity computed downstream.
_NEGLIGIBLE = 1e-290


# --------------------------------------------------------------------------
# window functions


@dataclass(frozen=True)
class WindowFunc:
    """Transform ``Y = f(X)`` applied to one summand inside a window.

    ``kind`` is ``"identity"`` (``X``), ``"factorial"`` (``X(X-1)...(X-order+1)``)
    or ``"char_diff"`` (``exp(i t X) - 1``).
    """

    kind: str = "identity"
    order: int = 1
    t: float = 0.0

    def __post_init__(self):
        if self.kind not in ("identity", "factorial", "char_diff"):
            raise ValueError(f"unknown window function kind {self.kind!r}")
        if self.kind == "factorial" and not 1 <= self.order <= 4:
            raise ValueError("factorial power order must be in 1..4")

    @property
    def is_real(self) -> bool:
        return self.kind != "char_diff"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x
        if self.kind == "factorial":
            out = np.ones_like(x)
            for i in range(self.order):
                out = out * (x - i)
            return out
        return np.exp(1j * self.t * x) - 1.0


def identity() -> WindowFunc:
    return WindowFunc("identity")


def factorial_power(j: int) -> WindowFunc:
    return WindowFunc("factorial", order=j)


def char_diff(t: float) -> WindowFunc:
    return WindowFunc("char_diff", t=float(t))


# A value table maps the possible summand values 0..vmax to f-values; for
# vectorised characteristic computations the table has trailing t-axes.
ValueFn = Callable[[np.ndarray], np.ndarray]


# --------------------------------------------------------------------------
# models


class DependentModel:
    """Common interface of all sequence models.

    Summands are indexed ``1..n``.  Subclasses implement the value range,
    the window expectation, forward chains of window expectations and the
    exact distribution of ``S_n``.
    """

    kind: str = "abstract"
    n: int
    max_window: int = DEFAULT_MAX_WINDOW

    # -- required hooks ----------------------------------------------------
    def max_value(self, k: int) -> int:
        raise NotImplementedError

    def window_key(self, start: int, length: int) -> Hashable:
        """Key such that equal keys imply equal joint laws of the window."""
        raise NotImplementedError

    def _window_expectation(self, start: int, fns: Sequence[ValueFn]) -> np.ndarray:
        raise NotImplementedError

    def exact_distribution(self) -> LatticeMeasure:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    @property
    def dependence(self) -> int:
        """Smallest ``m`` such that the sequence is ``m``-dependent."""
        raise NotImplementedError

    # -- shared API ----------------------------------------------------------
    def _check_window(self, start: int, length: int) -> None:
        if length < 1:
            raise ValueError("window must contain at least one summand")
        if start < 1 or start + length - 1 > self.n:
            raise ValueError(f"window [{start}, {start + length - 1}] outside [1, {self.n}]")
        if length > self.max_window:
            raise ResourceLimitError(f"window length {length} exceeds maximum {self.max_window}")

    def window_expectation(self, start: int, funcs: Sequence[WindowFunc]) -> complex:
        """Exact ``E prod_i f_i(X_{start+i})``."""
        funcs = tuple(funcs)
        self._check_window(start, len(funcs))
        key = (self.window_key(start, len(funcs)), funcs)
        cache = self._expectation_cache
        if key not in cache:
            val = complex(self._window_expectation(start, funcs))
            cache[key] = val
        return cache[key]

    def window_chain(self, start: int, stop: int, fn: ValueFn) -> np.ndarray:
        """``E prod_{i=start}^{b} f(X_i)`` for ``b = start..stop`` (stacked on axis 0).

        ``fn`` maps an integer array of summand values to f-values, possibly
        with trailing axes (e.g. a grid of ``t``).
        """
        if start < 1 or stop > self.n or stop < start:
            raise ValueError(f"chain [{start}, {stop}] outside [1, {self.n}]")
        return self._window_chain(start, stop, fn)

    def factorial_moment(self, k: int, j: int) -> float:
        """``nu_j(k)``; zero for indices outside ``1..n``."""
        if k < 1 or k > self.n:
            return 0.0
        return self.window_expectation(k, (factorial_power(j),)).real

    def mean(self, k: int) -> float:
        return self.factorial_moment(k, 1)

    @cached_property
    def _expectation_cache(self) -> Dict:
        return {}

    def max_sum(self) -> int:
        return int(sum(self.max_value(k) for k in range(1, self.n + 1)))


# -- independent summands ----------------------------------------------------


class IndependentModel(DependentModel):
    """Independent summands ``X_k`` with pmfs on ``0, 1, 2, ...``."""

    kind = "independent"

    def __init__(self, pmfs: Sequence[Sequence[float]]):
        if len(pmfs) < 1:
            raise ValueError("need at least one summand")
        arrays = []
        for pmf in pmfs:
            a = np.asarray(pmf, dtype=float)
            if a.ndim != 1 or a.size == 0:
                raise ValueError("each pmf must be a nonempty 1-d sequence")
            if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-9:
                raise ValueError("each pmf must be nonnegative and sum to 1")
            arrays.append(a)
        self.pmfs = arrays
        self.n = len(arrays)
        ids: Dict[bytes, int] = {}
        self._ids = [ids.setdefault(a.tobytes(), len(ids)) for a in arrays]

    @property
    def dependence(self) -> int:
        return 0

    def max_value(self, k: int) -> int:
        return self.pmfs[k - 1].size - 1

    def window_key(self, start, length):
        return tuple(self._ids[start - 1 : start - 1 + length])

    def _expect_one(self, k: int, fn: ValueFn):
        pmf = self.pmfs[k - 1]
        vals = np.asarray(fn(np.arange(pmf.size)))
        return np.tensordot(pmf, vals, axes=(0, 0))

    def _window_expectation(self, start, funcs):
        out = 1.0 + 0j
        for i, f in enumerate(funcs):
            out *= self._expect_one(start + i, f)
        return out

    def _window_chain(self, start, stop, fn):
        vals = [self._expect_one(k, fn) for k in range(start, stop + 1)]
        return np.cumprod(np.array(vals, dtype=complex), axis=0)

    def exact_distribution(self) -> LatticeMeasure:
        total = self.max_sum() + 1
        if total > max_support():
            raise ResourceLimitError(f"support length {total} exceeds the configured maximum")
        out = from_pmf([1.0])
        for pmf in self.pmfs:
            out = convolve(out, from_pmf(pmf))
        return out

    def to_spec(self) -> dict:
        return {"kind": "independent", "pmfs": [a.tolist() for a in self.pmfs]}


# -- pattern counts in Bernoulli drivers --------------------------------------


class PatternModel(DependentModel):
    """Block sums of pattern indicators over i.i.d. Bernoulli(p) drivers.

    There are ``n_drivers`` drivers ``eta_1..eta_T``.  Emission ``e`` (for
    ``e = L..T`` with ``L = len(pattern)``) equals 1 iff
    ``(eta_{e-L+1}, ..., eta_e) == pattern``.  Consecutive emissions are
    grouped into summands with the given ``block_sizes``.
    """

    def __init__(
        self,
        pattern: Sequence[int],
        n_drivers: int,
        p: float,
        block_sizes: Sequence[int],
        kind: str = "pattern",
        params: Optional[dict] = None,
    ):
        pattern = tuple(int(b) for b in pattern)
        if len(pattern) < 2 or any(b not in (0, 1) for b in pattern):
            raise ValueError("pattern must be a 0/1 tuple of length >= 2")
        if len(pattern) > MAX_PATTERN_LENGTH:
            raise ResourceLimitError(f"pattern length {len(pattern)} exceeds {MAX_PATTERN_LENGTH}")
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        n_emit = n_drivers - len(pattern) + 1
        sizes = tuple(int(s) for s in block_sizes)
        if n_emit < 1:
            raise ValueError("not enough drivers for a single pattern window")
        if any(s < 1 for s in sizes) or sum(sizes) != n_emit:
            raise ValueError(f"block sizes must be positive and sum to {n_emit}")
        self.pattern = pattern
        self.n_drivers = int(n_drivers)
        self.p = float(p)
        self.block_sizes = sizes
        self.n = len(sizes)
        self.kind = kind
        self.params = dict(params or {})
        self._first = np.concatenate(([0], np.cumsum(sizes)[:-1]))  # first emission offset per block

    # -- structure -----------------------------------------------------------
    @property
    def memory(self) -> int:
        return len(self.pattern)

    @property
    def dependence(self) -> int:
        if self.n <= 1:
            return 0
        # blocks b and b+d are independent iff the emissions in between number >= L-1
        L = self.memory
        d = 1
        while True:
            ok = True
            for b in range(self.n - d):
                between = sum(self.block_sizes[b + 1 : b + d])
                if between < L - 1:
                    ok = False
                    break
            if ok:
                return d - 1
            d += 1

    def max_value(self, k: int) -> int:
        # at most one occurrence per run of L-? emissions; the block size is a safe bound
        return self.block_sizes[k - 1]

    def max_sum(self) -> int:
        return sum(self.block_sizes)

    def window_key(self, start, length):
        return self.block_sizes[start - 1 : start - 1 + length]

    @cached_property
    def _initial_state(self) -> np.ndarray:
        bits = self.memory - 1
        states = np.arange(2**bits)
        ones = np.array([bin(s).count("1") for s in states])
        return self.p**ones * (1.0 - self.p) ** (bits - ones)

    @cached_property
    def _pattern_parts(self) -> Tuple[int, int, int]:
        L = self.memory
        top = self.pattern[0]
        low = 0
        for b in self.pattern[1 : L - 1]:
            low = (low << 1) | b
        return top, low, self.pattern[-1]

    def _step(self, w: np.ndarray) -> np.ndarray:
        """Advance one driver; axis 1 of ``w`` counts occurrences so far."""
        half = w.shape[0] // 2
        x = w.reshape((2, half) + w.shape[1:])
        agg = x[0] + x[1]
        new = np.empty((half, 2) + w.shape[1:], dtype=w.dtype)
        new[:, 0] = (1.0 - self.p) * agg
        new[:, 1] = self.p * agg
        top, low, last = self._pattern_parts
        pb = self.p if last else 1.0 - self.p
        hit = pb * x[top, low]
        new[low, last] -= hit
        new[low, last, 1:] += hit[:-1]
        return new.reshape(w.shape)

    def _blocks_pass(self, start: int, fns: Sequence[ValueFn], collect: bool):
        """Forward pass over blocks ``start..start+len(fns)-1`` applying ``fns``."""
        sizes = self.block_sizes[start - 1 : start - 1 + len(fns)]
        gmax = max(sizes)
        init = self._initial_state
        tables = [np.asarray(f(np.arange(gmax + 1)), dtype=complex) for f in fns]
        tail = tables[0].shape[1:]
        w = np.zeros((init.size, gmax + 1) + tail, dtype=complex)
        w[:, 0] = init.reshape((-1,) + (1,) * len(tail))
        out = []
        for size, table in zip(sizes, tables):
            for _ in range(size):
                w = self._step(w)
            # apply f to the block total and restart the counter
            collapsed = np.einsum("sx...,x...->s...", w, table)
            w = np.zeros_like(w)
            w[:, 0] = collapsed
            if collect:
                out.append(collapsed.sum(axis=0))
        if collect:
            return np.array(out)
        return w[:, 0].sum(axis=0)

    def _window_expectation(self, start, funcs):
        return self._blocks_pass(start, funcs, collect=False)

    def _window_chain(self, start, stop, fn):
        return self._blocks_pass(start, [fn] * (stop - start + 1), collect=True)

    def exact_distribution(self) -> LatticeMeasure:
        """Exact law of ``S_n`` by a forward pass tracking the running total."""
        states = 2 ** (self.memory - 1)
        if states * 2 > max_support():
            raise ResourceLimitError("latent state space exceeds the configured maximum")
        cap = max_support()
        w = self._initial_state.reshape(-1, 1).astype(float)
        n_emit = sum(self.block_sizes)
        for _ in range(n_emit):
            w = np.concatenate([w, np.zeros((states, 1))], axis=1)
            w = self._step(w)
            col = w.sum(axis=0)
            keep = np.flatnonzero(col > _NEGLIGIBLE)
            if keep.size and keep[-1] < w.shape[1] - 1:
                w = w[:, : keep[-1] + 1]
            if w.shape[1] > cap:
                raise ResourceLimitError(f"support length {w.shape[1]} exceeds the configured maximum {cap}")
        return from_pmf(w.sum(axis=0))

    def to_spec(self) -> dict:
        spec = {"kind": self.kind}
        spec.update(self.params)
        return spec


def two_runs(n: int, p: float) -> PatternModel:
    """``S = sum_{i<=n} eta_i eta_{i+1}`` over ``n + 1`` Bernoulli(p) drivers."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return PatternModel((1, 1), n + 1, p, [1] * n, kind="two_runs", params={"n": int(n), "p": float(p)})


def k1k2_sequence(n: int, k1: int, k2: int, p: float) -> PatternModel:
    """The m-dependent indicators ``Y_m..Y_n`` of ``k1`` failures then ``k2`` successes."""
    if k1 < 1 or k2 < 1:
        raise ValueError("k1 and k2 must be positive")
    m = k1 + k2
    if n < m:
        raise ValueError("n must be at least k1 + k2")
    return PatternModel(
        (0,) * k1 + (1,) * k2,
        n,
        p,
        [1] * (n - m + 1),
        kind="k1k2_sequence",
        params={"n": int(n), "k1": int(k1), "k2": int(k2), "p": float(p)},
    )


def k1k2_a(k1: int, k2: int, p: float) -> float:
    """Probability ``(1-p)^k1 p^k2`` of a single pattern occurrence."""
    return (1.0 - p) ** k1 * p**k2


def group_blocks(base: DependentModel, m: int) -> DependentModel:
    """Sum ``m`` consecutive summands into one, leaving a shorter final block.

    With ``n`` base summands there are ``K = n // m`` full blocks and one
    block of the remaining ``n - K m`` summands when that is positive.
    """
    if m < 1:
        raise ValueError("group size must be positive")
    if m > base.n:
        raise ValueError(f"group size {m} exceeds the number of summands {base.n}")
    K, rest = divmod(base.n, m)
    groups = [m] * K + ([rest] if rest else [])
    if isinstance(base, PatternModel):
        sizes, i = [], 0
        for g in groups:
            sizes.append(sum(base.block_sizes[i : i + g]))
            i += g
        params = dict(base.params)
        kind = base.kind
        if kind == "k1k2_sequence":
            kind = "k1k2"
        else:
            params = {"base": base.to_spec(), "m": int(m)}
            kind = "grouped"
        return PatternModel(base.pattern, base.n_drivers, base.p, sizes, kind=kind, params=params)
    if isinstance(base, IndependentModel):
        pmfs, i = [], 0
        for g in groups:
            acc = from_pmf([1.0])
            for pmf in base.pmfs[i : i + g]:
                acc = convolve(acc, from_pmf(pmf))
            pmfs.append(acc.on_window(0, acc.last))
            i += g
        return IndependentModel(pmfs)
    raise TypeError(f"cannot group model of type {type(base).__name__}")


def k1k2(n: int, k1: int, k2: int, p: float) -> PatternModel:
    """``N(n; k1, k2)`` grouped into 1-dependent blocks of ``m = k1 + k2`` indicators."""
    return group_blocks(k1k2_sequence(n, k1, k2, p), k1 + k2)


def k1k2_blocks(n: int, m: int) -> Tuple[int, float]:
    """``K`` and ``delta`` with ``(n - m + 1)/m = K + delta``."""
    K, rest = divmod(n - m + 1, m)
    return K, rest / m


# --------------------------------------------------------------------------
# JSON specifications


def _need(spec: dict, *names):
    missing = [k for k in names if k not in spec]
    if missing:
        raise ValueError(f"model spec {spec.get('kind')!r} is missing {', '.join(missing)}")
    return [spec[k] for k in names]


def build_model(spec) -> DependentModel:
    """Construct a model from a dict or JSON string.

    Shapes::

        {"kind": "two_runs", "n": 1000, "p": 0.03}
        {"kind": "k1k2", "n": 5000, "k1": 2, "k2": 2, "p": 0.1}        # grouped, 1-dependent
        {"kind": "k1k2_sequence", "n": 50, "k1": 2, "k2": 2, "p": 0.1}  # raw m-dependent
        {"kind": "independent", "pmfs": [[0.9, 0.1], [0.8, 0.2]]}
        {"kind": "independent", "n": 100, "pmf": [0.989, 0.01, 0.001]}
        {"kind": "bernoulli", "p": [0.1, 0.2, 0.05]}
        {"kind": "grouped", "base": {...}, "m": 3}
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed model JSON: {exc}") from exc
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("model spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "two_runs":
        n, p = _need(spec, "n", "p")
        return two_runs(int(n), float(p))
    if kind in ("k1k2", "k1k2_sequence"):
        n, k1, k2, p = _need(spec, "n", "k1", "k2", "p")
        maker = k1k2 if kind == "k1k2" else k1k2_sequence
        return maker(int(n), int(k1), int(k2), float(p))
    if kind == "independent":
        if "pmfs" in spec:
            return IndependentModel(spec["pmfs"])
        n, pmf = _need(spec, "n", "pmf")
        return IndependentModel([pmf] * int(n))
    if kind == "bernoulli":
        (ps,) = _need(spec, "p")
        if isinstance(ps, (int, float)):
            (n,) = _need(spec, "n")
            ps = [ps] * int(n)
        for q in ps:
            if not 0.0 <= q <= 1.0:
                raise ValueError("Bernoulli probabilities must lie in [0, 1]")
        return IndependentModel([[1.0 - q, q] for q in ps])
    if kind == "grouped":
        base, m = _need(spec, "base", "m")
        return group_blocks(build_model(base), int(m))
    raise ValueError(f"unknown model kind {kind!r}")

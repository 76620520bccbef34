"""Independent brute-force oracles used by the tests.

Nothing here calls the package's dynamic programs: every quantity is
obtained by listing all Bernoulli driver outcomes explicitly.
"""

import itertools

import numpy as np


def driver_outcomes(T, p):
    """All 2**T driver vectors (rows) and their probabilities."""
    bits = ((np.arange(2**T)[:, None] >> np.arange(T)[::-1]) & 1).astype(np.int64)
    ones = bits.sum(axis=1)
    prob = p**ones * (1 - p) ** (T - ones)
    return bits, prob


def pattern_blocks(pattern, T, p, block_sizes):
    """Block sums of pattern occurrences for every driver outcome."""
    bits, prob = driver_outcomes(T, p)
    L = len(pattern)
    pat = np.array(pattern)
    emits = np.stack([np.all(bits[:, e - L : e] == pat, axis=1) for e in range(L, T + 1)], axis=1).astype(int)
    assert emits.shape[1] == sum(block_sizes)
    cols, i = [], 0
    for s in block_sizes:
        cols.append(emits[:, i : i + s].sum(axis=1))
        i += s
    return np.stack(cols, axis=1), prob


def two_runs_blocks(n, p):
    return pattern_blocks((1, 1), n + 1, p, [1] * n)


def k1k2_blocks(n, k1, k2, p, grouped=True):
    m = k1 + k2
    w = n - m + 1
    sizes = [m] * (w // m) + ([w % m] if w % m else []) if grouped else [1] * w
    return pattern_blocks((0,) * k1 + (1,) * k2, n, p, sizes)


def sum_pmf(X, prob):
    S = X.sum(axis=1)
    return np.bincount(S, weights=prob)


def expect(X, prob, start, funcs):
    """E prod f_i(X_{start+i}) with 1-based ``start``; funcs act on integer arrays."""
    val = np.ones(X.shape[0], dtype=complex)
    for i, f in enumerate(funcs):
        val = val * f(X[:, start - 1 + i])
    return complex(np.dot(prob, val))


def hat_e_recursive(X, prob, start, funcs, sign=-1.0):
    """Centered moment from its defining recursion, by plain recursion on prefixes."""
    k = len(funcs)
    if k == 1:
        return expect(X, prob, start, funcs)
    val = expect(X, prob, start, funcs)
    for j in range(1, k):
        val += sign * hat_e_recursive(X, prob, start, funcs[:j], sign) * expect(X, prob, start + j, funcs[j:])
    return val


def independent_outcomes(pmfs):
    """Outcome matrix and probabilities for independent summands."""
    ranges = [range(len(p)) for p in pmfs]
    X = np.array(list(itertools.product(*ranges)), dtype=int)
    prob = np.ones(len(X))
    for i, p in enumerate(pmfs):
        prob *= np.asarray(p)[X[:, i]]
    return X, prob


def log_pgf_coefficients(pmf, order=3, radius=0.05, points=128):
    """Taylor coefficients of ``log sum_k pmf[k] (1+z)^k`` at ``z = 0`` by a Cauchy integral."""
    theta = 2 * np.pi * np.arange(points) / points
    z = radius * np.exp(1j * theta)
    s = 1.0 + z
    vals = np.polyval(np.asarray(pmf)[::-1], s)
    logs = np.log(vals)
    return [float((np.mean(logs * np.exp(-1j * j * theta)) / radius**j).real) for j in range(1, order + 1)]

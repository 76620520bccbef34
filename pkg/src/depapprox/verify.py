"""Distances to exact laws, rate regressions and sharp-constant experiments.

No experiment asserts an unknown absolute constant.  Rates are checked
through log-log slopes, sharp constants through the convergence of a
normalized distance toward its known limit, and the smoothing inequalities
with explicit constants are checked exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .approximants import Approximant, Kind, bi_params, correction_coefficient, make_approximant, tp_params
from .cumulants import CumulantSet, gamma_set, k1k2_closed_form, two_runs_closed_form
from .errors import PreconditionError
from .measure import LatticeMeasure, conv_power, from_pmf, norm
from .models import DependentModel, build_model, k1k2, k1k2_a, two_runs

C_TV = (1.0 / 3.0) * math.sqrt(2.0 / math.pi) * (1.0 + 4.0 * math.exp(-1.5))
C_L = (1.0 / math.sqrt(3.0 * math.pi)) * math.exp(math.sqrt(1.5) - 1.5) * math.sqrt(3.0 - math.sqrt(6.0))

CSV_COLUMNS = ("experiment", "n", "p", "k1", "k2", "m", "t", "j", "kind", "norm", "lhs", "rate_value", "ratio", "flags")

_NORM_NAMES = {"tv": "total_variation", "total_variation": "total_variation", "local": "local"}


def _norm_kind(name: str) -> str:
    try:
        return _NORM_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown norm {name!r}; expected 'tv' or 'local'") from None


def _short(norm_kind: str) -> str:
    return "tv" if _norm_kind(norm_kind) == "total_variation" else "local"


# --------------------------------------------------------------------------
# report types


@dataclass
class Row:
    experiment: str
    kind: str
    norm: str
    lhs: float
    rate_value: float = float("nan")
    n: Optional[int] = None
    p: Optional[float] = None
    k1: Optional[int] = None
    k2: Optional[int] = None
    m: Optional[int] = None
    t: Optional[float] = None
    j: Optional[int] = None
    flags: str = ""

    @property
    def ratio(self) -> float:
        if not np.isfinite(self.lhs) or not self.rate_value:
            return float("nan")
        return self.lhs / self.rate_value

    @property
    def skipped(self) -> bool:
        return self.flags.startswith("skipped")

    def values(self) -> List[str]:
        out = []
        for name in CSV_COLUMNS:
            v = self.ratio if name == "ratio" else getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, str):
                out.append(v)
            elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                out.append(str(int(v)))
            else:
                out.append(f"{float(v):.12g}")
        return out


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    residuals: Tuple[float, ...]
    points: int


@dataclass(frozen=True)
class ConstantEstimate:
    """Normalized distance at the largest instance, with its convergence trace."""

    value: float
    target: float
    error: float
    trace: Tuple[Tuple[float, float], ...]  # (scale, normalized value)
    in_range: Tuple[bool, ...] = ()  # trace points satisfying the preconditions; empty means all

    @property
    def deviation(self) -> float:
        return abs(self.value - self.target) / self.target

    def converged(self, tol: float) -> bool:
        """Final deviation below ``tol`` and a Cauchy tail.

        The tail is the part of the trace inside the preconditions; a tail
        that settles in the band ``target * (1 +- tol)`` has every increment
        below the band's width ``2 * tol * target``.
        """
        mask = self.in_range or (True,) * len(self.trace)
        vals = [v for (_, v), ok in zip(self.trace, mask) if ok]
        steps = np.abs(np.diff(vals)) if len(vals) > 1 else np.zeros(0)
        return self.deviation < tol and bool(np.all(steps < 2.0 * tol * self.target))


@dataclass
class ExperimentReport:
    experiment: str
    rows: List[Row] = field(default_factory=list)
    fits: Dict[str, Fit] = field(default_factory=dict)
    constants: Dict[str, ConstantEstimate] = field(default_factory=dict)
    violations: List[dict] = field(default_factory=list)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.values())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> str:
        lines = [f"# {self.experiment}: {len(self.rows)} rows, {sum(r.skipped for r in self.rows)} skipped"]
        for key, fit in sorted(self.fits.items()):
            lines.append(f"# fit {key}: slope={fit.slope:.6g} intercept={fit.intercept:.6g} points={fit.points}")
        for key, c in sorted(self.constants.items()):
            lines.append(
                f"# constant {key}: value={c.value:.6g} target={c.target:.6g} "
                f"deviation={c.deviation:.4g} error={c.error:.3g}"
            )
        lines.append(f"# violations: {len(self.violations)}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# distances and theoretical rates


def distance(exact: LatticeMeasure, approx: Approximant, norm_kind: str = "tv") -> float:
    """Norm of ``exact - approx`` plus the approximant's truncation budget."""
    return norm(exact - approx.measure, _norm_kind(norm_kind)) + approx.truncation_mass


def _m(lam: float, e: float) -> float:
    return min(1.0, lam ** (-e)) if lam > 0 else 1.0


def rate_value(kind, cs: CumulantSet, norm_kind: str = "tv") -> float:
    """Right-hand side of the matching error bound with the unknown constant set to 1."""
    kind = Kind.parse(kind)
    tv = _short(norm_kind) == "tv"
    g1, g2, g3 = cs.gamma1, cs.gamma2, cs.gamma3
    r0, r1, r2, lam = cs.r0, cs.r1, cs.r2, cs.lam
    lead = 1.0 + g1 * _m(lam, 1.0)
    if kind is Kind.POIS:
        return r0 * lead * _m(lam, 1.0) if tv else r0 * _m(lam, 1.5)
    if kind is Kind.POIS_EXPANDED:
        if tv:
            return lead * (r0**2 * _m(lam, 2.0) + r1 * _m(lam, 1.5))
        return r0**2 * _m(lam, 2.5) + r1 * _m(lam, 1.0)
    if kind is Kind.G:
        return r1 * lead * _m(lam, 1.5) if tv else r1 * _m(lam, 2.0)
    if kind is Kind.G_EXPANDED:
        if tv:
            return lead * (r1**2 * _m(lam, 3.0) + r2 * _m(lam, 2.0))
        return r1**2 * _m(lam, 3.5) + r2 * _m(lam, 2.5)
    if kind is Kind.TP:
        dt = tp_params(cs)["delta_tilde"]
        if tv:
            return (r1 + abs(g2)) / g1**1.5 + dt / g1
        return (r1 + abs(g2)) / g1**2 + dt / g1**1.5
    if kind is Kind.NB:
        return _m(g1, 1.5 if tv else 2.0) * (r1 + g2**2 / g1)
    if kind is Kind.NB_EXPANDED:
        c = abs(correction_coefficient(kind, cs))
        a, b = (3.0, 2.0) if tv else (3.5, 2.5)
        return r1**2 * _m(g1, a) + r2 * _m(g1, b) + g2**2 / g1 * c * _m(g1, a) + g2**3 / g1**2 * _m(g1, b)
    if kind is Kind.BI:
        if tv:
            return g2**2 * g1**-2.5 + r1 * g1**-1.5
        return g2**2 * g1**-3.0 + r1 * g1**-2.0
    if kind is Kind.BI_EXPANDED:
        eps = bi_params(cs)["epsilon"]
        e = 0.0 if tv else 0.5
        return (
            r1**2 * g1 ** -(3.0 + e)
            + r2 * g1 ** -(2.0 + e)
            + abs(g2) ** 3 * g1 ** -(4.0 + e)
            + eps * g2**2 * g1 ** -(3.0 + e)
            + g2**2 * abs(g3) * g1 ** -(4.0 + e)
        )
    raise ValueError(f"no rate for kind {kind!r}")


def preconditions(kind, cs: CumulantSet) -> Optional[str]:
    """``None`` if the bound for ``kind`` applies to ``cs``, else the failing condition."""
    kind = Kind.parse(kind)
    f = cs.flags
    if not f.nu12:
        return "nu12"
    if kind in (Kind.POIS, Kind.POIS_EXPANDED, Kind.G, Kind.G_EXPANDED):
        return None if f.lambda_ok else "lambda"
    if not f.ab3:
        return "3ab"
    if kind is Kind.TP and cs.gamma1 < 1:
        return "Gamma_1>=1"
    if kind in (Kind.NB, Kind.NB_EXPANDED) and not cs.gamma2 > 0:
        return "Gamma_2>0"
    if kind in (Kind.BI, Kind.BI_EXPANDED):
        if cs.gamma1 < 1:
            return "Gamma_1>=1"
        if not cs.gamma2 < 0:
            return "Gamma_2<0"
    return None


# --------------------------------------------------------------------------
# families and distance tables

Family = Union[dict, str, Callable[[int], DependentModel]]


def _family(family: Family) -> Callable[[int], DependentModel]:
    if callable(family):
        return family
    template = build_model_template(family)

    def make(n):
        return build_model(dict(template, n=int(n)))

    return make


def build_model_template(family) -> dict:
    if isinstance(family, str):
        import json

        family = json.loads(family)
    if not isinstance(family, dict) or "kind" not in family:
        raise ValueError("family must be a model spec without 'n'")
    return {k: v for k, v in family.items() if k != "n"}


def _instance_fields(model: DependentModel) -> dict:
    params = getattr(model, "params", {}) or {}
    out = {"n": int(params.get("n", model.n)), "p": params.get("p")}
    if "k1" in params:
        out.update(k1=params["k1"], k2=params["k2"], m=params["k1"] + params["k2"])
    return out


def distance_table(
    family: Family,
    n_grid: Sequence[int],
    kinds: Sequence,
    norm_kind: str = "tv",
    experiment: str = "distance",
    tol: float = 1e-12,
) -> ExperimentReport:
    """``||F_n - approximant||`` for each ``n`` and kind, with the bound's rate (C = 1)."""
    make = _family(family)
    report = ExperimentReport(experiment)
    nk = _short(norm_kind)
    kinds = [Kind.parse(k) for k in kinds]
    for n in sorted(n_grid):
        model = make(n)
        exact = model.exact_distribution()
        cs = gamma_set(model)
        info = _instance_fields(model)
        for kind in kinds:
            reason = preconditions(kind, cs)
            row = Row(experiment, kind.value, nk, float("nan"), **info)
            try:
                approx = make_approximant(kind, cs, tol)
            except PreconditionError as exc:
                row.flags = f"skipped:{exc.condition}"
                report.rows.append(row)
                continue
            row.lhs = distance(exact, approx, nk)
            row.rate_value = rate_value(kind, cs, nk)
            row.flags = cs.flags.as_string() if reason is None else f"skipped:{reason}"
            report.rows.append(row)
    return report


def rate_fit(points: Sequence[Tuple[float, float]]) -> Tuple[float, float, np.ndarray]:
    """Least-squares line through ``(log scale, log error)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (scale, error) points")
    if np.any(~np.isfinite(pts)) or np.any(pts <= 0):
        raise ValueError("scales and errors must be positive and finite")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), y - (slope * x + intercept)


def fit_rows(report: ExperimentReport, key: Optional[str] = None) -> None:
    """Fit ``log lhs`` against ``log n`` for each kind with at least 3 usable rows."""
    by_kind: Dict[str, List[Tuple[float, float]]] = {}
    for row in report.rows:
        if row.skipped or not np.isfinite(row.lhs) or row.lhs <= 0:
            continue
        by_kind.setdefault(row.kind, []).append((row.n, row.lhs))
    for kind, pts in by_kind.items():
        if len(pts) >= 3:
            s, b, res = rate_fit(pts)
            report.fits[f"{key}:{kind}" if key else kind] = Fit(s, b, tuple(res), len(pts))


def rates_experiment(family: Family, n_grid: Sequence[int], kinds: Sequence, norm_kind: str = "tv") -> ExperimentReport:
    """Distance table plus the log-log slope per kind."""
    report = distance_table(family, n_grid, kinds, norm_kind, experiment="rates")
    fit_rows(report)
    return report


# -- nuisance-controlled grids ----------------------------------------------


def _closed_form(template: dict, n: np.ndarray):
    kind = template["kind"]
    if kind == "two_runs":
        return two_runs_closed_form(n, template["p"])
    if kind == "k1k2":
        return k1k2_closed_form(n, template["k1"], template["k2"], template["p"])
    raise ValueError(f"no closed-form cumulants for family {kind!r}")


def _nuisance(template: dict, kind: Kind, n: np.ndarray) -> np.ndarray:
    g1, g2, _ = _closed_form(template, n.astype(float))
    if kind is Kind.TP:
        x = -2.0 * g2
        return x - np.floor(x)
    if kind in (Kind.BI, Kind.BI_EXPANDED):
        nt = g1 * g1 / (2.0 * np.abs(g2))
        return nt - np.floor(nt)
    raise ValueError(f"kind {kind.value!r} has no lattice nuisance parameter")


def controlled_grid(family, targets: Sequence[int], kind, search: int = 5000) -> List[int]:
    """For each target, the ``n`` in ``[target, target + search)`` with the smallest
    fractional nuisance (``delta~`` for ``tp``, ``epsilon`` for ``bi``).

    These integer-rounding terms oscillate in ``n`` and otherwise dominate
    the local slopes of a short grid.
    """
    template = build_model_template(family)
    kind = Kind.parse(kind)
    out = []
    for n0 in targets:
        cand = np.arange(int(n0), int(n0) + int(search))
        out.append(int(cand[np.argmin(_nuisance(template, kind, cand))]))
    return out


# --------------------------------------------------------------------------
# sharp constants

SHARP_EXPERIMENTS = ("nb_2runs_tv", "nb_2runs_local", "bi_k1k2_tv", "bi_k1k2_local")
DEFAULT_SHARP_GRID = {
    "nb_2runs_tv": [(1000, 0.03), (3000, 0.03), (10000, 0.03)],
    "nb_2runs_local": [(1000, 0.03), (3000, 0.03), (10000, 0.03)],
}


def bi_k1k2_grid(
    targets: Sequence[float] = (10, 30, 100), p: float = 0.05, k1: int = 2, k2: int = 2
) -> List[Tuple[int, float]]:
    """``(n, p)`` with ``(n - m + 1) a(p)`` near each target and minimal ``epsilon``."""
    m = k1 + k2
    a = k1k2_a(k1, k2, p)
    family = {"kind": "k1k2", "k1": k1, "k2": k2, "p": p}
    out = []
    for g in targets:
        n0 = int(round(g / a)) + m - 1
        (n,) = controlled_grid(family, [max(m, n0 - m)], Kind.BI, search=2 * m)
        out.append((n, p))
    return out


def _nb_range_ok(n, p) -> bool:
    return p <= 1.0 / 20.0 and n * p * p >= 1.0


def _bi_range_ok(n, p, k1, k2) -> bool:
    a = k1k2_a(k1, k2, p)
    m = k1 + k2
    return (n - m + 1) * a >= 1.0 and m * a <= 0.01


def sharp_constant_run(
    experiment: str,
    grid: Optional[Sequence[Tuple[int, float]]] = None,
    k1: int = 2,
    k2: int = 2,
    tol: float = 1e-12,
) -> ExperimentReport:
    """Normalized distances along ``grid`` and the constant at its largest instance.

    Grid points outside the asymptotic range stay in the trace flagged
    ``precondition``; the largest instance must satisfy the preconditions.
    """
    if experiment not in SHARP_EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; expected one of {SHARP_EXPERIMENTS}")
    nb = experiment.startswith("nb")
    nk = "tv" if experiment.endswith("tv") else "local"
    if grid is None:
        grid = DEFAULT_SHARP_GRID[experiment] if nb else bi_k1k2_grid(k1=k1, k2=k2)
    grid = sorted((int(n), float(p)) for n, p in grid)
    if not grid:
        raise ValueError("empty grid")
    ok = (lambda n, p: _nb_range_ok(n, p)) if nb else (lambda n, p: _bi_range_ok(n, p, k1, k2))
    if not ok(*grid[-1]):
        n, p = grid[-1]
        cond = "p<=1/20 and np^2>=1" if nb else "(n-m+1)a(p)>=1 and m a(p)<=0.01"
        raise PreconditionError(cond, f"largest instance n={n}, p={p}")

    report = ExperimentReport(experiment)
    m = k1 + k2
    target = (C_TV if nk == "tv" else C_L) / (1.0 if nb else 2.0)
    trace, in_range = [], []
    for n, p in grid:
        model = two_runs(n, p) if nb else k1k2(n, k1, k2, p)
        cs = gamma_set(model)
        approx = make_approximant(Kind.NB if nb else Kind.BI, cs, tol)
        lhs = distance(model.exact_distribution(), approx, nk)
        if nb:
            rate = p / math.sqrt(n) if nk == "tv" else 1.0 / n
        else:
            a, w = k1k2_a(k1, k2, p), n - m + 1
            rate = a**1.5 * m * (m - 1) / math.sqrt(w) if nk == "tv" else a * m * (m - 1) / w
        flags = "ok" if ok(n, p) else "precondition"
        if not nb:
            flags += f"|epsilon={bi_params(cs)['epsilon']:.6g}"
        info = _instance_fields(model)
        report.rows.append(Row(experiment, approx.kind.value, nk, lhs, rate, flags=flags, **info))
        trace.append((n, lhs / rate))
        in_range.append(ok(n, p))
    value = trace[-1][1]
    err = abs(trace[-1][1] - trace[-2][1]) if len(trace) > 1 else float("nan")
    report.constants[experiment] = ConstantEstimate(value, target, err, tuple(trace), tuple(in_range))
    return report


# --------------------------------------------------------------------------
# smoothing inequalities


def _apply_u(w: np.ndarray, j: int) -> np.ndarray:
    """Weights of ``U^j M`` for ``M`` on ``0..len(w)-1`` (support grows by ``j``)."""
    for _ in range(j):
        w = np.diff(np.concatenate(([0.0], w, [0.0])))
    return w


def _poisson_weights(t: float) -> np.ndarray:
    hi = int(t + 40.0 * math.sqrt(t) + 60)
    return stats.poisson.pmf(np.arange(hi + 1), t)


def _binom_weights(n: int, p: float) -> np.ndarray:
    return stats.binom.pmf(np.arange(n + 1), n, p)


DEFAULT_A10_GRID = {
    "j": [1, 2, 3, 4, 5, 6],
    "t": [2.0**k for k in range(-1, 11)],
    "p": [0.01, 0.05, 0.1, 0.2, 0.3, 0.5],
    "n": [10, 100, 1000, 10000],
}
DEFAULT_SHARPC_GRID = {
    "t": [10.0, 100.0, 1000.0, 10000.0],
    "np": [(50, 0.3), (500, 0.3), (5000, 0.3), (50000, 0.3)],
}
# relative slack for floating-point comparison of exact inequalities
_SLACK = 1e-12


def _check(report, row: Row, inputs: dict):
    ok = row.lhs <= row.rate_value * (1.0 + _SLACK)
    row.flags = "ok" if ok else "violation"
    report.rows.append(row)
    if not ok:
        report.violations.append(dict(inputs, inequality=row.kind, lhs=row.lhs, rhs=row.rate_value))


def _a10(grid: dict) -> ExperimentReport:
    report = ExperimentReport("a10")
    js, ts, ps, ns = (sorted(grid[k]) for k in ("j", "t", "p", "n"))
    local_const: Dict[int, List[Tuple[float, float]]] = {}
    for t in ts:
        base = _poisson_weights(t)
        for j in js:
            w = _apply_u(base, j)
            tv, loc = float(np.abs(w).sum()), float(np.abs(w).max())
            inputs = {"t": t, "j": j}
            if j == 2:
                _check(report, Row("a10", "u2_exp", "tv", tv, 3.0 / (t * math.e), t=t, j=j), inputs)
            _check(report, Row("a10", "uj_exp", "tv", tv, (2.0 * j / (t * math.e)) ** (j / 2.0), t=t, j=j), inputs)
            # the local bound has an unspecified constant: report C(j) = lhs * t^{(j+1)/2}
            c = loc * t ** ((j + 1) / 2.0)
            report.rows.append(Row("a10", "uj_exp_local", "local", loc, t ** (-(j + 1) / 2.0), t=t, j=j, flags="constant"))
            local_const.setdefault(j, []).append((t, c))
    for n in ns:
        for p in ps:
            base = _binom_weights(n, p)
            s = p * (1.0 - p)
            for j in js:
                w = _apply_u(base, j)
                tv, loc = float(np.abs(w).sum()), float(np.abs(w).max())
                log_binom = gammaln(n + j + 1) - gammaln(j + 1) - gammaln(n + 1)
                rhs_tv = math.exp(-0.5 * log_binom) * s ** (-j / 2.0)
                rhs_loc = (
                    math.sqrt(math.e) / 2.0
                    * (1.0 + math.sqrt(math.pi / (2.0 * j)))
                    * (n / (n + j + 1.0)) ** ((n + j + 1) / 2.0)
                    * (j / (n * s)) ** ((j + 1) / 2.0)
                )
                inputs = {"n": n, "p": p, "j": j}
                _check(report, Row("a10", "uj_binom", "tv", tv, rhs_tv, n=n, p=p, j=j), inputs)
                _check(report, Row("a10", "uj_binom_local", "local", loc, rhs_loc, n=n, p=p, j=j), inputs)
    for j, pts in local_const.items():
        vals = [c for _, c in pts]
        report.constants[f"local_C({j})"] = ConstantEstimate(
            max(vals), float("nan"), abs(vals[-1] - vals[-2]) if len(vals) > 1 else float("nan"),
            tuple(pts),
        )
    return report


def _bounded(values: Sequence[float]) -> bool:
    """Finite, with non-increasing step sizes (a settling, hence bounded, sequence).

    Unbounded growth such as ``t^{1/2}`` on a geometric grid has growing steps.
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return False
    steps = np.abs(np.diff(v))
    return bool(np.all(steps[1:] <= steps[:-1] * (1.0 + 1e-9)))


def _sharp_c(grid: dict) -> ExperimentReport:
    report = ExperimentReport("sharpC")
    series = {"exp_tv": [], "exp_local": [], "binom_tv": [], "binom_local": []}
    for t in sorted(grid["t"]):
        w = _apply_u(_poisson_weights(t), 3)
        tv, loc = float(np.abs(w).sum()), float(np.abs(w).max())
        for key, lhs, target, e_main, e_res in (
            ("exp_tv", tv, C_TV, 1.5, 2.0),
            ("exp_local", loc, C_L, 2.0, 2.5),
        ):
            resid = (lhs - 3.0 * target / t**e_main) * t**e_res
            series[key].append((t, lhs * t**e_main / 3.0, resid))
            report.rows.append(Row("sharpC", key, key.split("_")[1], lhs, 3.0 * target / t**e_main, t=t, j=3, flags=f"residual_scaled={resid:.12g}"))
    for n, p in sorted(grid["np"]):
        s = n * p * (1.0 - p)
        w = _apply_u(_binom_weights(n, p), 3)
        tv, loc = float(np.abs(w).sum()), float(np.abs(w).max())
        for key, lhs, target, e_main, e_res in (
            ("binom_tv", tv, C_TV, 1.5, 2.0),
            ("binom_local", loc, C_L, 2.0, 2.5),
        ):
            resid = (lhs - 3.0 * target / s**e_main) * s**e_res
            series[key].append((s, lhs * s**e_main / 3.0, resid))
            report.rows.append(Row("sharpC", key, key.split("_")[1], lhs, 3.0 * target / s**e_main, n=n, p=p, j=3, flags=f"residual_scaled={resid:.12g}"))
    for key, pts in series.items():
        if not pts:
            continue
        target = C_TV if key.endswith("tv") else C_L
        norm_vals = [v for _, v, _ in pts]
        report.constants[key] = ConstantEstimate(
            norm_vals[-1], target,
            abs(norm_vals[-1] - norm_vals[-2]) if len(pts) > 1 else float("nan"),
            tuple((s, v) for s, v, _ in pts),
        )
        resid = [r for _, _, r in pts]
        if not _bounded(resid):
            report.violations.append({"series": key, "scaled_residuals": resid, "scales": [s for s, _, _ in pts]})
    return report


def smoothing_check(lemma: str, grid: Optional[dict] = None) -> ExperimentReport:
    """Evaluate the smoothing inequalities (``"a10"``) or sharp constants (``"sharpC"``)."""
    if lemma == "a10":
        g = dict(DEFAULT_A10_GRID)
        g.update(grid or {})
        if any(t <= 0 for t in g["t"]) or any(not 0 < p < 1 for p in g["p"]) or any(j > 6 or j < 1 for j in g["j"]):
            raise ValueError("grid needs t > 0, 0 < p < 1 and 1 <= j <= 6")
        return _a10(g)
    if lemma == "sharpC":
        g = dict(DEFAULT_SHARPC_GRID)
        g.update(grid or {})
        return _sharp_c(g)
    raise ValueError(f"unknown lemma {lemma!r}; expected 'a10' or 'sharpC'")


# --------------------------------------------------------------------------
# demonstration: three-point summands versus a binomial with the same mean

THREE_POINT_PMF = (0.989, 0.010, 0.001)


def three_point_sweep(
    n_grid: Sequence[int] = (100, 1000, 10000), pmf: Sequence[float] = THREE_POINT_PMF, norm_kind: str = "tv"
) -> ExperimentReport:
    """Distance between the sum of ``n`` iid variables on ``{0, 1, 2}`` and ``Bi(n, mean)``.

    The mass at 2 keeps the distance bounded away from zero as ``n`` grows;
    only the rows are produced, no limiting constant is asserted.
    """
    pmf = np.asarray(pmf, dtype=float)
    if pmf.shape != (3,) or np.any(pmf < 0) or not math.isclose(pmf.sum(), 1.0, abs_tol=1e-12):
        raise ValueError("pmf must be three nonnegative weights summing to 1")
    mean = float(pmf[1] + 2.0 * pmf[2])
    if mean >= 1.0:
        raise ValueError("mean must be below 1 for a binomial match")
    nk = _short(norm_kind)
    report = ExperimentReport("three_point")
    for n in sorted(int(n) for n in n_grid):
        S = conv_power(from_pmf(pmf), n)
        B = from_pmf(stats.binom.pmf(np.arange(n + 1), n, mean))
        lhs = norm(S - B, _norm_kind(nk))
        report.rows.append(Row("three_point", "bi", nk, lhs, n=n, p=mean, flags="demo"))
    return report

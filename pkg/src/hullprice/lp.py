"""Linear program container, solver front end, duality checks, text dump.

Dual sign convention for ``min c.x``: duals of ``<=`` rows are <= 0, duals
of ``>=`` rows are >= 0, duals of ``=`` rows are free. Reduced costs are
reported for the structural variables only and are exactly zero on the
basic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .simplex import Simplex, NumericalFailure  # noqa: F401  (re-exported)

SENSES = ("<=", ">=", "=")

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

DUALITY_TOL = 1e-6


@dataclass(frozen=True)
class LinearProgram:
    """min objective.x subject to rows and variable bounds.

    Each row is ``(coeffs, sense, rhs)`` with ``coeffs`` a tuple of
    ``(var_index, coefficient)`` pairs.
    """

    n_vars: int
    objective: tuple[float, ...]
    rows: tuple = ()
    var_lo: tuple[float, ...] = ()
    var_hi: tuple[float, ...] = ()
    row_labels: tuple[str, ...] = ()
    var_labels: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.n_vars
        if len(self.objective) != n:
            raise ValueError("objective length != n_vars")
        object.__setattr__(self, "var_lo",
                           self.var_lo or tuple([-math.inf] * n))
        object.__setattr__(self, "var_hi",
                           self.var_hi or tuple([math.inf] * n))
        if len(self.var_lo) != n or len(self.var_hi) != n:
            raise ValueError("bound vectors must have n_vars entries")
        for coeffs, sense, rhs in self.rows:
            if sense not in SENSES:
                raise ValueError(f"unknown row sense {sense!r}")
            if not math.isfinite(rhs):
                raise ValueError("row rhs must be finite")
            for j, a in coeffs:
                if not 0 <= j < n:
                    raise ValueError(f"variable index {j} out of range")
                if not math.isfinite(a):
                    raise ValueError("row coefficient must be finite")
        if self.row_labels and len(self.row_labels) != len(self.rows):
            raise ValueError("row_labels length mismatch")
        if self.var_labels and len(self.var_labels) != n:
            raise ValueError("var_labels length mismatch")

    @property
    def n_rows(self):
        return len(self.rows)

    def row_label(self, i):
        return self.row_labels[i] if self.row_labels else f"r{i}"

    def var_label(self, j):
        return self.var_labels[j] if self.var_labels else f"x{j}"

    def matrix(self):
        """Structural coefficient matrix as scipy CSC."""
        data, ri, ci = [], [], []
        for i, (coeffs, _, _) in enumerate(self.rows):
            for j, a in coeffs:
                ri.append(i)
                ci.append(j)
                data.append(a)
        return sp.csc_matrix((data, (ri, ci)), shape=(self.n_rows, self.n_vars))


@dataclass(frozen=True)
class LpSolution:
    status: str
    primal: tuple[float, ...] = ()
    duals: tuple[float, ...] = ()
    reduced_costs: tuple[float, ...] = ()
    objective: float = math.nan
    iterations: int = 0
    basis: tuple = None


class LpBuilder:
    """Incremental LP assembly with named variables and labelled rows."""

    def __init__(self):
        self._obj = []
        self._lo = []
        self._hi = []
        self._vnames = []
        self._index = {}
        self._rows = []
        self._rlabels = []

    def add_var(self, name, lo=-math.inf, hi=math.inf, obj=0.0):
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        j = len(self._vnames)
        self._index[name] = j
        self._vnames.append(name)
        self._lo.append(lo)
        self._hi.append(hi)
        self._obj.append(obj)
        return j

    def __contains__(self, name):
        return name in self._index

    def col(self, name):
        return self._index[name]

    def set_bounds(self, name, lo, hi):
        j = self._index[name]
        self._lo[j] = lo
        self._hi[j] = hi

    def add_obj(self, key, coef):
        j = key if isinstance(key, int) else self._index[key]
        self._obj[j] += coef

    def add_row(self, coeffs, sense, rhs, label):
        """coeffs: iterable of (variable name or column index, coefficient).

        Repeated variables are merged; zero coefficients are kept out of
        the stored row.
        """
        acc = {}
        for key, a in coeffs:
            j = key if isinstance(key, int) else self._index[key]
            acc[j] = acc.get(j, 0.0) + a
        packed = tuple((j, a) for j, a in sorted(acc.items()) if a != 0.0)
        self._rows.append((packed, sense, float(rhs)))
        self._rlabels.append(label)
        return len(self._rows) - 1

    def build(self):
        return LinearProgram(
            n_vars=len(self._vnames),
            objective=tuple(self._obj),
            rows=tuple(self._rows),
            var_lo=tuple(self._lo),
            var_hi=tuple(self._hi),
            row_labels=tuple(self._rlabels),
            var_labels=tuple(self._vnames),
        )


def with_bounds(lp, updates):
    """Copy of ``lp`` with variable bounds overridden.

    updates maps column index -> (lo, hi). Rows and objective are shared.
    """
    lo = list(lp.var_lo)
    hi = list(lp.var_hi)
    for j, (l, h) in updates.items():
        lo[j] = l
        hi[j] = h
    return replace(lp, var_lo=tuple(lo), var_hi=tuple(hi))


def solve_lp(lp, maxiter=None, basis=None):
    """Solve with the bounded-variable primal simplex; exact basic duals.

    maxiter defaults to 50 * (n_vars + n_rows). Raises NumericalFailure if
    the pivot loop exceeds it.
    """
    n, m = lp.n_vars, lp.n_rows
    if maxiter is None:
        maxiter = 50 * (n + m)
    slack_lo = []
    slack_hi = []
    b = []
    for coeffs, sense, rhs in lp.rows:
        b.append(rhs)
        if sense == "<=":
            slack_lo.append(0.0)
            slack_hi.append(math.inf)
        elif sense == ">=":
            slack_lo.append(-math.inf)
            slack_hi.append(0.0)
        else:
            slack_lo.append(0.0)
            slack_hi.append(0.0)
    lo = np.concatenate([np.asarray(lp.var_lo, dtype=float), slack_lo])
    hi = np.concatenate([np.asarray(lp.var_hi, dtype=float), slack_hi])
    engine = Simplex(lp.matrix(), np.asarray(b, dtype=float),
                     np.asarray(lp.objective, dtype=float), lo, hi, maxiter)
    if basis is not None:
        res = engine.solve(basis=basis[0], vstat=basis[1])
    else:
        res = engine.solve()
    if res.status == "infeasible":
        return LpSolution(status=INFEASIBLE, iterations=res.iterations)
    if res.status == "unbounded":
        return LpSolution(status=UNBOUNDED, iterations=res.iterations)
    return LpSolution(
        status=OPTIMAL,
        primal=tuple(float(v) for v in res.x),
        duals=tuple(float(v) for v in res.duals),
        reduced_costs=tuple(float(v) for v in res.reduced_costs),
        objective=res.objective,
        iterations=res.iterations,
        basis=(tuple(int(i) for i in res.basis),
               tuple(int(s) for s in res.vstat)),
    )


@dataclass(frozen=True)
class DualityReport:
    primal_residual: float
    dual_residual: float
    complementarity: float
    objective_gap: float
    ok: bool
    notes: tuple[str, ...] = ()


def verify_duality(lp, sol, tol=DUALITY_TOL):
    """Check an Optimal solution against its certificate.

    Verifies primal feasibility, dual feasibility (reduced-cost and row-dual
    signs), complementary slackness, and the strong-duality identity
    ``c.x = b.y + sum_j rc_j x_j`` (the sum carries the variable-bound
    contributions). Residuals are compared against ``tol`` scaled by the
    magnitude of the data they involve.
    """
    if sol.status != OPTIMAL:
        raise ValueError("verify_duality expects an Optimal solution")
    x = np.asarray(sol.primal)
    y = np.asarray(sol.duals)
    rc = np.asarray(sol.reduced_costs)
    notes = []

    primal = 0.0
    comp = 0.0
    for i, (coeffs, sense, rhs) in enumerate(lp.rows):
        ax = sum(a * x[j] for j, a in coeffs)
        slack = rhs - ax
        if sense == "<=":
            primal = max(primal, -slack)
        elif sense == ">=":
            primal = max(primal, slack)
        else:
            primal = max(primal, abs(slack))
        comp = max(comp, abs(y[i] * slack))
    for j in range(lp.n_vars):
        primal = max(primal, lp.var_lo[j] - x[j], x[j] - lp.var_hi[j])

    dual = 0.0
    for i, (_, sense, _) in enumerate(lp.rows):
        if sense == "<=" and y[i] > 0:
            dual = max(dual, y[i])
        elif sense == ">=" and y[i] < 0:
            dual = max(dual, -y[i])
    A = lp.matrix()
    rc_exact = np.asarray(lp.objective) - A.T @ y
    dual = max(dual, float(np.max(np.abs(rc - rc_exact), initial=0.0)))
    for j in range(lp.n_vars):
        at_lo = math.isfinite(lp.var_lo[j]) and x[j] - lp.var_lo[j] <= 1e-7
        at_up = math.isfinite(lp.var_hi[j]) and lp.var_hi[j] - x[j] <= 1e-7
        if at_lo and at_up:
            continue  # fixed variable: any reduced cost is fine
        if at_lo:
            dual = max(dual, -rc[j])
        elif at_up:
            dual = max(dual, rc[j])
        else:
            dual = max(dual, abs(rc[j]))
            if abs(rc[j]) > tol:
                notes.append(f"nonzero reduced cost on interior variable "
                             f"{lp.var_label(j)}")

    cx = float(np.asarray(lp.objective) @ x)
    b = np.asarray([r[2] for r in lp.rows])
    dual_obj = float(b @ y) + float(rc @ x) if lp.n_rows else float(rc @ x)
    gap = abs(cx - dual_obj)
    obj_gap_ok = gap <= tol * (1.0 + abs(cx))

    scale_b = 1.0 + (float(np.max(np.abs(b))) if lp.n_rows else 0.0) + \
        float(np.max(np.abs(x), initial=0.0))
    scale_c = 1.0 + float(np.max(np.abs(lp.objective), initial=0.0)) + \
        float(np.max(np.abs(y), initial=0.0))
    ok = (primal <= tol * scale_b and dual <= tol * scale_c
          and comp <= tol * scale_b * scale_c and obj_gap_ok)
    return DualityReport(
        primal_residual=primal, dual_residual=dual, complementarity=comp,
        objective_gap=gap, ok=ok, notes=tuple(notes))


def _clean(label):
    return "".join(ch if not ch.isspace() else "_" for ch in label)


def dump_lp(lp, path, name="LP"):
    """Write a fixed-format text rendering (MPS layout) of the program."""
    lines = [f"NAME          {_clean(name)}", "ROWS", " N  COST"]
    sense_tag = {"<=": "L", ">=": "G", "=": "E"}
    for i, (_, sense, _) in enumerate(lp.rows):
        lines.append(f" {sense_tag[sense]}  {_clean(lp.row_label(i))}")
    lines.append("COLUMNS")
    by_var = [[] for _ in range(lp.n_vars)]
    for i, (coeffs, _, _) in enumerate(lp.rows):
        for j, a in coeffs:
            by_var[j].append((lp.row_label(i), a))
    for j in range(lp.n_vars):
        vname = _clean(lp.var_label(j))
        entries = [("COST", lp.objective[j])] + by_var[j]
        for rname, a in entries:
            lines.append(f"    {vname:<24}  {_clean(rname):<24}  {a!r}")
    lines.append("RHS")
    for i, (_, _, rhs) in enumerate(lp.rows):
        lines.append(f"    RHS  {_clean(lp.row_label(i)):<24}  {rhs!r}")
    lines.append("BOUNDS")
    for j in range(lp.n_vars):
        vname = _clean(lp.var_label(j))
        lo, hi = lp.var_lo[j], lp.var_hi[j]
        if lo == hi:
            lines.append(f" FX BND  {vname:<24}  {lo!r}")
            continue
        if math.isinf(lo) and math.isinf(hi):
            lines.append(f" FR BND  {vname}")
            continue
        if math.isinf(lo):
            lines.append(f" MI BND  {vname}")
        else:
            lines.append(f" LO BND  {vname:<24}  {lo!r}")
        if math.isinf(hi):
            lines.append(f" PL BND  {vname}")
        else:
            lines.append(f" UP BND  {vname:<24}  {hi!r}")
    lines.append("ENDATA")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path

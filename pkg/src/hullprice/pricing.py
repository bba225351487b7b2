"""Pricing routes and uplift accounting.

Three price vectors can be read off the same instance:

* convex hull prices: duals of the load-balance rows of the interval-space
  system LP (no integrality needed; the LP optimum is the Lagrangian dual
  bound, so these duals minimize total uplift);
* fixed-commitment prices: duals of the commitment-space dispatch LP with
  u, v frozen at the system MIP optimum (the classic restricted pricing
  run);
* relaxation prices: duals of the commitment-space LP with the binaries
  merely relaxed to [0, 1].

The uplift of one unit under prices pi is its best achievable profit
against pi (by the per-unit dynamic program) minus the profit the awarded
schedule earns at those prices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bnb import MipProblem, solve_mip
from .formulations import assemble_2bin, assemble_meuc, map_to_schedule
from .lp import OPTIMAL, solve_lp, with_bounds
from .ucdp import profit_max


class SolveFailure(RuntimeError):
    """The system MIP or LP did not reach a usable optimum."""


@dataclass(frozen=True)
class GenUplift:
    generator: str
    best_profit: float   # the unit's own optimal profit against the prices
    iso_profit: float    # profit of the awarded schedule at the prices
    uplift: float


@dataclass(frozen=True)
class PricingReport:
    method: str
    prices: tuple
    z_qip: float
    relaxation_objective: float
    rows: tuple
    total_uplift: float


@dataclass(frozen=True)
class Comparison:
    tlmp: PricingReport
    chp: PricingReport
    gap_tm: float


@dataclass(frozen=True)
class CommitmentResult:
    objective: float
    schedules: dict
    model: object
    mip: object


def solve_commitment(instance, gap_tol=1e-6, node_limit=10 ** 6):
    """System MIP on the interval-space encoding; schedules per unit."""
    meuc = assemble_meuc(instance)
    res = solve_mip(MipProblem(meuc.lp, meuc.integer_cols),
                    gap_tol=gap_tol, node_limit=node_limit)
    if res.status == "Infeasible":
        raise SolveFailure("commitment problem is infeasible")
    if res.status != "Optimal":
        raise SolveFailure(f"commitment solve stopped at {res.status} "
                           f"(gap {res.gap:.3g})")
    schedules = {gen.id: map_to_schedule(gen, meuc.blocks[gen.id], res.primal)
                 for gen in instance.generators}
    return CommitmentResult(objective=res.objective, schedules=schedules,
                            model=meuc, mip=res)


def price_chp(instance):
    """Convex hull prices and the relaxation objective they certify."""
    meuc = assemble_meuc(instance)
    sol = solve_lp(meuc.lp)
    if sol.status != OPTIMAL:
        raise SolveFailure(f"system LP is {sol.status}")
    prices = tuple(sol.duals[r] for r in meuc.load_balance_rows)
    return prices, sol.objective


def _fix_commitment(model, instance, schedules):
    fixes = {}
    for gen in instance.generators:
        tv = model.blocks[gen.id]
        sch = schedules[gen.id]
        for t in range(1, instance.T + 1):
            fixes[tv.u[t]] = (float(sch.u[t - 1]), float(sch.u[t - 1]))
            fixes[tv.v[t]] = (float(sch.v[t - 1]), float(sch.v[t - 1]))
    return with_bounds(model.lp, fixes)


def price_tlmp(instance, commitment=None, gap_tol=1e-6, node_limit=10 ** 6):
    """Fixed-commitment dispatch duals at the system MIP optimum."""
    if commitment is None:
        commitment = solve_commitment(instance, gap_tol, node_limit)
    model = assemble_2bin(instance)
    sol = solve_lp(_fix_commitment(model, instance, commitment.schedules))
    if sol.status != OPTIMAL:
        raise SolveFailure(f"fixed-commitment dispatch LP is {sol.status}")
    prices = tuple(sol.duals[r] for r in model.load_balance_rows)
    return prices, commitment


def price_2bin_relaxation(instance):
    """Duals of the commitment-space LP relaxation (no integrality)."""
    model = assemble_2bin(instance)
    sol = solve_lp(model.lp)
    if sol.status != OPTIMAL:
        raise SolveFailure(f"commitment-space LP is {sol.status}")
    prices = tuple(sol.duals[r] for r in model.load_balance_rows)
    return prices, sol.objective


def uplift(instance, prices, schedules):
    """Per-unit uplift rows under the given prices and awarded schedules."""
    rows = []
    for gen in instance.generators:
        sch = schedules[gen.id]
        iso = sum(p * x for p, x in zip(prices, sch.x)) - sch.cost
        best, _ = profit_max(gen, prices)
        rows.append(GenUplift(generator=gen.id, best_profit=best,
                              iso_profit=iso, uplift=best - iso))
    return tuple(rows)


def _report(method, instance, prices, z_qip, relax_obj, schedules):
    rows = uplift(instance, prices, schedules)
    return PricingReport(method=method, prices=tuple(prices), z_qip=z_qip,
                         relaxation_objective=relax_obj, rows=rows,
                         total_uplift=sum(r.uplift for r in rows))


def price(instance, method, gap_tol=1e-6, node_limit=10 ** 6):
    """One PricingReport for method "chp", "tlmp", or "2bin-lp"."""
    commitment = solve_commitment(instance, gap_tol, node_limit)
    if method == "chp":
        prices, relax = price_chp(instance)
    elif method == "tlmp":
        prices, _ = price_tlmp(instance, commitment)
        relax = commitment.objective
    elif method == "2bin-lp":
        prices, relax = price_2bin_relaxation(instance)
    else:
        raise ValueError(f"unknown pricing method {method!r}")
    return _report(method, instance, prices, commitment.objective, relax,
                   commitment.schedules)


def compare(instance, gap_tol=1e-6, node_limit=10 ** 6):
    """TLMP and convex hull reports on a shared awarded commitment."""
    commitment = solve_commitment(instance, gap_tol, node_limit)
    pi_t, _ = price_tlmp(instance, commitment)
    pi_c, relax = price_chp(instance)
    rep_t = _report("tlmp", instance, pi_t, commitment.objective,
                    commitment.objective, commitment.schedules)
    rep_c = _report("chp", instance, pi_c, commitment.objective, relax,
                    commitment.schedules)
    if rep_t.total_uplift > 1e-12:
        gap_tm = (rep_t.total_uplift - rep_c.total_uplift) / rep_t.total_uplift
    else:
        gap_tm = 0.0
    return Comparison(tlmp=rep_t, chp=rep_c, gap_tm=gap_tm)


def lagrangian_value(instance, prices):
    """pi.d minus the summed per-unit optimal profits against pi.

    Weak duality puts this at or below the MIP optimum for every price
    vector; at the convex hull prices it attains the system LP value.
    """
    total = sum(p * d for p, d in zip(prices, instance.demand))
    for gen in instance.generators:
        best, _ = profit_max(gen, prices)
        total -= best
    return total


# ---------------------------------------------------------------------------
# CSV rendering (deterministic: fixed column order, %.10g floats)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    if isinstance(v, float):
        return f"{v + 0.0:.10g}"  # normalizes -0.0
    return str(v)


def prices_csv(reports):
    lines = ["method,period,price"]
    for rep in reports:
        for t, p in enumerate(rep.prices, start=1):
            lines.append(f"{rep.method},{t},{_fmt(float(p))}")
    return "\n".join(lines) + "\n"


def uplift_csv(reports):
    lines = ["method,generator,best_profit,iso_profit,uplift"]
    for rep in reports:
        for r in rep.rows:
            lines.append(",".join([rep.method, r.generator,
                                   _fmt(float(r.best_profit)),
                                   _fmt(float(r.iso_profit)),
                                   _fmt(float(r.uplift))]))
    return "\n".join(lines) + "\n"


def summary_csv(reports, gap_tm=None):
    lines = ["method,total_uplift,z_qip,relaxation_obj,gap_tm"]
    for rep in reports:
        g = gap_tm if rep.method == "tlmp" and gap_tm is not None else None
        lines.append(",".join([rep.method, _fmt(float(rep.total_uplift)),
                               _fmt(float(rep.z_qip)),
                               _fmt(float(rep.relaxation_objective)),
                               _fmt(g)]))
    return "\n".join(lines) + "\n"

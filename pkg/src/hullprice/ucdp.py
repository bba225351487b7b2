"""Single-generator scheduling: interval dispatch LPs, value-function DP,
schedule extraction, price-taking profit maximization, and a brute-force
enumeration oracle.

The DP works on two value functions over period nodes:

* ``v_up[t]``: cheapest continuation given the unit turns (or stays) on at
  t; chooses the run end k (shutting down at k+1, paying the shutdown cost
  of the run length) or running through T.
* ``v_down[t]``: cheapest continuation given the unit shuts down at t+1
  (t is its last on period); chooses the next start k >= t + ell + 1
  (paying the startup cost of the off gap) or stays off for good.

Interval generation costs come from a dispatch LP per on-run; with a price
vector the per-period slopes are shifted by -pi so "cost" means cost minus
revenue throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .lp import LpBuilder, solve_lp, OPTIMAL
from .model import Schedule, evaluate_schedule_cost


class InfeasibleDispatch(RuntimeError):
    """The dispatch LP of an on-interval has no feasible output profile."""


class EnumerationTooLarge(ValueError):
    """brute_force_uc refuses horizons beyond its enumeration guard."""


@dataclass(frozen=True)
class EdResult:
    cost: float
    dispatch: tuple[float, ...]


def solve_ed(gen, t, k, prices=None):
    """Minimum net cost of running exactly over periods [t, k].

    Builds and solves the interval dispatch LP: output bounds, the ramp
    chain, the start-ramp cap at t (skipped when t=1 for an initially-on
    unit, whose pre-horizon output is unconstrained) and the shutdown-ramp
    cap at k (skipped when k=T, where no shutdown happens). Start-up and
    shut-down lump costs are not included here.
    """
    if k < t:
        return EdResult(0.0, ())
    T = gen.n_periods
    if not (1 <= t and k <= T):
        raise ValueError(f"interval [{t}, {k}] outside horizon [1, {T}]")
    pi = prices if prices is not None else (0.0,) * T
    bld = LpBuilder()
    for s in range(t, k + 1):
        bld.add_var(f"x{s}", lo=gen.c_min, hi=gen.c_max)
        bld.add_var(f"f{s}", lo=-math.inf, hi=math.inf, obj=1.0)
    for s in range(t, k + 1):
        for j, piece in enumerate(gen.cost[s - 1].pieces):
            bld.add_row([(f"f{s}", 1.0), (f"x{s}", -(piece.a - pi[s - 1]))],
                        ">=", piece.b, f"cost:s={s}:j={j}")
    if not (t == 1 and gen.initial.is_on):
        bld.add_row([(f"x{t}", 1.0)], "<=", gen.start_ramp, f"startramp:s={t}")
    if k != T:
        bld.add_row([(f"x{k}", 1.0)], "<=", gen.start_ramp, f"shutramp:s={k}")
    for s in range(t + 1, k + 1):
        bld.add_row([(f"x{s}", 1.0), (f"x{s - 1}", -1.0)], "<=", gen.ramp,
                    f"rampup:s={s}")
        bld.add_row([(f"x{s - 1}", 1.0), (f"x{s}", -1.0)], "<=", gen.ramp,
                    f"rampdn:s={s}")
    sol = solve_lp(bld.build())
    if sol.status != OPTIMAL:
        raise InfeasibleDispatch(
            f"{gen.id}: no feasible dispatch over [{t}, {k}] ({sol.status})")
    dispatch = tuple(sol.primal[2 * i] for i in range(k - t + 1))
    return EdResult(sol.objective, dispatch)


class IntervalCostCache:
    """Lazy memo of solve_ed results for one (generator, prices) pair."""

    def __init__(self, gen, prices=None):
        self.gen = gen
        self.prices = prices
        self._memo = {}

    def result(self, t, k):
        key = (t, k)
        if key not in self._memo:
            self._memo[key] = solve_ed(self.gen, t, k, self.prices)
        return self._memo[key]

    def cost(self, t, k):
        return self.result(t, k).cost

    def dispatch(self, t, k):
        return self.result(t, k).dispatch

    def items(self):
        return sorted(self._memo.items())


@dataclass
class ValueTables:
    """DP values, argmins, and the interval cache that produced them.

    ``argmin`` keys: ("up", t) -> ("until", k) or ("to_end",);
    ("down", t) -> ("restart", k) or ("end",); "root" -> ("shutdown", t) /
    ("stay_on",) for initially-on units, ("start", t) / ("never",) for
    initially-off ones.
    """

    objective: float
    v_down: dict = field(default_factory=dict)
    v_up: dict = field(default_factory=dict)
    argmin: dict = field(default_factory=dict)
    ed: IntervalCostCache = None
    prices: tuple = None


def _best(candidates):
    """(value, tag) with strictly-better wins; ties keep the earliest."""
    best_v, best_tag = math.inf, None
    for value, tag in candidates:
        if value < best_v - 0.0:  # strict: earlier candidates win ties
            best_v, best_tag = value, tag
    return best_v, best_tag


def run_dp(gen, prices=None):
    """Value-function DP for one generator; returns (objective, tables).

    The objective is the minimum over feasible schedules of generation
    cost (net of prices, if given) plus start-up and shut-down costs.
    """
    T = gen.n_periods
    if prices is not None and len(prices) != T:
        raise ValueError("price vector length does not match the horizon")
    ed = IntervalCostCache(gen, prices)
    S = gen.startup_cost.value
    Sp = gen.shutdown_cost.value
    init = gen.initial
    tables = ValueTables(objective=math.nan, ed=ed,
                         prices=tuple(prices) if prices is not None else None)
    v_down, v_up, arg = tables.v_down, tables.v_up, tables.argmin

    if init.is_on:
        start_lo = init.t0(gen.L)        # earliest first-shutdown node
        up_lo = start_lo + gen.ell + 1   # earliest restart period
        extra_on = init.on_for           # pre-horizon on time, for S'
    else:
        start_lo = max(init.t0_minus(gen.ell), 1)  # earliest first start
        up_lo = start_lo
        extra_on = 0

    down_lo = min(start_lo, up_lo)
    for t in range(T, down_lo - 1, -1):
        # shutdown node t: off from t+1 onward until a restart (or forever)
        if t >= down_lo:
            if t >= T - gen.ell:
                v_down[t] = 0.0
                arg[("down", t)] = ("end",)
            else:
                cands = [(S(k - t - 1) + v_up[k], ("restart", k))
                         for k in range(t + gen.ell + 1, T + 1)]
                cands.append((0.0, ("end",)))
                v_down[t], arg[("down", t)] = _best(cands)
        # start node t: unit is on at t (fresh run for the up table)
        if t >= up_lo:
            cands = [(Sp(k - t + 1) + ed.cost(t, k) + v_down[k], ("until", k))
                     for k in range(t + gen.L - 1, T)]
            cands.append((ed.cost(t, T), ("to_end",)))
            v_up[t], arg[("up", t)] = _best(cands)

    if init.is_on:
        cands = [(Sp(t + extra_on) + ed.cost(1, t) + v_down[t], ("shutdown", t))
                 for t in range(start_lo, T)]
        cands.append((ed.cost(1, T), ("stay_on",)))
    else:
        cands = [(S(init.off_for + t - 1) + v_up[t], ("start", t))
                 for t in range(start_lo, T + 1)]
        cands.append((0.0, ("never",)))
    tables.objective, tables.argmin["root"] = _best(cands)
    return tables.objective, tables


def extract_schedule(gen, tables):
    """Follow the DP argmins into a concrete schedule.

    The schedule's ``cost`` is evaluated at the generator's own cost data
    (no price folding); its net cost ``cost - pi . x`` reproduces the DP
    objective.
    """
    T = gen.n_periods
    u = [0] * T
    v = [0] * T
    x = [0.0] * T
    arg = tables.argmin
    ed = tables.ed

    def fill(t, k):
        for s, out in zip(range(t, k + 1), ed.dispatch(t, k)):
            u[s - 1] = 1
            x[s - 1] = out

    root = arg["root"]
    if gen.initial.is_on:
        if root == ("stay_on",):
            fill(1, T)
            node = None
        else:
            _, t = root
            if t >= 1:
                fill(1, t)
            node = ("down", t)
    else:
        if root == ("never",):
            node = None
        else:
            _, t = root
            v[t - 1] = 1
            node = ("up", t)

    while node is not None:
        kind, t = node
        choice = arg[node]
        if kind == "down":
            if choice == ("end",):
                node = None
            else:
                _, k = choice
                v[k - 1] = 1
                node = ("up", k)
        else:  # "up": unit runs from t
            if choice == ("to_end",):
                fill(t, T)
                node = None
            else:
                _, k = choice
                fill(t, k)
                node = ("down", k)

    cost = evaluate_schedule_cost(gen, u, x)
    return Schedule(u=tuple(u), v=tuple(v), x=tuple(x), cost=cost)


def profit_max(gen, prices):
    """Maximum self-schedule profit v(pi) and a schedule attaining it."""
    obj, tables = run_dp(gen, prices)
    sched = extract_schedule(gen, tables)
    return -obj, sched


# ---------------------------------------------------------------------------
# independent oracle

_ENUMERATION_LIMIT = 12


def commitment_feasible(gen, u):
    """Min-up/min-down validity of an on/off string, counting the
    pre-horizon run; runs that reach T are exempt (the horizon truncates
    them)."""
    T = gen.n_periods
    state = 1 if gen.initial.is_on else 0
    length = gen.initial.on_for if gen.initial.is_on else gen.initial.off_for
    for t in range(T):
        cur = u[t]
        if cur == state:
            length += 1
            continue
        # the previous run just ended inside the horizon
        if state == 1 and length < gen.L:
            return False
        if state == 0 and length < gen.ell:
            return False
        state, length = cur, 1
    return True


def brute_force_uc(gen, prices=None, cache=None):
    """Exhaustive minimum over all feasible commitments; dispatch via
    solve_ed per maximal on-run. Returns (objective, Schedule).

    Guarded to horizons T <= 12; longer horizons raise
    EnumerationTooLarge rather than enumerate 2^T strings.
    """
    T = gen.n_periods
    if T > _ENUMERATION_LIMIT:
        raise EnumerationTooLarge(
            f"T={T} exceeds the enumeration guard {_ENUMERATION_LIMIT}")
    ed = cache if cache is not None else IntervalCostCache(gen, prices)
    S = gen.startup_cost.value
    Sp = gen.shutdown_cost.value
    init = gen.initial

    best = (math.inf, None)
    for mask in range(1 << T):
        u = tuple((mask >> t) & 1 for t in range(T))
        if not commitment_feasible(gen, u):
            continue
        total = 0.0
        runs = []
        on_run = init.on_for if init.is_on else 0
        off_run = init.off_for if not init.is_on else 0
        run_start = None
        for t in range(1, T + 1):
            if u[t - 1]:
                if off_run > 0:
                    total += S(off_run)
                if run_start is None:
                    run_start = t
                off_run = 0
                on_run += 1
            else:
                if on_run > 0:
                    # a run ended inside the horizon; the initially-on
                    # pre-horizon run has no in-horizon interval when
                    # u starts with 0
                    total += Sp(on_run)
                    if run_start is not None:
                        runs.append((run_start, t - 1))
                on_run = 0
                off_run += 1
                run_start = None
        if run_start is not None:
            runs.append((run_start, T))
        for a, bnd in runs:
            total += ed.cost(a, bnd)
        if total < best[0] - 1e-12:
            dispatch = [0.0] * T
            for a, bnd in runs:
                for s, out in zip(range(a, bnd + 1), ed.dispatch(a, bnd)):
                    dispatch[s - 1] = out
            best = (total, (u, tuple(dispatch)))
    obj, (u, x) = best
    sched = Schedule(
        u=u,
        v=tuple(_starts(gen, u)),
        x=x,
        cost=evaluate_schedule_cost(gen, u, x))
    return obj, sched


def _starts(gen, u):
    prev = 1 if gen.initial.is_on else 0
    out = []
    for ut in u:
        out.append(1 if ut and not prev else 0)
        prev = ut
    return out

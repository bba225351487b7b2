"""Commitment-space and interval-space encodings of one generator, the
system assembly with load balance, and the map back to schedules.

Two encodings of the same feasible set are built:

* the commitment-space ("2bin") model over u_t, v_t, x_t with big-M
  coupling and epigraph rows for start/shut costs: the classic compact MIP
  whose LP relaxation is weak;
* the interval-space ("euc") model whose variables select whole on-runs:
  w_k picks "on from period 1 until k" (initially-on units; w_T = never
  shut down), y_tk picks the run [t, k], z_kt the off-gap from shutdown
  node k to a restart at t, and theta_t absorbs "shut down at t+1 and stay
  off". Interval outputs q and epigraph costs phi are indexed per covered
  period. The LP relaxation of one block has integral extreme points, so
  a system of blocks tied only by load balance prices out of its LP.

``map_to_schedule`` converts an integral interval-space point back to
(u, v, x) by summing interval indicators covering each period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lp import LpBuilder
from .model import Schedule, evaluate_schedule_cost


class FractionalSolution(RuntimeError):
    """An interval-space point expected to be integral is not."""


@dataclass(frozen=True)
class IndexSets:
    """Interval index sets of one generator.

    tk1: initial-run intervals (1, k) of an initially-on unit; k is the
    last on period (the unit shuts at k+1, or never for k=T).
    tk2: fresh runs (t, k) started in-horizon at t.
    kt: off-gaps (k, t): shut down at k+1, restart at t.
    """

    tk1: tuple
    tk2: tuple
    kt: tuple

    @property
    def intervals(self):
        return self.tk1 + self.tk2


def enumerate_index_sets(gen, T=None):
    T = gen.n_periods if T is None else T
    L, ell = gen.L, gen.ell
    init = gen.initial
    if init.is_on:
        t0 = init.t0(L)
        tk1 = tuple((1, k) for k in range(max(t0, 1), T + 1))
        start_lo = t0 + ell + 1
        shut_lo = t0
    else:
        tf = max(init.t0_minus(ell), 1)
        tk1 = ()
        start_lo = tf
        shut_lo = tf + L - 1
    tk2 = tuple((t, k)
                for t in range(start_lo, T + 1)
                for k in range(min(t + L - 1, T), T + 1))
    kt = tuple((k, t)
               for k in range(shut_lo, T - ell)
               for t in range(k + ell + 1, T + 1))
    return IndexSets(tk1=tk1, tk2=tk2, kt=kt)


@dataclass
class EucVars:
    """Column indices of one interval-space block (global to its LP)."""

    gen_id: str
    sets: IndexSets
    w: dict
    y: dict
    z: dict
    theta: dict
    q: dict      # (t, k, s) -> column
    phi: dict    # (t, k, s) -> column
    w_none: int | None = None

    def integer_cols(self):
        cols = list(self.w.values()) + list(self.y.values()) + \
            list(self.z.values())
        if self.w_none is not None:
            cols.append(self.w_none)
        return sorted(cols)


def _interval_rows(bld, gen, t, k, T, qcols, phicols, ind_name, first_run):
    """Shared per-interval rows: output bounds tied to the indicator,
    start/shutdown ramp caps, the ramp chain, and cost epigraphs."""
    g = gen.id
    tag = f"t={t}:k={k}"
    for s in range(t, k + 1):
        bld.add_row([(qcols[s], 1.0), (ind_name, -gen.c_min)], ">=", 0.0,
                    f"euc:{g}:qlo:{tag}:s={s}")
        bld.add_row([(qcols[s], 1.0), (ind_name, -gen.c_max)], "<=", 0.0,
                    f"euc:{g}:qup:{tag}:s={s}")
    if not first_run:
        bld.add_row([(qcols[t], 1.0), (ind_name, -gen.start_ramp)], "<=", 0.0,
                    f"euc:{g}:startramp:{tag}")
    if k != T:
        bld.add_row([(qcols[k], 1.0), (ind_name, -gen.start_ramp)], "<=", 0.0,
                    f"euc:{g}:shutramp:{tag}")
    for s in range(t + 1, k + 1):
        bld.add_row([(qcols[s], 1.0), (qcols[s - 1], -1.0),
                     (ind_name, -gen.ramp)], "<=", 0.0,
                    f"euc:{g}:rampup:{tag}:s={s}")
        bld.add_row([(qcols[s - 1], 1.0), (qcols[s], -1.0),
                     (ind_name, -gen.ramp)], "<=", 0.0,
                    f"euc:{g}:rampdn:{tag}:s={s}")
    for s in range(t, k + 1):
        for j, piece in enumerate(gen.cost[s - 1].pieces):
            bld.add_row([(phicols[s], 1.0), (qcols[s], -piece.a),
                         (ind_name, -piece.b)], ">=", 0.0,
                        f"euc:{g}:piece:{tag}:s={s}:j={j}")


def _euc_block(bld, gen, T):
    """Interval-space block of one generator, added to a shared builder."""
    g = gen.id
    sets = enumerate_index_sets(gen, T)
    init = gen.initial
    S = gen.startup_cost.value
    Sp = gen.shutdown_cost.value
    ev = EucVars(gen_id=g, sets=sets, w={}, y={}, z={}, theta={}, q={}, phi={})

    if init.is_on:
        t0 = init.t0(gen.L)
        for t in range(t0, T + 1):
            cost = Sp(t + init.on_for) if t <= T - 1 else 0.0
            ev.w[t] = bld.add_var(f"euc:{g}:w:t={t}", 0.0, 1.0, cost)
        theta_range = range(t0, T)
    else:
        tf = max(init.t0_minus(gen.ell), 1)
        for t in range(tf, T + 1):
            ev.w[t] = bld.add_var(f"euc:{g}:w:t={t}", 0.0, 1.0,
                                  S(init.off_for + t - 1))
        ev.w_none = bld.add_var(f"euc:{g}:w:never", 0.0, 1.0, 0.0)
        theta_range = range(tf + gen.L - 1, T - gen.ell)
    for (t, k) in sets.tk2:
        cost = Sp(k - t + 1) if k <= T - 1 else 0.0
        ev.y[(t, k)] = bld.add_var(f"euc:{g}:y:t={t}:k={k}", 0.0, 1.0, cost)
    for (k, t) in sets.kt:
        ev.z[(k, t)] = bld.add_var(f"euc:{g}:z:k={k}:t={t}", 0.0, 1.0,
                                   S(t - k - 1))
    for t in theta_range:
        ev.theta[t] = bld.add_var(f"euc:{g}:theta:t={t}", 0.0, 1.0, 0.0)
    for (t, k) in sets.intervals:
        for s in range(t, k + 1):
            ev.q[(t, k, s)] = bld.add_var(f"euc:{g}:q:t={t}:k={k}:s={s}",
                                          0.0, math.inf, 0.0)
            ev.phi[(t, k, s)] = bld.add_var(f"euc:{g}:phi:t={t}:k={k}:s={s}",
                                            -math.inf, math.inf, 1.0)

    # run selection: exactly one first-run choice (or one start / never)
    select = [(c, 1.0) for c in ev.w.values()]
    if ev.w_none is not None:
        select.append((ev.w_none, 1.0))
    bld.add_row(select, "=", 1.0, f"euc:{g}:select")

    if init.is_on:
        # shutdown-node flow: w_t (and runs ending at t) feed a restart or
        # the stay-off sink theta_t
        for t in range(t0, T):
            coeffs = [(ev.w[t], -1.0), (ev.theta[t], 1.0)]
            for (k, tt) in sets.kt:
                if k == t:
                    coeffs.append((ev.z[(k, tt)], 1.0))
            for (ts, ke) in sets.tk2:
                if ke == t:
                    coeffs.append((ev.y[(ts, ke)], -1.0))
            bld.add_row(coeffs, "=", 0.0, f"euc:{g}:flow:t={t}")
        # start-node flow: restarts balance the gaps that lead to them
        for t in range(t0 + gen.ell + 1, T + 1):
            coeffs = [(ev.y[(t, k)], 1.0) for (ts, k) in sets.tk2 if ts == t]
            coeffs += [(ev.z[(k, t)], -1.0) for (k, tt) in sets.kt if tt == t]
            if coeffs:
                bld.add_row(coeffs, "=", 0.0, f"euc:{g}:start:t={t}")
    else:
        for t in sorted(ev.w):
            coeffs = [(ev.y[(t, k)], 1.0) for (ts, k) in sets.tk2 if ts == t]
            coeffs += [(ev.z[(k, t)], -1.0) for (k, tt) in sets.kt if tt == t]
            coeffs.append((ev.w[t], -1.0))
            bld.add_row(coeffs, "=", 0.0, f"euc:{g}:start:t={t}")
        for t in theta_range:
            coeffs = [(ev.theta[t], 1.0)]
            for (k, tt) in sets.kt:
                if k == t:
                    coeffs.append((ev.z[(k, tt)], 1.0))
            for (ts, ke) in sets.tk2:
                if ke == t:
                    coeffs.append((ev.y[(ts, ke)], -1.0))
            bld.add_row(coeffs, "=", 0.0, f"euc:{g}:flow:t={t}")

    for (t, k) in sets.tk1:
        qc = {s: ev.q[(t, k, s)] for s in range(t, k + 1)}
        pc = {s: ev.phi[(t, k, s)] for s in range(t, k + 1)}
        _interval_rows(bld, gen, t, k, T, qc, pc, ev.w[k], first_run=True)
    for (t, k) in sets.tk2:
        qc = {s: ev.q[(t, k, s)] for s in range(t, k + 1)}
        pc = {s: ev.phi[(t, k, s)] for s in range(t, k + 1)}
        _interval_rows(bld, gen, t, k, T, qc, pc, ev.y[(t, k)], first_run=False)
    return ev


def build_euc(gen, T=None):
    """Interval-space LP of one generator; returns (LinearProgram, EucVars).

    The LP relaxation has integral extreme points, so solving it alone (or
    inside a system tied only by load balance) yields 0/1 interval
    selections at every simplex vertex.
    """
    T = gen.n_periods if T is None else T
    if T != gen.n_periods:
        raise ValueError("horizon does not match the generator's cost data")
    bld = LpBuilder()
    ev = _euc_block(bld, gen, T)
    return bld.build(), ev


@dataclass
class TwoBinVars:
    """Column indices of one commitment-space block."""

    gen_id: str
    u: dict
    v: dict
    x: dict
    phi: dict
    zeta: dict    # start-cost epigraph variables
    zetap: dict   # shutdown-cost epigraph variables

    def integer_cols(self):
        return sorted(list(self.u.values()) + list(self.v.values()))


def _two_bin_block(bld, gen, T):
    g = gen.id
    init = gen.initial
    L, ell = gen.L, gen.ell
    S = gen.startup_cost.value
    Sp = gen.shutdown_cost.value
    u0 = 1 if init.is_on else 0
    if init.is_on:
        t0 = init.t0(L)
        first_start = t0 + ell + 1   # earliest in-horizon start
        shut_nodes = range(t0, T)    # zeta' indexed by last-on period
    else:
        tf = max(init.t0_minus(ell), 1)
        first_start = tf
        shut_nodes = range(tf + L - 1, T)

    # Duration costs split into a base charge on the transition variables
    # plus epigraph excess rows. The base is the cheapest achievable
    # duration cost (every off gap lasts >= ell periods, every run >= L),
    # so the excess coefficients are nonnegative and the LP relaxation is
    # materially tighter than with epigraph rows alone; at integral points
    # base + excess recovers the exact duration cost.
    sv = gen.startup_cost.values
    s_base = min(sv[min(ell, len(sv)) - 1:])
    pv = gen.shutdown_cost.values
    sp_base = min(pv[min(L, len(pv)) - 1:])

    tv = TwoBinVars(gen_id=g, u={}, v={}, x={}, phi={}, zeta={}, zetap={})
    for t in range(1, T + 1):
        tv.u[t] = bld.add_var(f"2bin:{g}:u:t={t}", 0.0, 1.0, 0.0)
    for t in range(1, T + 1):
        tv.v[t] = bld.add_var(f"2bin:{g}:v:t={t}", 0.0, 1.0, s_base)
    for t in shut_nodes:
        if sp_base == 0.0 or t == 0:
            continue  # t = 0 keeps the full coefficient in its epigraph row
        # u_t - u_{t+1} + v_{t+1} equals 1 exactly when the unit shuts
        # down at t+1 (and is nonnegative LP-wide)
        bld.add_obj(tv.u[t], sp_base)
        bld.add_obj(tv.u[t + 1], -sp_base)
        bld.add_obj(tv.v[t + 1], sp_base)
    for t in range(1, T + 1):
        tv.x[t] = bld.add_var(f"2bin:{g}:x:t={t}", 0.0, gen.c_max, 0.0)
        tv.phi[t] = bld.add_var(f"2bin:{g}:phi:t={t}", -math.inf, math.inf, 1.0)
    for t in range(first_start, T + 1):
        tv.zeta[t] = bld.add_var(f"2bin:{g}:zeta:t={t}", 0.0, math.inf, 1.0)
    for t in shut_nodes:
        tv.zetap[t] = bld.add_var(f"2bin:{g}:zetap:t={t}", 0.0, math.inf, 1.0)

    if init.is_on:
        for t in range(1, t0 + 1):
            bld.set_bounds(f"2bin:{g}:u:t={t}", 1.0, 1.0)
    else:
        for t in range(1, first_start):
            bld.set_bounds(f"2bin:{g}:u:t={t}", 0.0, 0.0)
            bld.set_bounds(f"2bin:{g}:v:t={t}", 0.0, 0.0)

    for t in range(1, T + 1):
        # min-up: any start within the last L periods keeps the unit on
        window = [i for i in range(max(t - L + 1, first_start), t + 1)]
        if window:
            bld.add_row([(tv.v[i], 1.0) for i in window] + [(tv.u[t], -1.0)],
                        "<=", 0.0, f"2bin:{g}:minup:t={t}")
        # min-down: no start within ell periods of an on period
        coeffs = [(tv.v[i], 1.0) for i in range(max(t - ell + 1, 1), t + 1)]
        if t - ell >= 1:
            coeffs.append((tv.u[t - ell], 1.0))
            rhs = 1.0
        else:
            rhs = 1.0 - u0
        bld.add_row(coeffs, "<=", rhs, f"2bin:{g}:mindown:t={t}")
        # start definition: v_t >= u_t - u_{t-1}
        coeffs = [(tv.u[t], 1.0), (tv.v[t], -1.0)]
        rhs = 0.0
        if t >= 2:
            coeffs.append((tv.u[t - 1], -1.0))
        else:
            rhs = float(u0)
        bld.add_row(coeffs, "<=", rhs, f"2bin:{g}:startdef:t={t}")
        # output bounds tied to commitment
        bld.add_row([(tv.x[t], -1.0), (tv.u[t], gen.c_min)], "<=", 0.0,
                    f"2bin:{g}:xlo:t={t}")
        bld.add_row([(tv.x[t], 1.0), (tv.u[t], -gen.c_max)], "<=", 0.0,
                    f"2bin:{g}:xup:t={t}")
        # generation cost epigraph; the intercept scales with commitment
        for j, piece in enumerate(gen.cost[t - 1].pieces):
            bld.add_row([(tv.phi[t], 1.0), (tv.x[t], -piece.a),
                         (tv.u[t], -piece.b)], ">=", 0.0,
                        f"2bin:{g}:piece:t={t}:j={j}")

    # ramping with start/shutdown relaxation via the start-ramp cap
    dV = gen.start_ramp - gen.ramp
    for t in range(1, T + 1):
        if t == 1:
            if init.is_on:
                continue  # pre-horizon output unconstrained
            bld.add_row([(tv.x[1], 1.0)], "<=", gen.start_ramp,
                        f"2bin:{g}:rampup:t=1")
            bld.add_row([(tv.x[1], -1.0), (tv.u[1], dV)], "<=", gen.start_ramp,
                        f"2bin:{g}:rampdn:t=1")
            continue
        bld.add_row([(tv.x[t], 1.0), (tv.x[t - 1], -1.0), (tv.u[t - 1], dV)],
                    "<=", gen.start_ramp, f"2bin:{g}:rampup:t={t}")
        bld.add_row([(tv.x[t - 1], 1.0), (tv.x[t], -1.0), (tv.u[t], dV)],
                    "<=", gen.start_ramp, f"2bin:{g}:rampdn:t={t}")

    # start-up cost epigraphs: active when v_t = 1 and the window [k+1, t-1]
    # was all off; the binding row carries the off-gap's duration cost
    for t in sorted(tv.zeta):
        if not init.is_on:
            K = S(init.off_for + t - 1) - s_base
            if K > 0.0:
                coeffs = [(tv.zeta[t], 1.0), (tv.v[t], -K)]
                coeffs += [(tv.u[s], K) for s in range(1, t)]
                bld.add_row(coeffs, ">=", 0.0, f"2bin:{g}:startcost:t={t}:first")
        for k in range(shut_nodes.start if not init.is_on else t0, t - ell):
            K = S(t - k - 1) - s_base
            if K <= 0.0:
                continue
            coeffs = [(tv.zeta[t], 1.0), (tv.v[t], -K)]
            coeffs += [(tv.u[s], K) for s in range(k + 1, t)]
            bld.add_row(coeffs, ">=", 0.0, f"2bin:{g}:startcost:t={t}:k={k}")

    # shutdown cost epigraphs
    if init.is_on:
        for t in range(t0, T):
            # first run [1, t] ends at t+1; active unless still on at t+1
            # or already interrupted before t
            K = Sp(t + init.on_for) if t == 0 else Sp(t + init.on_for) - sp_base
            if K <= 0.0:
                continue
            coeffs = [(tv.zetap[t], 1.0), (tv.u[t + 1], K)]
            coeffs += [(tv.u[s], -K) for s in range(1, t + 1)]
            bld.add_row(coeffs, ">=", K * (1.0 - t),
                        f"2bin:{g}:shutcost:t={t}:first")
    for k in range(first_start, T + 1):
        for t in range(k + L - 1, T):
            K = Sp(t - k + 1) - sp_base
            if K <= 0.0:
                continue
            # run started at k ends at t+1: v_k on, [k, t] all on, off at t+1
            coeffs = [(tv.zetap[t], 1.0), (tv.v[k], -K), (tv.u[t + 1], K)]
            coeffs += [(tv.u[s], -K) for s in range(k, t + 1)]
            bld.add_row(coeffs, ">=", K * (k - t - 1),
                        f"2bin:{g}:shutcost:t={t}:k={k}")
    return tv


def build_2bin(gen, T=None):
    """Commitment-space big-M MIP block; returns (LinearProgram, TwoBinVars)."""
    T = gen.n_periods if T is None else T
    if T != gen.n_periods:
        raise ValueError("horizon does not match the generator's cost data")
    bld = LpBuilder()
    tv = _two_bin_block(bld, gen, T)
    return bld.build(), tv


# ---------------------------------------------------------------------------
# system assembly


@dataclass
class MeucModel:
    lp: object
    blocks: dict          # gen id -> EucVars (columns are global)
    load_balance_rows: tuple
    integer_cols: tuple


def assemble_meuc(instance):
    """Block-diagonal interval-space blocks plus per-period load balance.

    Integrality is not imposed; the LP's load-balance duals are the
    system's convex hull prices.
    """
    bld = LpBuilder()
    blocks = {}
    for gen in instance.generators:
        blocks[gen.id] = _euc_block(bld, gen, instance.T)
    balance = []
    for s in range(1, instance.T + 1):
        coeffs = []
        for gen in instance.generators:
            ev = blocks[gen.id]
            for (t, k) in ev.sets.intervals:
                if t <= s <= k:
                    coeffs.append((ev.q[(t, k, s)], 1.0))
        balance.append(bld.add_row(coeffs, "=", float(instance.demand[s - 1]),
                                   f"meuc:balance:t={s}"))
    integer_cols = []
    for gid in blocks:
        integer_cols.extend(blocks[gid].integer_cols())
    return MeucModel(lp=bld.build(), blocks=blocks,
                     load_balance_rows=tuple(balance),
                     integer_cols=tuple(sorted(integer_cols)))


@dataclass
class TwoBinModel:
    lp: object
    blocks: dict
    load_balance_rows: tuple
    integer_cols: tuple


def assemble_2bin(instance):
    """Commitment-space system MIP: blocks plus per-period load balance."""
    bld = LpBuilder()
    blocks = {}
    for gen in instance.generators:
        blocks[gen.id] = _two_bin_block(bld, gen, instance.T)
    balance = []
    for s in range(1, instance.T + 1):
        coeffs = [(blocks[gen.id].x[s], 1.0) for gen in instance.generators]
        balance.append(bld.add_row(coeffs, "=", float(instance.demand[s - 1]),
                                   f"2bin:balance:t={s}"))
    integer_cols = []
    for gid in blocks:
        integer_cols.extend(blocks[gid].integer_cols())
    return TwoBinModel(lp=bld.build(), blocks=blocks,
                       load_balance_rows=tuple(balance),
                       integer_cols=tuple(sorted(integer_cols)))


# ---------------------------------------------------------------------------
# mapping interval-space points back to schedules


def map_to_schedule(gen, ev, primal, tol=1e-6):
    """Convert an integral interval-space point to a Schedule.

    Raises FractionalSolution (naming the worst offender) if any selection
    variable is farther than tol from 0/1.
    """
    T = gen.n_periods
    worst_val, worst_name = 0.0, None
    named = [(f"w:t={t}", col) for t, col in sorted(ev.w.items())]
    if ev.w_none is not None:
        named.append(("w:never", ev.w_none))
    named += [(f"y:t={t}:k={k}", col) for (t, k), col in sorted(ev.y.items())]
    named += [(f"z:k={k}:t={t}", col) for (k, t), col in sorted(ev.z.items())]
    named += [(f"theta:t={t}", col) for t, col in sorted(ev.theta.items())]
    for name, col in named:
        frac = abs(primal[col] - round(primal[col]))
        if frac > worst_val:
            worst_val, worst_name = frac, name
    if worst_val > tol:
        raise FractionalSolution(
            f"{gen.id}: {worst_name} is {worst_val:.3g} from integrality")

    u = [0] * T
    v = [0] * T
    x = [0.0] * T
    for (t, k) in ev.sets.tk1:
        if round(primal[ev.w[k]]) == 1:
            for s in range(t, k + 1):
                u[s - 1] = 1
    for (t, k) in ev.sets.tk2:
        if round(primal[ev.y[(t, k)]]) == 1:
            for s in range(t, k + 1):
                u[s - 1] = 1
    for (k, t) in ev.sets.kt:
        if round(primal[ev.z[(k, t)]]) == 1:
            v[t - 1] = 1
    if not gen.initial.is_on:
        for t, col in ev.w.items():
            if round(primal[col]) == 1:
                v[t - 1] = 1
    for (t, k, s), col in ev.q.items():
        if u[s - 1]:
            x[s - 1] += primal[col]
    cost = evaluate_schedule_cost(gen, u, x)
    return Schedule(u=tuple(u), v=tuple(v), x=tuple(x), cost=cost)

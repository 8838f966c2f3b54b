"""Best Red Response: Red sees σ and picks a valid plan minimising the
value that escapes.

best_red_dp is the production solver. It walks the targets in σ order and
remembers only which sensor *type* took each of the last τ+1 targets;
sensors with identical columns are interchangeable, and a window of τ+1
consecutive positions may use a type at most as often as it has sensors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (Instance, SensingPlan, TargetOrdering, StructuralError, validate_plan,
                   plan_value, _check_dims)
from .ilp import IntegerModel, export_model, parse_model, solve_by_enumeration  # noqa: F401
from .kernels import red_dense, window_valid_mask
from .rng import SplitMix64

DEFAULT_BUDGET = 10 ** 8
DENSE_CELLS = 2 * 10 ** 7
POLICIES = ("random", "remaining_value", "harm")


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class RedPrep:
    """σ-independent preprocessing shared by every DP call on one instance."""
    inst: Instance
    forced: dict            # target -> 1-based sensor (private sensors)
    type_sensors: list      # per type id (1-based list index+1), 0-based sensors
    counts: np.ndarray
    target_cap: np.ndarray  # n x B bool, column 0 always True
    cost_none: np.ndarray   # value lost if the target escapes (0 when forced)
    W: int
    B: int
    _valid: Optional[np.ndarray] = None

    @property
    def dense_work(self) -> int:
        return self.inst.n * self.B ** (self.W + 1)

    def valid(self):
        if self._valid is None:
            self._valid = window_valid_mask(self.counts, self.W)
        return self._valid


def prepare(inst: Instance, typed: bool = True, reduce: bool = True) -> RedPrep:
    n, k = inst.n, inst.k
    D = inst.matrix
    forced = {}
    active = []
    for j in range(k):
        col = np.flatnonzero(D[:, j])
        if reduce and col.size == 0:
            continue
        if reduce and col.size == 1:
            # a sensor with a single capable target can always take it
            forced.setdefault(int(col[0]), j + 1)
            continue
        active.append(j)
    groups = {}
    type_sensors = []
    for j in active:
        key = D[:, j].tobytes() if typed else j
        if key not in groups:
            groups[key] = len(type_sensors)
            type_sensors.append([])
        type_sensors[groups[key]].append(j)
    B = len(type_sensors) + 1
    cap = np.zeros((n, B), dtype=np.bool_)
    cap[:, 0] = True
    for t, js in enumerate(type_sensors):
        cap[:, t + 1] = D[:, js[0]] != 0
    cost = inst.values.astype(np.float64).copy()
    for i in forced:
        cap[i, 1:] = False
        cost[i] = 0.0
    counts = np.array([len(js) for js in type_sensors], dtype=np.int64)
    return RedPrep(inst, forced, type_sensors, counts, cap, cost, inst.tau_window + 1, B)


def _sparse_dp(cost_none, cap, counts, W, budget):
    n = cost_none.shape[0]
    B = cap.shape[1]
    allowed = [[0] + [b for b in range(1, B) if cap[p, b]] for p in range(n)]
    layer = {(0,) * W: 0.0}
    backs = []
    work = 0
    for p in range(n):
        new = {}
        c = float(cost_none[p])
        for w, val in layer.items():
            r = w[:-1]
            s = w[-1]
            for b in allowed[p]:
                work += 1
                if b and r.count(b) >= counts[b - 1]:
                    continue
                nw = (b,) + r
                nv = val + c if b == 0 else val
                cur = new.get(nw)
                if cur is None or nv < cur[0] or (nv == cur[0] and s < cur[1]):
                    new[nw] = (nv, s)
        if work > budget:
            raise BudgetExceeded(f"sparse DP exceeded {budget} transitions")
        layer = {w: v for w, (v, _) in new.items()}
        backs.append({w: s for w, (_, s) in new.items()})
    return layer, backs, work


def _code(w, B):
    return sum(b * B ** m for m, b in enumerate(w))


def _assign_sensors(prep: RedPrep, order, types):
    """Turn a per-position type sequence into concrete sensors.

    Within a type the sensor idle for longest is used (lowest index on
    ties); this succeeds whenever every (τ+1)-window respects the counts.
    """
    n = prep.inst.n
    tau = prep.inst.tau_eff
    last = {}
    assign = [None] * n
    for p, t in enumerate(order):
        b = types[p]
        if b == 0:
            continue
        pick = None
        for j in prep.type_sensors[b - 1]:
            lp = last.get(j)
            if lp is not None and p - lp <= tau:
                continue
            if pick is None or (last.get(j, -1) < last.get(pick, -1)):
                pick = j
        if pick is None:
            raise AssertionError("type window admits no free sensor")
        last[pick] = p
        assign[t] = pick + 1
    for i, j in prep.forced.items():
        assign[i] = j
    return SensingPlan(tuple(assign))


def _solve_prepped(prep: RedPrep, order, backend="auto", budget=DEFAULT_BUDGET, want_plan=True,
                   stats=None):
    n = prep.inst.n
    B, W = prep.B, prep.W
    cost = prep.cost_none[order]
    cap = prep.target_cap[order]
    if backend == "auto":
        backend = "dense" if prep.dense_work <= min(budget, DENSE_CELLS) else "sparse"
    if backend == "dense":
        if prep.dense_work > budget:
            raise BudgetExceeded(f"dense DP needs {prep.dense_work} cell updates > {budget}")
        J, bp = red_dense(cost, cap, prep.valid(), B, W, want_plan)
        code = int(np.argmin(J))
        value = float(J[code])
        if stats is not None:
            stats.update(backend="dense", work=prep.dense_work, B=B, W=W)
        if not want_plan:
            return value, None
        low = B ** (W - 1)
        types = [0] * n
        for p in range(n - 1, -1, -1):
            types[p] = code % B
            r = code // B
            code = r + low * int(bp[p, r])
    elif backend == "sparse":
        layer, backs, work = _sparse_dp(cost, cap, prep.counts, W, budget)
        best = min(layer.values())
        w = min((_code(w, B), w) for w, v in layer.items() if v == best)[1]
        value = float(best)
        if stats is not None:
            stats.update(backend="sparse", work=work, B=B, W=W, states=len(layer))
        if not want_plan:
            return value, None
        types = [0] * n
        for p in range(n - 1, -1, -1):
            types[p] = w[0]
            w = w[1:] + (backs[p][w],)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return value, _assign_sensors(prep, order, types)


class RedOracle:
    """Best Red Response for many orderings of one instance."""

    def __init__(self, inst: Instance, typed=True, reduce=True, backend="auto", budget=DEFAULT_BUDGET):
        self.inst = inst
        self.prep = prepare(inst, typed=typed, reduce=reduce)
        self.backend = backend
        self.budget = budget
        self.calls = 0

    def value(self, sigma) -> float:
        order = sigma.order() if isinstance(sigma, TargetOrdering) else np.asarray(sigma, dtype=np.int64)
        self.calls += 1
        return _solve_prepped(self.prep, order, self.backend, self.budget, want_plan=False)[0]

    def solve(self, sigma: TargetOrdering):
        self.calls += 1
        return _solve_prepped(self.prep, sigma.order(), self.backend, self.budget, want_plan=True)


def best_red_dp(inst: Instance, sigma: TargetOrdering, *, typed=True, reduce=True, backend="auto",
                budget=DEFAULT_BUDGET, stats=None):
    """(value, plan) of an optimal valid plan against σ."""
    _check_dims(inst, sigma, None)
    prep = prepare(inst, typed=typed, reduce=reduce)
    return _solve_prepped(prep, sigma.order(), backend, budget, True, stats)


def best_red_bruteforce(inst: Instance, sigma: TargetOrdering):
    """Exhaustive oracle. Ties go to the lexicographically smallest
    assignment vector with 0 standing for "not sensed"."""
    _check_dims(inst, sigma, None)
    n, k = inst.n, inst.k
    if n > 12 or k > 6:
        raise StructuralError("brute force limited to n <= 12 and k <= 6")
    pos = [int(p) for p in sigma.positions]
    vals = [float(v) for v in inst.values]
    caps = [[j for j in range(k) if inst.matrix[i, j]] for i in range(n)]
    tau = inst.tau_eff
    # value that escapes no matter what (no capable sensor), per suffix
    forced_tail = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        forced_tail[i] = forced_tail[i + 1] + (vals[i] if not caps[i] else 0.0)
    used = [[] for _ in range(k)]
    cur = [0] * n
    best = [float("inf"), None]

    def better(val):
        if val < best[0] - 1e-12:
            return True
        return abs(val - best[0]) <= 1e-12 and cur < best[1]

    def rec(i, val):
        if val + forced_tail[i] > best[0] + 1e-12:
            return
        if i == n:
            if better(val):
                best[0], best[1] = val, list(cur)
            return
        for j in caps[i]:
            if all(abs(pos[i] - pos[u]) > tau for u in used[j]):
                used[j].append(i)
                cur[i] = j + 1
                rec(i + 1, val)
                used[j].pop()
        cur[i] = 0
        rec(i + 1, val + vals[i])

    rec(0, 0.0)
    return best[0], SensingPlan.from_array(best[1])


def greedy_red(inst: Instance, sigma: TargetOrdering, policy: str = "harm", seed: int = 0):
    """Greedy sensing: targets by decreasing value, each given to a sensor
    from S' (those that keep the plan valid) chosen by `policy`."""
    _check_dims(inst, sigma, None)
    policy = policy.lower().replace("-", "_")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    n, k = inst.n, inst.k
    tau = inst.tau_eff
    D = inst.matrix
    pos = sigma.positions
    vals = inst.values
    rng = SplitMix64(seed, "greedy-red") if policy == "random" else None
    todo = sorted(range(n), key=lambda i: (-vals[i], i))
    pending = np.ones(n, dtype=bool)
    used = [[] for _ in range(k)]
    assign = [None] * n
    for i in todo:
        pending[i] = False
        cand = [j for j in range(k) if D[i, j] and all(abs(pos[i] - pos[u]) > tau for u in used[j])]
        if not cand:
            continue
        if policy == "random":
            j = cand[rng.randbelow(len(cand))]
        elif policy == "remaining_value":
            scores = [float(vals[pending & (D[:, j] != 0)].sum()) for j in cand]
            j = cand[int(np.argmin(scores))]
        else:
            near = pending & (np.abs(pos - pos[i]) <= tau)
            scores = [float(vals[near & (D[:, j] != 0)].sum()) for j in cand]
            j = cand[int(np.argmin(scores))]
        used[j].append(i)
        assign[i] = j + 1
    plan = SensingPlan(tuple(assign))
    return plan_value(inst, plan), plan


def build_red_ilp(inst: Instance, sigma: TargetOrdering) -> IntegerModel:
    """Binary program for the Best Red Response.

    Row i is the target at position i. x_i_{k+1} = 1 means "not sensed".
    For τ >= n the sliding windows vanish, so a single-use row per sensor
    (named once_j) carries the same restriction.
    """
    _check_dims(inst, sigma, None)
    n, k = inst.n, inst.k
    tau = inst.tau_eff
    order = sigma.order()
    m = IntegerModel(name="best_red_response")
    for i in range(1, n + 1):
        for j in range(1, k + 2):
            m.add_var(f"x_{i}_{j}")
    for i in range(1, n + 1):
        m.add_constraint(f"part_{i}", {f"x_{i}_{j}": 1 for j in range(1, k + 2)}, "=", 1)
    for i in range(1, n + 1):
        t = order[i - 1]
        for j in range(1, k + 1):
            m.add_constraint(f"cap_{i}_{j}", {f"x_{i}_{j}": 1}, "<=", int(inst.matrix[t, j - 1]))
    for j in range(1, k + 1):
        for i in range(1, n - tau + 1):
            m.add_constraint(f"win_{i}_{j}", {f"x_{l}_{j}": 1 for l in range(i, i + tau + 1)}, "<=", 1)
        if n - tau <= 0 and n > 1:
            m.add_constraint(f"once_{j}", {f"x_{l}_{j}": 1 for l in range(1, n + 1)}, "<=", 1)
    m.set_objective("min", {f"x_{i}_{k + 1}": float(inst.values[order[i - 1]]) for i in range(1, n + 1)})
    return m


def plan_from_red_ilp(inst: Instance, sigma: TargetOrdering, assignment: dict) -> SensingPlan:
    order = sigma.order()
    out = [None] * inst.n
    for i in range(1, inst.n + 1):
        for j in range(1, inst.k + 1):
            if assignment.get(f"x_{i}_{j}", 0) == 1:
                out[order[i - 1]] = j
    return SensingPlan(tuple(out))


def solve_red_ilp(inst: Instance, sigma: TargetOrdering, node_limit: int = 0):
    res = solve_by_enumeration(build_red_ilp(inst, sigma), node_limit=node_limit)
    if res.assignment is None:
        raise RuntimeError(f"enumeration ended with status {res.status}")
    return res.objective, plan_from_red_ilp(inst, sigma, res.assignment)

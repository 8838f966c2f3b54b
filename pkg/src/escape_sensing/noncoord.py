"""Non-coordinated Red: every sensor greedily senses the first passing
target it may legally take. Blue picks σ to maximise what escapes.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import (Instance, SensingPlan, TargetOrdering, StructuralError, SolveReport,
                   compute_types, plan_value, _check_dims, Valid)
from .ilp import IntegerModel
from .kernels import simulate_order, blue_enumerate
from .red_response import BudgetExceeded, DEFAULT_BUDGET
from .rng import SplitMix64, derive_seed


def simulate_greedy(inst: Instance, sigma: TargetOrdering):
    """(v(ψ_σ), ψ_σ): targets in σ order, each checks sensors in channel order."""
    _check_dims(inst, sigma, None)
    val, assign = simulate_order(sigma.order(), inst.matrix, inst.values, inst.tau_eff)
    return float(val), SensingPlan.from_array(assign)


def simulate_greedy_events(inst: Instance, sigma: TargetOrdering):
    """Same plan, produced by replaying the pipeline step by step.

    At step l, target at position i meets sensor j when i + j - 1 = l.
    Within one step every event involves a different sensor and a
    different target, so the processing order inside a step is irrelevant.
    """
    _check_dims(inst, sigma, None)
    n, k, tau = inst.n, inst.k, inst.tau_eff
    order = sigma.order()
    last = [None] * k
    assign = [None] * n
    for step in range(1, n + k):
        for j in range(max(1, step - n + 1), min(k, step) + 1):
            i = step - j + 1
            t = order[i - 1]
            if assign[t] is not None or not inst.matrix[t, j - 1]:
                continue
            if last[j - 1] is None or i - last[j - 1] > tau:
                assign[t] = j
                last[j - 1] = i
    plan = SensingPlan(tuple(assign))
    return plan_value(inst, plan), plan


def best_blue_bruteforce(inst: Instance):
    """Exhaustive search over all n! orderings (prefix-shared simulation).

    Ties go to the lexicographically smallest position vector.
    """
    if inst.n > 10:
        raise StructuralError("brute force limited to n <= 10")
    if inst.n == 0:
        return 0.0, TargetOrdering(np.zeros(0, dtype=np.int64))
    val, pos, _ = blue_enumerate(inst.matrix, inst.values, inst.tau_eff)
    return float(val), TargetOrdering(pos)


def _blue_types(inst: Instance):
    tp = compute_types(inst)
    caps = [tuple(int(j) for j in np.flatnonzero(inst.matrix[c[0]])) for c in tp.target_types]
    vals = [float(inst.values[c[0]]) for c in tp.target_types]
    return tp, caps, vals


def best_blue_dp(inst: Instance, budget: int = DEFAULT_BUDGET, stats=None):
    """Exact Best Blue Response over states (targets sent per type, recent sensors).

    For τ < n-1 the state keeps the sensors used at the last τ positions.
    Once τ >= n-1 no sensor ever recovers, so the window collapses to the
    set of used sensors; targets whose sensors are all spent can then be
    sent immediately without loss.
    """
    n = inst.n
    if n == 0:
        return 0.0, TargetOrdering(np.zeros(0, dtype=np.int64))
    tp, caps, vals = _blue_types(inst)
    limits = tp.target_counts
    T = len(limits)
    tau = inst.tau_eff
    unlimited = tau >= n - 1
    W = inst.tau_window
    start_counts = (0,) * T
    start = (start_counts, 0 if unlimited else (0,) * W)
    layer = {start: 0.0}
    backs = []
    work = 0
    for p in range(n):
        new = {}
        back = {}
        for state, val in layer.items():
            counts, win = state
            options = [g for g in range(T) if counts[g] < limits[g]]
            if unlimited:
                dead = [g for g in options if all(win >> j & 1 for j in caps[g])]
                if dead:
                    options = dead[:1]
            for g in options:
                work += 1
                hit = -1
                for j in caps[g]:
                    if unlimited:
                        if not (win >> j & 1):
                            hit = j
                            break
                    elif (j + 1) not in win:
                        hit = j
                        break
                nv = val + (vals[g] if hit < 0 else 0.0)
                if unlimited:
                    nwin = win | (1 << hit) if hit >= 0 else win
                else:
                    nwin = ((hit + 1,) + win[:-1]) if W else ()
                nc = counts[:g] + (counts[g] + 1,) + counts[g + 1:]
                key = (nc, nwin)
                cur = new.get(key)
                if cur is None or nv > cur + 1e-12:
                    new[key] = nv
                    back[key] = (state, g)
        if work > budget:
            raise BudgetExceeded(f"blue DP exceeded {budget} transitions")
        layer = new
        backs.append(back)
    best_key = None
    for key, val in layer.items():
        if best_key is None or val > layer[best_key] + 1e-12:
            best_key = key
    value = layer[best_key]
    seq = []
    key = best_key
    for p in range(n - 1, -1, -1):
        prev, g = backs[p][key]
        seq.append(g)
        key = prev
    seq.reverse()
    pools = [list(c) for c in tp.target_types]
    order = [pools[g].pop(0) for g in seq]
    if stats is not None:
        stats.update(work=work, final_states=len(layer), types=T, unlimited=unlimited)
    return float(value), TargetOrdering.from_order(order)


def best_blue_unlimited(inst: Instance, node_limit: int = 0):
    """Exact Best Blue Response when τ >= n-1 (each sensor senses once).

    Searches over the plans the pipeline can produce instead of over
    orderings. A matching m (target -> sensor or none) is produced by some
    σ iff every capable sensor in front of m(t) (all capable ones when t
    escapes) is matched to another target, and the resulting "must pass
    before" relation is acyclic; any topological order then realises m.
    """
    n, k = inst.n, inst.k
    if inst.tau_eff < n - 1:
        raise StructuralError("best_blue_unlimited needs tau >= n-1")
    D = inst.matrix
    vals = [float(v) for v in inst.values]
    T = [[int(j) for j in np.flatnonzero(D[t])] for t in range(n)]
    cap_t = [[] for _ in range(k)]
    for t in range(n):
        for s in T[t]:
            cap_t[s].append(t)
    # a target owning a single-target sensor can never escape
    private = [any(len(cap_t[s]) == 1 for s in T[t]) for t in range(n)]
    match_s = [-1] * k
    opt = [None] * n
    req = [[] for _ in range(n)]
    avail = [len(cap_t[s]) for s in range(k)]
    best = [-1.0, None, None]
    nodes = [0]

    def acyclic_order():
        adj = [[] for _ in range(n)]
        indeg = [0] * n
        for t in range(n):
            for s in req[t]:
                adj[match_s[s]].append(t)
                indeg[t] += 1
        heap = [t for t in range(n) if indeg[t] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            u = heapq.heappop(heap)
            out.append(u)
            for w in adj[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, w)
        return out if len(out) == n else None

    def rec(t, cur, bound):
        nodes[0] += 1
        if node_limit and nodes[0] > node_limit:
            raise BudgetExceeded("matching search node limit")
        if cur + bound < best[0] + 1e-12:
            return
        if t == n:
            if all(match_s[s] >= 0 for u in range(n) for s in req[u]):
                order = acyclic_order()
                if order is not None:
                    best[0], best[1], best[2] = cur, list(opt), order
            return
        nb = bound - (0.0 if private[t] else vals[t])
        for s in T[t]:
            avail[s] -= 1
        prefix = []
        for o in T[t] + [-1]:
            if o >= 0 and match_s[o] >= 0:
                prefix.append(o)
                continue
            need = list(prefix) if o >= 0 else list(T[t])
            if all(match_s[s] >= 0 or avail[s] > 0 for s in need):
                if o >= 0:
                    match_s[o] = t
                opt[t] = o
                req[t] = need
                if all(match_s[s] >= 0 or avail[s] > 0 for u in range(t) for s in req[u]):
                    rec(t + 1, cur + (vals[t] if o < 0 else 0.0), nb)
                if o >= 0:
                    match_s[o] = -1
                req[t] = []
                opt[t] = None
            if o >= 0:
                prefix.append(o)
        for s in T[t]:
            avail[s] += 1

    rec(0, 0.0, sum(vals[t] for t in range(n) if not private[t]))
    return best[0], TargetOrdering.from_order(best[2])


# -- integer model ---------------------------------------------------------

def build_blue_ilp(inst: Instance) -> IntegerModel:
    """Integer model of the Best Blue Response.

    Variables: z_i position, x_i_j sensing (j = k+1: escapes), y_i_ip_j
    "i, sensed by j, keeps j busy when ip passes", o_i_ip order of a pair,
    d_i_ip distinctness switch. Diagonal o/d are declared but unused.
    """
    n, k = inst.n, inst.k
    tau = inst.tau_eff
    D = inst.matrix
    m = IntegerModel(name="best_blue_response")
    R = range(1, n + 1)
    for i in R:
        m.add_var(f"z_{i}", "integer", 1, n)
    for i in R:
        for j in range(1, k + 2):
            m.add_var(f"x_{i}_{j}")
    for i in R:
        for ip in R:
            for j in range(1, k + 1):
                m.add_var(f"y_{i}_{ip}_{j}")
    for i in R:
        for ip in R:
            m.add_var(f"o_{i}_{ip}")
    for i in R:
        for ip in R:
            m.add_var(f"d_{i}_{ip}")
    # z_i != z_ip through d: d=0 -> z_i < z_ip, d=1 -> z_i > z_ip
    for i in R:
        for ip in R:
            if i == ip:
                continue
            m.add_constraint(f"dista_{i}_{ip}", {f"z_{i}": 1, f"z_{ip}": -1, f"d_{i}_{ip}": -n}, "<=", -1)
            m.add_constraint(f"distb_{i}_{ip}", {f"z_{i}": 1, f"z_{ip}": -1, f"d_{i}_{ip}": -n}, ">=", 1 - n)
    for i in R:
        m.add_constraint(f"part_{i}", {f"x_{i}_{j}": 1 for j in range(1, k + 2)}, "=", 1)
    for i in R:
        for j in range(1, k + 1):
            m.add_constraint(f"cap_{i}_{j}", {f"x_{i}_{j}": 1}, "<=", int(D[i - 1, j - 1]))
    # both sensed by j -> |z_ip - z_i| >= tau+1, side picked by o
    M = n + tau + 1
    for j in range(1, k + 1):
        for i in R:
            for ip in R:
                if i == ip:
                    continue
                xi, xp, o = f"x_{i}_{j}", f"x_{ip}_{j}", f"o_{i}_{ip}"
                # z_ip - z_i + M o >= -M(2 - xi - xp) + tau + 1
                m.add_constraint(f"recha_{i}_{ip}_{j}",
                                 {f"z_{ip}": 1, f"z_{i}": -1, o: M, xi: -M, xp: -M}, ">=", tau + 1 - 2 * M)
                # z_i - z_ip + M(1 - o) >= -M(2 - xi - xp) + tau + 1
                m.add_constraint(f"rechb_{i}_{ip}_{j}",
                                 {f"z_{i}": 1, f"z_{ip}": -1, o: -M, xi: -M, xp: -M}, ">=", tau + 1 - 3 * M)
    for i in R:
        for j in range(1, k + 1):
            co = {f"y_{i}_{ip}_{j}": 1 for ip in R}
            co[f"x_{i}_{j}"] = co.get(f"x_{i}_{j}", 0) - n
            m.add_constraint(f"prot_{i}_{j}", co, "<=", 0)
    for i in R:
        for ip in R:
            for j in range(1, k + 1):
                y = f"y_{i}_{ip}_{j}"
                # -n(1 - y) <= z_ip - z_i <= n(1 - y) + tau
                # pair lists: z_ip and z_i coincide on the diagonal
                m.add_constraint(f"covlo_{i}_{ip}_{j}", [(f"z_{ip}", 1), (f"z_{i}", -1), (y, -n)], ">=", -n)
                m.add_constraint(f"covhi_{i}_{ip}_{j}", [(f"z_{ip}", 1), (f"z_{i}", -1), (y, n)], "<=", n + tau)
    # greedy forcing: reaching sensor j requires every capable sensor in
    # front of j to be busy
    G = n + k
    for i in R:
        for j in range(1, k + 2):
            co = {}
            zeros = 0
            for t in range(1, j):
                if D[i - 1, t - 1]:
                    for ip in R:
                        co[f"y_{ip}_{i}_{t}"] = co.get(f"y_{ip}_{i}_{t}", 0) + 1
                else:
                    zeros += 1
            for t in range(j, k + 2):
                co[f"x_{i}_{t}"] = co.get(f"x_{i}_{t}", 0) - G
            # zeros + sum(y) - (j-1) >= -G + G * sum(x)
            m.add_constraint(f"greedy_{i}_{j}", co, ">=", (j - 1) - zeros - G)
    m.set_objective("max", {f"x_{i}_{k + 1}": float(inst.values[i - 1]) for i in R})
    return m


@dataclass(frozen=True)
class Feasible:
    objective: float = 0.0

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Violated:
    constraint: str

    def __bool__(self):
        return False


def blue_witness(inst: Instance, sigma: TargetOrdering, psi: SensingPlan) -> dict:
    n, k = inst.n, inst.k
    tau = inst.tau_eff
    z = {i + 1: int(sigma.positions[i]) for i in range(n)}
    a = {}
    for i in range(1, n + 1):
        a[f"z_{i}"] = z[i]
        s = psi.assignment[i - 1]
        for j in range(1, k + 2):
            a[f"x_{i}_{j}"] = int((s == j) if j <= k else (s is None))
    for i in range(1, n + 1):
        for ip in range(1, n + 1):
            a[f"o_{i}_{ip}"] = int(i != ip and z[ip] < z[i])
            a[f"d_{i}_{ip}"] = int(i != ip and z[i] > z[ip])
            for j in range(1, k + 1):
                a[f"y_{i}_{ip}_{j}"] = int(a[f"x_{i}_{j}"] == 1 and 0 <= z[ip] - z[i] <= tau)
    return a


def check_blue_ilp(inst: Instance, sigma: TargetOrdering, psi: SensingPlan, model: IntegerModel = None):
    """Embed (σ, ψ) with the canonical witness and test every constraint."""
    if not isinstance(sigma, TargetOrdering):
        sigma = TargetOrdering(sigma)
    _check_dims(inst, sigma, psi)
    model = model or build_blue_ilp(inst)
    a = blue_witness(inst, sigma, psi)
    bad = model.check(a)
    if bad is not None:
        return Violated(bad)
    return Feasible(model.evaluate(a))


# -- simulated annealing ---------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    t0: float = 100.0
    factor: float = 0.9
    floor: float = 1e-5
    restarts: int = 3

    def temperatures(self):
        T = self.t0
        while T > self.floor:
            yield T
            T *= self.factor


def random_pair(rng: SplitMix64, n: int):
    a = rng.randbelow(n)
    b = rng.randbelow(n - 1)
    if b >= a:
        b += 1
    return (a, b) if a < b else (b, a)


def accept(delta: float, T: float, rng: SplitMix64) -> bool:
    u = rng.random()
    x = delta / T
    if x >= 0:
        return 1.0 > u if x == 0 else True
    return math.exp(x) > u


def anneal(n, evaluate, seed, tag, variant="relax", schedule=Schedule(), paper_exact=False,
           always_move=False, full_candidate=None):
    """Generic SA over orderings with swap neighbourhood.

    evaluate(order array) -> value. full_candidate(order, value) -> (order,
    value, evaluated list) picks the candidate in the Full variant.
    Returns best (value, order) and counters.
    """
    counters = {"evaluations": 0, "accepted": 0, "iterations": 0}
    best_val, best_order = -math.inf, None
    finals = []
    for r in range(schedule.restarts):
        rng = SplitMix64(derive_seed(seed, r), tag)
        order = rng.permutation(n)
        val = evaluate(order)
        counters["evaluations"] += 1
        if val > best_val + 1e-12:
            best_val, best_order = val, order.copy()
        for T in schedule.temperatures():
            if n < 2:
                break
            counters["iterations"] += 1
            if variant == "relax":
                a, b = random_pair(rng, n)
                cand = order.copy()
                cand[a], cand[b] = cand[b], cand[a]
                cval = evaluate(cand)
                counters["evaluations"] += 1
                seen = [(cval, cand)]
            else:
                cand, cval, seen, used = full_candidate(order, val)
                counters["evaluations"] += used
            for sv, so in seen:
                if sv > best_val + 1e-12:
                    best_val, best_order = sv, so.copy()
            if always_move or accept(cval - val, T, rng):
                order, val = cand, cval
                counters["accepted"] += 1
        finals.append((val, order))
    if paper_exact:
        best_val, best_order = finals[0]
        for v, o in finals[1:]:
            if v > best_val + 1e-12:
                best_val, best_order = v, o
    return float(best_val), best_order, counters


def _neighbors(order):
    n = len(order)
    for a in range(n):
        for b in range(a + 1, n):
            cand = order.copy()
            cand[a], cand[b] = cand[b], cand[a]
            yield cand


def sa_blue(inst: Instance, variant: str = "relax", seed: int = 0, schedule: Schedule = Schedule(),
            paper_exact: bool = False, always_move: bool = False) -> SolveReport:
    variant = variant.lower()
    if variant not in ("relax", "full"):
        raise ValueError("variant must be relax or full")
    D, v, tau = inst.matrix, inst.values, inst.tau_eff
    t0 = time.perf_counter()

    def evaluate(order):
        return float(simulate_order(order, D, v, tau)[0])

    def full_candidate(order, val):
        seen = [(evaluate(c), c) for c in _neighbors(order)]
        cval, cand = seen[0]
        for sv, so in seen[1:]:
            if sv > cval + 1e-12:
                cval, cand = sv, so
        return cand, cval, seen, len(seen)

    val, order, counters = anneal(inst.n, evaluate, seed, "sa-blue", variant, schedule, paper_exact,
                                  always_move, full_candidate)
    sigma = TargetOrdering.from_order(order)
    _, plan = simulate_greedy(inst, sigma)
    return SolveReport(val, sigma, plan, f"sa:{variant}", seed, time.perf_counter() - t0, counters)

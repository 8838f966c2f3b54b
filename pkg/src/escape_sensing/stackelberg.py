"""Blue-leader Stackelberg equilibrium against a coordinated Red.

Blue commits to σ, Red answers with a Best Red Response; Blue maximises
the resulting escaped value.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import Instance, SensingPlan, TargetOrdering, StructuralError, SolveReport, _check_dims
from .ilp import IntegerModel, solve_by_enumeration
from .kernels import stackelberg_enumerate
from .noncoord import (Feasible, Violated, Schedule, anneal, _neighbors, simulate_greedy,
                       best_blue_bruteforce, best_blue_dp, sa_blue)
from .red_response import RedOracle, best_red_bruteforce, best_red_dp, greedy_red, prepare
from .rng import SplitMix64, derive_seed
from .kernels import simulate_order


def stackelberg_bruteforce(inst: Instance, red_solver: str = "dp") -> SolveReport:
    """max over σ of the Best Red Response value; ties to the smallest
    position vector."""
    n = inst.n
    if n > 9:
        raise StructuralError("Stackelberg enumeration limited to n <= 9")
    t0 = time.perf_counter()
    if red_solver == "dp":
        prep = prepare(inst)
        if prep.dense_work > 10 ** 8:
            raise StructuralError("red DP table too large for enumeration")
        val, pos, leaves = stackelberg_enumerate(prep.cost_none, prep.target_cap, prep.valid(), prep.B, prep.W)
        sigma = TargetOrdering(pos)
        counters = {"leaves": int(leaves)}
        val = float(val)
    elif red_solver == "brute":
        best, sigma = -1.0, None
        for order in itertools.permutations(range(n)):
            s = TargetOrdering.from_order(order)
            v, _ = best_red_bruteforce(inst, s)
            if v > best + 1e-12 or (abs(v - best) <= 1e-12 and tuple(s.positions) < tuple(sigma.positions)):
                best, sigma = (v if v > best + 1e-12 else best), s
        val = best
        counters = {"leaves": math.factorial(n)}
    else:
        raise ValueError(f"unknown red solver {red_solver!r}")
    value, plan = best_red_dp(inst, sigma)
    if abs(value - val) > 1e-9:
        raise AssertionError("witness re-solve disagrees with enumeration")
    return SolveReport(float(value), sigma, plan, f"brute:{red_solver}", None,
                       time.perf_counter() - t0, counters)


# -- bilevel model ---------------------------------------------------------

def build_bilevel(inst: Instance):
    """(outer, inner, linkage). Outer owns z, l, d and maximises the
    escaped value; inner owns x and minimises it subject to validity,
    reading l from the outer level."""
    n, k = inst.n, inst.k
    tau = inst.tau_eff
    D = inst.matrix
    R = range(1, n + 1)
    outer = IntegerModel(name="stackelberg_outer")
    inner = IntegerModel(name="stackelberg_inner")
    for i in R:
        outer.add_var(f"z_{i}", "integer", 1, n)
    for i in R:
        for j in R:
            outer.add_var(f"l_{i}_{j}")
    for i in R:
        for ip in R:
            outer.add_var(f"d_{i}_{ip}")
    for i in R:
        for j in range(1, k + 2):
            inner.add_var(f"x_{i}_{j}")
            outer.add_external(f"x_{i}_{j}")
    for i in R:
        for ip in R:
            if i == ip:
                continue
            outer.add_constraint(f"dista_{i}_{ip}", {f"z_{i}": 1, f"z_{ip}": -1, f"d_{i}_{ip}": -n}, "<=", -1)
            outer.add_constraint(f"distb_{i}_{ip}", {f"z_{i}": 1, f"z_{ip}": -1, f"d_{i}_{ip}": -n}, ">=", 1 - n)
    M = n + tau
    for i in R:
        for j in R:
            # l = 1  ->  z_j - z_i >= tau + 1
            outer.add_constraint(f"lge_{i}_{j}", [(f"z_{j}", 1), (f"z_{i}", -1), (f"l_{i}_{j}", -M)], ">=",
                                 tau + 1 - M)
            # l = 0  ->  z_j - z_i <= tau
            outer.add_constraint(f"lle_{i}_{j}", [(f"z_{j}", 1), (f"z_{i}", -1), (f"l_{i}_{j}", -n)], "<=", tau)
    obj = {f"x_{i}_{k + 1}": float(inst.values[i - 1]) for i in R}
    outer.set_objective("max", obj)
    for i in R:
        for j in R:
            inner.add_external(f"l_{i}_{j}")
    for i in R:
        inner.add_constraint(f"part_{i}", {f"x_{i}_{j}": 1 for j in range(1, k + 2)}, "=", 1)
    for i in R:
        for j in range(1, k + 1):
            inner.add_constraint(f"cap_{i}_{j}", {f"x_{i}_{j}": 1}, "<=", int(D[i - 1, j - 1]))
    for i in R:
        for ip in R:
            if i == ip:
                continue
            for j in range(1, k + 1):
                inner.add_constraint(f"pair_{i}_{ip}_{j}", {f"x_{i}_{j}": 1, f"x_{ip}_{j}": 1,
                                                            f"l_{i}_{ip}": -1, f"l_{ip}_{i}": -1}, "<=", 1)
    inner.set_objective("min", dict(obj))
    linkage = {
        "leader_variables": [v for v in outer.variables],
        "follower_variables": [v for v in inner.variables],
        "follower_reads": sorted(inner.external),
        "leader_objective_reads": sorted(outer.objective),
        "follower_objective": "min",
        "leader_objective": "max",
    }
    return outer, inner, linkage


def bilevel_witness(inst: Instance, sigma: TargetOrdering, psi: SensingPlan) -> dict:
    n, k = inst.n, inst.k
    tau = inst.tau_eff
    z = {i + 1: int(sigma.positions[i]) for i in range(n)}
    a = {}
    for i in range(1, n + 1):
        a[f"z_{i}"] = z[i]
        s = psi.assignment[i - 1]
        for j in range(1, k + 2):
            a[f"x_{i}_{j}"] = int((s == j) if j <= k else (s is None))
        for j in range(1, n + 1):
            a[f"l_{i}_{j}"] = int(z[j] - z[i] >= tau + 1)
            a[f"d_{i}_{j}"] = int(i != j and z[i] > z[j])
    return a


def check_bilevel(inst: Instance, sigma, psi: SensingPlan, verify_inner: bool = False, models=None):
    """Embed (σ, ψ) into the bilevel model and test all constraints.

    With verify_inner, additionally require ψ to be an optimal follower
    answer (inner program solved by enumeration with l fixed).
    """
    if not isinstance(sigma, TargetOrdering):
        sigma = TargetOrdering(sigma)
    _check_dims(inst, sigma, psi)
    outer, inner, _ = models or build_bilevel(inst)
    a = bilevel_witness(inst, sigma, psi)
    for m in (outer, inner):
        bad = m.check(a)
        if bad is not None:
            return Violated(bad)
    obj = outer.evaluate(a)
    if verify_inner:
        fixed = inner.fix_external(a)
        res = solve_by_enumeration(fixed)
        if res.objective is None or obj > res.objective + 1e-9:
            return Violated("follower-optimality")
    return Feasible(obj)


# -- heuristics ------------------------------------------------------------

def sa_stackelberg(inst: Instance, variant: str = "relax", seed: int = 0, schedule: Schedule = Schedule(),
                   mu: float = 0.1, paper_exact: bool = False, always_move: bool = False,
                   trace=None) -> SolveReport:
    """Simulated annealing over σ with an exact inner DP.

    Full: screen all swap neighbours with random-policy greedy sensing,
    solve the top ceil(mu * |N|) (plus boundary ties) exactly, take the
    best exact one as candidate. trace, if a list, receives (order, value)
    for every exact evaluation.
    """
    variant = variant.lower()
    if variant not in ("relax", "full"):
        raise ValueError("variant must be relax or full")
    if not (0.0 < mu <= 1.0):
        raise ValueError("mu must lie in (0, 1]")
    oracle = RedOracle(inst)
    t0 = time.perf_counter()
    screen_rng = SplitMix64(derive_seed(seed, "screen"), "sa-screen")
    stats = {"screened": 0}

    def evaluate(order):
        v = oracle.value(order)
        if trace is not None:
            trace.append((np.array(order, copy=True), v))
        return v

    def full_candidate(order, val):
        neigh = list(_neighbors(order))
        scores = []
        for c in neigh:
            s = TargetOrdering.from_order(c)
            scores.append(greedy_red(inst, s, "random", screen_rng.next_u64())[0])
        stats["screened"] += len(neigh)
        keep = max(1, math.ceil(mu * len(neigh)))
        ranked = sorted(range(len(neigh)), key=lambda q: (-scores[q], q))
        cut = scores[ranked[keep - 1]]
        chosen = sorted(q for q in range(len(neigh)) if scores[q] >= cut - 1e-12)
        seen = [(evaluate(neigh[q]), neigh[q]) for q in chosen]
        cval, cand = seen[0]
        for sv, so in seen[1:]:
            if sv > cval + 1e-12:
                cval, cand = sv, so
        return cand, cval, seen, len(seen)

    val, order, counters = anneal(inst.n, evaluate, seed, "sa-stackelberg", variant, schedule, paper_exact,
                                  always_move, full_candidate)
    counters.update(stats)
    sigma = TargetOrdering.from_order(order)
    value, plan = oracle.solve(sigma)
    return SolveReport(float(value), sigma, plan, f"sa:{variant}", seed, time.perf_counter() - t0, counters)


def exact_local_ascent(inst: Instance, sigma: TargetOrdering, oracle: RedOracle = None):
    """Steepest ascent over the full swap neighbourhood with exact values;
    stops at an ordering no single swap improves."""
    oracle = oracle or RedOracle(inst)
    order = sigma.order()
    val = oracle.value(order)
    while True:
        best_v, best_o = val, None
        for c in _neighbors(order):
            v = oracle.value(c)
            if v > best_v + 1e-12:
                best_v, best_o = v, c
        if best_o is None:
            return val, TargetOrdering.from_order(order)
        order, val = best_o, best_v


def random_baseline(inst: Instance, samples: int = None, seed: int = 0, responder: str = "coordinated") -> SolveReport:
    """Best of `samples` random orderings drawn from one seeded stream
    (samples=1 is a single arbitrary ordering)."""
    if responder not in ("coordinated", "greedy"):
        raise ValueError("responder must be coordinated or greedy")
    if samples is None:
        samples = 3000 if responder == "coordinated" else 1000
    if samples < 1:
        raise ValueError("samples must be at least 1")
    t0 = time.perf_counter()
    rng = SplitMix64(seed, "random-orderings")
    if responder == "coordinated":
        oracle = RedOracle(inst)
        evaluate = oracle.value
    else:
        D, v, tau = inst.matrix, inst.values, inst.tau_eff

        def evaluate(order):
            return float(simulate_order(order, D, v, tau)[0])
    best_v, best_o = -1.0, None
    for _ in range(samples):
        order = rng.permutation(inst.n)
        val = evaluate(order)
        if val > best_v + 1e-12:
            best_v, best_o = val, order
    sigma = TargetOrdering.from_order(best_o)
    if responder == "coordinated":
        _, plan = best_red_dp(inst, sigma)
    else:
        _, plan = simulate_greedy(inst, sigma)
    return SolveReport(float(best_v), sigma, plan, f"random:{samples}:{responder}", seed,
                       time.perf_counter() - t0, {"samples": samples})


@dataclass(frozen=True)
class GapResult:
    v_greedy: float
    v_coord: float
    gap: float
    consistent: bool


NONCOORD_SOLVERS = {
    "brute": lambda inst, seed: best_blue_bruteforce(inst)[0],
    "dp": lambda inst, seed: best_blue_dp(inst)[0],
    "sa:relax": lambda inst, seed: sa_blue(inst, "relax", seed).value,
    "sa:full": lambda inst, seed: sa_blue(inst, "full", seed).value,
}
COORD_SOLVERS = {
    "brute": lambda inst, seed: stackelberg_bruteforce(inst).value,
    "sa:relax": lambda inst, seed: sa_stackelberg(inst, "relax", seed).value,
    "sa:full": lambda inst, seed: sa_stackelberg(inst, "full", seed).value,
}


def coordination_gap(inst: Instance, blue_solver_noncoord="brute", blue_solver_coord="brute",
                     seed: int = 0) -> GapResult:
    """Relative loss for Blue when Red coordinates: (v_greedy - v_coord) / v_greedy.

    Solvers are names from NONCOORD_SOLVERS / COORD_SOLVERS, callables
    (inst, seed) -> value, or precomputed SolveReports.
    """
    def run(s, table):
        if isinstance(s, SolveReport):
            return s.value
        if isinstance(s, str):
            return table[s](inst, seed)
        return s(inst, seed)

    vg = float(run(blue_solver_noncoord, NONCOORD_SOLVERS))
    vc = float(run(blue_solver_coord, COORD_SOLVERS))
    if vg > 0:
        gap = (vg - vc) / vg
    else:
        gap = 0.0
    return GapResult(vg, vc, gap, vg >= vc - 1e-9)

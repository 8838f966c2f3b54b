import numpy as np
import pytest

from escape_sensing.core import INF, Instance, SensingPlan, StructuralError, TargetOrdering, validate_plan
from escape_sensing.ilp import enumerate_feasible
from escape_sensing.noncoord import Feasible, Violated, simulate_greedy
from escape_sensing.red_response import best_red_dp
from escape_sensing.stackelberg import (build_bilevel, check_bilevel, coordination_gap, exact_local_ascent,
                                        random_baseline, sa_stackelberg, stackelberg_bruteforce)
from util import naive_stackelberg, random_sigma, small_instance

TOL = 1e-9


def test_red_takes_the_two():
    inst = Instance(2, 1, 1, [1, 2], np.ones((2, 1)))
    rep = stackelberg_bruteforce(inst)
    assert rep.value == 1
    for order in ([0, 1], [1, 0]):
        assert best_red_dp(inst, TargetOrdering.from_order(order))[0] == 1


def test_no_sensors():
    inst = Instance(3, 0, 1, [1, 2, 3], np.zeros((3, 0)))
    assert stackelberg_bruteforce(inst).value == 6
    assert coordination_gap(inst).gap == 0


def test_guard():
    with pytest.raises(StructuralError):
        stackelberg_bruteforce(Instance(10, 1, 1, np.ones(10), np.ones((10, 1))))


def test_equals_explicit_enumeration():
    for s in range(30):
        inst = small_instance(7000 + s, n_range=(1, 5), k_range=(0, 3))
        ref = naive_stackelberg(inst)
        dp = stackelberg_bruteforce(inst)
        assert abs(dp.value - ref) <= TOL
        assert abs(stackelberg_bruteforce(inst, red_solver="brute").value - ref) <= TOL
        assert validate_plan(inst, dp.ordering, dp.plan)


def test_n6_suite_against_brute_inner():
    for s in range(4):
        inst = small_instance(7100 + s, n_range=(6, 6), k_range=(2, 3), taus=(1, 2))
        a = stackelberg_bruteforce(inst)
        b = stackelberg_bruteforce(inst, red_solver="brute")
        assert abs(a.value - b.value) <= TOL and a.ordering == b.ordering


# bilevel model

def test_bilevel_counts():
    outer, inner, link = build_bilevel(Instance(3, 2, 1, np.ones(3), np.ones((3, 2))))
    assert outer.count("z") == 3 and outer.count("l") == 9 and inner.count("x") == 9
    assert set(link["follower_reads"]) == {f"l_{i}_{j}" for i in range(1, 4) for j in range(1, 4)}


def test_bilevel_witness_of_equilibrium():
    for s in range(50):
        inst = small_instance(7200 + s, n_range=(1, 4), k_range=(0, 2), taus=(0, 1, 2, INF))
        rep = stackelberg_bruteforce(inst)
        res = check_bilevel(inst, rep.ordering, rep.plan, verify_inner=True)
        assert isinstance(res, Feasible) and abs(res.objective - rep.value) <= TOL


def test_bilevel_single_target():
    inst = Instance(1, 2, 1, [1.0], [[0, 1]])
    _, inner, _ = build_bilevel(inst)
    pts = enumerate_feasible(inner.fix_external({"l_1_1": 0}))
    assert pts
    for p in pts:
        assert p["x_1_1"] == 0 and p["x_1_2"] + p["x_1_3"] == 1


def test_check_valid_plans_feasible():
    for s in range(60):
        inst = small_instance(7300 + s, n_range=(1, 5), k_range=(1, 3))
        sig = random_sigma(inst.n, s)
        for plan in (best_red_dp(inst, sig)[1], simulate_greedy(inst, sig)[1]):
            assert validate_plan(inst, sig, plan)
            assert isinstance(check_bilevel(inst, sig, plan), Feasible)


def test_check_recharge_violation():
    inst = Instance(2, 1, 1, [1, 1], np.ones((2, 1)))
    res = check_bilevel(inst, TargetOrdering.identity(2), SensingPlan((1, 1)))
    assert isinstance(res, Violated) and res.constraint.startswith("pair")


def test_check_suboptimal_follower():
    inst = Instance(2, 1, 1, [1, 2], np.ones((2, 1)))
    res = check_bilevel(inst, TargetOrdering.identity(2), SensingPlan((1, None)), verify_inner=True)
    assert isinstance(res, Violated) and res.constraint == "follower-optimality"


def test_check_non_permutation():
    inst = Instance(2, 1, 1, [1, 1], np.ones((2, 1)))
    with pytest.raises(StructuralError):
        check_bilevel(inst, [1, 1], SensingPlan.empty(2))


# heuristics

def test_sa_trivial_and_bounded():
    one = Instance(1, 1, 1, [0.5], [[1]])
    assert sa_stackelberg(one).ordering.positions.tolist() == [1]
    for s in range(10):
        inst = small_instance(7400 + s, n_range=(4, 7), k_range=(1, 3))
        exact = stackelberg_bruteforce(inst).value
        for variant in ("relax", "full"):
            rep = sa_stackelberg(inst, variant, seed=s)
            assert rep.value <= exact + TOL
            assert abs(best_red_dp(inst, rep.ordering)[0] - rep.value) <= TOL


def test_sa_trace_best_seen():
    inst = small_instance(7500, n_range=(6, 6), k_range=(2, 2))
    trace = []
    rep = sa_stackelberg(inst, "full", seed=2, mu=0.2, trace=trace)
    assert trace and rep.value == max(v for _, v in trace)


def test_local_ascent_is_local_optimum():
    inst = small_instance(7600, n_range=(6, 6), k_range=(2, 2))
    v, sig = exact_local_ascent(inst, TargetOrdering.identity(6))
    for a in range(6):
        for b in range(a + 1, 6):
            assert best_red_dp(inst, sig.swapped(a, b))[0] <= v + TOL


def test_random_baseline_monotone_in_samples():
    for s in range(10):
        inst = small_instance(7700 + s, n_range=(5, 7), k_range=(1, 3))
        for responder in ("coordinated", "greedy"):
            one = random_baseline(inst, 1, seed=s, responder=responder)
            many = random_baseline(inst, 100, seed=s, responder=responder)
            assert many.value >= one.value
    nos = Instance(2, 0, 1, [1, 2], np.zeros((2, 0)))
    assert random_baseline(nos, 5).value == 3


def test_gap_consistent_for_exact_solvers():
    for s in range(200):
        inst = small_instance(7800 + s, n_range=(1, 6), k_range=(0, 3))
        res = coordination_gap(inst)
        assert res.consistent and res.v_greedy >= res.v_coord - TOL
        assert 0 <= res.gap <= 1 + TOL


def test_gap_flags_inconsistency():
    inst = Instance(2, 1, 1, [1, 2], np.ones((2, 1)))
    res = coordination_gap(inst, lambda i, s: 0.5, "brute")
    assert not res.consistent


def test_sa_inner_values_fresh():
    inst = small_instance(7900, n_range=(7, 7), k_range=(3, 3))
    trace = []
    sa_stackelberg(inst, "relax", seed=4, trace=trace)
    for order, v in trace[::7]:
        assert abs(best_red_dp(inst, TargetOrdering.from_order(order))[0] - v) <= TOL


def test_exact_dominance():
    from escape_sensing.noncoord import best_blue_bruteforce
    for s in range(60):
        inst = small_instance(8000 + s, n_range=(1, 6), k_range=(0, 3))
        assert stackelberg_bruteforce(inst).value <= best_blue_bruteforce(inst)[0] + TOL

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from escape_sensing.core import (INF, Instance, Invalid, SensingPlan, StructuralError, TargetOrdering, Valid,
                                 compute_types, load_instance, parse_sigma, plan_value, save_instance,
                                 validate_plan)
from util import naive_valid, small_instance


def ones(n, k, tau, values=None):
    return Instance(n, k, tau, np.ones(n) if values is None else values, np.ones((n, k), dtype=np.uint8))


# validate_plan

def test_recharge_is_strict():
    inst = ones(2, 1, 1)
    res = validate_plan(inst, TargetOrdering.identity(2), SensingPlan((1, 1)))
    assert isinstance(res, Invalid) and res.reason == "recharge" and res.pair == (0, 1)


def test_single_sense_is_valid():
    inst = ones(2, 1, 1)
    assert isinstance(validate_plan(inst, TargetOrdering.identity(2), SensingPlan((1, None))), Valid)


def test_capability_violation():
    inst = Instance(2, 1, 1, np.ones(2), np.array([[0], [1]]))
    res = validate_plan(inst, TargetOrdering.identity(2), SensingPlan((1, None)))
    assert not res and res.reason == "capability"


def test_dimension_mismatch_is_structural():
    inst = ones(2, 1, 1)
    with pytest.raises(StructuralError):
        validate_plan(inst, TargetOrdering.identity(3), SensingPlan((None, None)))
    with pytest.raises(StructuralError):
        validate_plan(inst, TargetOrdering.identity(2), SensingPlan((2, None)))


def test_tau_inf_behaves_like_tau_n():
    for s in range(60):
        inst = small_instance(s, taus=(INF,))
        same = inst.with_tau(inst.n)
        r = np.random.default_rng(s)
        for _ in range(5):
            sig = TargetOrdering.from_order(r.permutation(inst.n))
            plan = SensingPlan(tuple(int(r.integers(0, inst.k + 1)) or None for _ in range(inst.n)))
            assert bool(validate_plan(inst, sig, plan)) == bool(validate_plan(same, sig, plan))
        assert inst.tau_eff == inst.n


def test_large_tau_means_one_target_per_sensor():
    for s in range(40):
        inst = small_instance(s, taus=(INF,))
        fin = inst.with_tau(max(inst.n - 1, 0))
        r = np.random.default_rng(100 + s)
        sig = TargetOrdering.from_order(r.permutation(inst.n))
        plan = SensingPlan(tuple(int(r.integers(0, inst.k + 1)) or None for _ in range(inst.n)))
        cap_ok = all(a is None or inst.matrix[i, a - 1] for i, a in enumerate(plan.assignment))
        sensed = [a for a in plan.assignment if a is not None]
        expect = cap_ok and len(sensed) == len(set(sensed))
        assert bool(validate_plan(fin, sig, plan)) == expect == bool(validate_plan(inst, sig, plan))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_validate_matches_pairwise_definition(seed):
    inst = small_instance(seed)
    r = np.random.default_rng(seed)
    sig = TargetOrdering.from_order(r.permutation(inst.n))
    assign = [int(r.integers(-1, inst.k)) if inst.k else -1 for _ in range(inst.n)]
    plan = SensingPlan(tuple(a + 1 if a >= 0 else None for a in assign))
    assert bool(validate_plan(inst, sig, plan)) == naive_valid(inst, sig.positions, assign)
    if validate_plan(inst, sig, plan):
        assert -1e-12 <= plan_value(inst, plan) <= inst.total_value + 1e-12


def test_validity_invariant_under_same_type_relabel():
    inst = Instance(3, 3, 1, np.ones(3), np.array([[1, 1, 0], [1, 1, 1], [0, 0, 1]]))
    sig = TargetOrdering.identity(3)
    a = SensingPlan((1, None, 3))
    b = SensingPlan((2, None, 3))
    assert bool(validate_plan(inst, sig, a)) == bool(validate_plan(inst, sig, b))


# plan_value

def test_plan_value_examples():
    inst = Instance(2, 1, 1, [0.5, 0.7], [[1], [1]])
    assert plan_value(inst, SensingPlan.empty(2)) == pytest.approx(1.2)
    assert plan_value(inst, SensingPlan((1, 1))) == 0
    inst3 = Instance(3, 1, 1, [1, 2, 3], [[1], [1], [1]])
    assert plan_value(inst3, SensingPlan((None, 1, None))) == 4


# compute_types

def test_identical_columns_one_class():
    inst = Instance(2, 3, 1, [1, 1], [[1, 1, 1], [0, 0, 0]])
    tp = compute_types(inst)
    assert tp.k_chi == 1 and tp.sensor_counts == (3,)


def test_equal_rows_different_values_two_classes():
    inst = Instance(2, 1, 1, [1, 2], [[1], [1]])
    assert compute_types(inst).n_chi == 2


def test_distinct_rows_and_columns():
    inst = Instance(3, 3, 1, [1, 1, 1], np.eye(3, dtype=np.uint8))
    tp = compute_types(inst)
    assert (tp.n_chi, tp.k_chi) == (3, 3)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_types_partition_definition(seed):
    inst = small_instance(seed)
    tp = compute_types(inst)
    tt, stt = tp.target_type_of(), tp.sensor_type_of()
    for i in range(inst.n):
        for q in range(inst.n):
            same = np.array_equal(inst.matrix[i], inst.matrix[q]) and inst.values[i] == inst.values[q]
            assert (tt[i] == tt[q]) == same
    for j in range(inst.k):
        for q in range(inst.k):
            assert (stt[j] == stt[q]) == np.array_equal(inst.matrix[:, j], inst.matrix[:, q])
    firsts = [c[0] for c in tp.target_types]
    assert firsts == sorted(firsts)


# instance / ordering plumbing

def test_instance_invariants():
    with pytest.raises(StructuralError):
        Instance(2, 1, 1, [1], [[1], [1]])
    with pytest.raises(StructuralError):
        Instance(1, 1, 1, [-1], [[1]])
    with pytest.raises(StructuralError):
        Instance(1, 1, 1, [1], [[2]])
    with pytest.raises(StructuralError):
        Instance(1, 1, -1, [1], [[1]])


def test_json_roundtrip(tmp_path):
    for s in range(20):
        inst = small_instance(s)
        again = Instance.from_json(inst.to_json())
        assert again == inst
        d = json.loads(inst.to_json())
        assert d["tau"] == ("inf" if inst.tau == INF else inst.tau)
    save_instance(inst, tmp_path / "i.json")
    assert load_instance(tmp_path / "i.json") == inst


def test_ordering_helpers():
    sig = parse_sigma("3,1,2")
    assert sig.positions.tolist() == [2, 3, 1]
    assert sig.order().tolist() == [2, 0, 1]
    assert TargetOrdering.from_order(sig.order()) == sig
    assert sig.swapped(0, 1).positions.tolist() == [3, 2, 1]
    with pytest.raises(StructuralError):
        TargetOrdering([1, 1, 2])
    with pytest.raises(StructuralError):
        parse_sigma("1,2", 3)


def test_plan_views():
    p = SensingPlan.from_array([0, 2, 2, 1])
    assert p.to_list() == [None, 2, 2, 1]
    assert p.by_sensor(2) == {1: [3], 2: [1, 2]}
    assert p.sensed() == [1, 2, 3]
    assert p.to_array().tolist() == [0, 2, 2, 1]

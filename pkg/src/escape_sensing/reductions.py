"""Hardness constructions used as adversarial instance generators with
known answers, plus tiny brute-force deciders for the source problems.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Instance, TargetOrdering, INF


# -- Hitting Set -> Best Red Response --------------------------------------

@dataclass
class HittingSetReduction:
    instance: Instance
    sigma: TargetOrdering
    target_labels: list
    sensor_labels: list
    threshold: float = 0.0       # Red must sense everything


def reduce_hitting_set(universe, sets, t) -> HittingSetReduction:
    """Rounds j = 1..m: selection targets, first |U| dummies, the set
    target, filling targets, last |U| dummies. σ is the construction order.
    """
    U = list(universe)
    if len(set(U)) != len(U):
        raise ValueError("universe elements must be distinct")
    if t < 2 or len(U) <= t:
        raise ValueError("need t >= 2 and |U| > t")
    Z = [set(z) for z in sets]
    for z in Z:
        if not z <= set(U):
            raise ValueError("sets must be subsets of the universe")
    u_n, m = len(U), len(Z)
    sensors = [("a", u) for u in U]
    for j in range(1, m + 1):
        for i in range(1, 2 * u_n + 1):
            sensors.append(("d", i, j))
    s_index = {s: q for q, s in enumerate(sensors)}
    targets, caps = [], []
    for j in range(1, m + 1):
        elem = [s_index[("a", u)] for u in U]
        for i in range(1, u_n - t + 1):
            targets.append(("beta", i, j))
            caps.append(elem)
        for i in range(1, u_n + 1):
            targets.append(("delta", i, j))
            caps.append([s_index[("d", i, j)]])
        targets.append(("alpha", j))
        caps.append([s_index[("a", u)] for u in U if u in Z[j - 1]])
        for i in range(1, t):
            targets.append(("gamma", i, j))
            caps.append(elem)
        for i in range(u_n + 1, 2 * u_n + 1):
            targets.append(("delta", i, j))
            caps.append([s_index[("d", i, j)]])
    n, k = len(targets), len(sensors)
    D = np.zeros((n, k), dtype=np.uint8)
    for r, cs in enumerate(caps):
        D[r, cs] = 1
    meta = {"generator": "hitting-set", "universe": [str(u) for u in U],
            "sets": [sorted(str(x) for x in z) for z in Z], "t": t}
    inst = Instance(n, k, 2 * u_n + 1, np.ones(n), D, meta)
    return HittingSetReduction(inst, TargetOrdering.identity(n), targets, sensors)


def hitting_set_bruteforce(universe, sets, t) -> bool:
    U = list(universe)
    Z = [set(z) for z in sets]
    for pick in itertools.combinations(U, t):
        chosen = set(pick)
        if all(z & chosen for z in Z):
            return True
    return False


# -- Restricted 3-SAT -> Best Blue Response ------------------------------

@dataclass
class SatReduction:
    instance: Instance
    target_labels: list
    sensor_labels: list      # channel order (= matrix column order)
    threshold: int           # ℓ = |C| + 2|X|


def check_restricted(num_vars: int, clauses, min_len: int = 2) -> None:
    pos = [0] * (num_vars + 1)
    neg = [0] * (num_vars + 1)
    for c in clauses:
        if not (min_len <= len(c) <= 3):
            raise ValueError(f"clause {c} must have {min_len}..3 literals")
        for lit in c:
            if lit == 0 or abs(lit) > num_vars:
                raise ValueError(f"bad literal {lit}")
            (pos if lit > 0 else neg)[abs(lit)] += 1
    for x in range(1, num_vars + 1):
        if pos[x] != 2 or neg[x] != 1:
            raise ValueError(f"variable {x} occurs {pos[x]}x positive, {neg[x]}x negative; need 2 and 1")


def reduce_restricted_3sat(num_vars: int, clauses, order: str = "construction", min_len: int = 2) -> SatReduction:
    """Gadget instance with τ = ∞; satisfiable iff Blue can let ℓ targets escape.

    Literals are non-zero ints (x or -x). Each variable must occur twice
    positively and once negatively. order="reversed" reverses the sensors
    inside each group (clause, dummy, variable, catch).
    """
    clauses = [tuple(int(l) for l in c) for c in clauses]
    check_restricted(num_vars, clauses, min_len)
    C = len(clauses)
    X = range(1, num_vars + 1)
    groups = {
        "clause": [("s_c", c) for c in range(C)],
        "dummy": [("s_du", x, a) for x in X for a in (1, 2)],
        "variable": [("s_var", x, a) for x in X for a in ("1", "2", "bar")],
        "catch": [("s_ca", x, a) for x in X for a in ("1", "2", "bar")],
    }
    if order == "reversed":
        groups = {g: list(reversed(v)) for g, v in groups.items()}
    elif order != "construction":
        raise ValueError("order must be construction or reversed")
    sensors = groups["clause"] + groups["dummy"] + groups["variable"] + groups["catch"]
    s_index = {s: q for q, s in enumerate(sensors)}
    occ_pos = {x: [] for x in X}
    occ_neg = {x: [] for x in X}
    for ci, c in enumerate(clauses):
        for lit in c:
            (occ_pos if lit > 0 else occ_neg)[abs(lit)].append(ci)
    targets, caps = [], []
    for ci in range(C):
        targets.append(("t_c", ci))
        caps.append([("s_c", ci)])
    for x in X:
        ci, cj = occ_pos[x]
        ck = occ_neg[x][0]
        targets += [("t_var", x, "1"), ("t_var", x, "2"), ("t_var", x, "bar")]
        caps += [[("s_c", ci), ("s_var", x, "1"), ("s_ca", x, "1")],
                 [("s_c", cj), ("s_var", x, "2"), ("s_ca", x, "2")],
                 [("s_c", ck), ("s_var", x, "bar"), ("s_ca", x, "bar")]]
        targets += [("t_du", x, a) for a in (1, 2, 3, 4)]
        caps += [[("s_var", x, "1"), ("s_du", x, 1)],
                 [("s_var", x, "bar"), ("s_du", x, 1)],
                 [("s_var", x, "bar"), ("s_du", x, 2)],
                 [("s_var", x, "2"), ("s_du", x, 2)]]
    n, k = len(targets), len(sensors)
    D = np.zeros((n, k), dtype=np.uint8)
    for r, cs in enumerate(caps):
        for s in cs:
            D[r, s_index[s]] = 1
    meta = {"generator": "restricted-3sat", "num_vars": num_vars,
            "clauses": [list(c) for c in clauses], "sensor_order": order}
    inst = Instance(n, k, INF, np.ones(n), D, meta)
    return SatReduction(inst, targets, sensors, C + 2 * num_vars)


def sat_bruteforce(num_vars: int, clauses) -> bool:
    for bits in itertools.product((False, True), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def random_restricted_formula(num_vars: int, rng, min_len: int = 2):
    """Shuffle the 3·num_vars literal occurrences and cut them into clauses
    of length 2 or 3 (a trailing single literal joins the previous clause
    when possible)."""
    lits = []
    for x in range(1, num_vars + 1):
        lits += [x, x, -x]
    perm = rng.permutation(len(lits))
    lits = [lits[i] for i in perm]
    clauses, i = [], 0
    while i < len(lits):
        rest = len(lits) - i
        if rest <= 3:
            size = rest
        elif rest == 4:
            size = 2
        else:
            size = 2 + rng.randbelow(2) if min_len <= 2 else 3
        clauses.append(tuple(lits[i:i + size]))
        i += size
    if len(clauses[-1]) < min_len:
        last = clauses.pop()
        clauses[-1] = clauses[-1] + last
    return clauses


def random_hitting_set(rng, u_range=(3, 4), m_range=(2, 4)):
    u = u_range[0] + rng.randbelow(u_range[1] - u_range[0] + 1)
    m = m_range[0] + rng.randbelow(m_range[1] - m_range[0] + 1)
    t = 2 + rng.randbelow(u - 2)       # 2 <= t < u
    U = list(range(1, u + 1))
    sets = []
    for _ in range(m):
        size = 1 if rng.randbelow(3) else 2     # mostly singletons, so 'no' answers occur
        perm = rng.permutation(u)
        sets.append(sorted(U[q] for q in perm[:size]))
    return U, sets, t

"""Solver-agnostic integer models, LP-style text I/O and an exact
enumeration solver for tiny models.

The enumeration solver assigns variables in declaration order and keeps,
for every constraint, the smallest and largest activity still reachable.
A branch is cut as soon as some constraint can no longer be satisfied or
the objective bound cannot beat the incumbent.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ._accel import njit

SENSES = ("<=", ">=", "=")


@dataclass
class Variable:
    name: str
    kind: str = "binary"      # binary | integer
    lb: int = 0
    ub: int = 1


@dataclass
class Constraint:
    name: str
    coeffs: Dict[str, float]
    sense: str
    rhs: float


@dataclass
class IntegerModel:
    name: str = "model"
    variables: Dict[str, Variable] = field(default_factory=dict)
    constraints: List[Constraint] = field(default_factory=list)
    objective_sense: str = "min"
    objective: Dict[str, float] = field(default_factory=dict)
    # variables owned by another level (bilevel linkage); readable, not declared here
    external: Dict[str, Variable] = field(default_factory=dict)

    def _known(self, v):
        return v in self.variables or v in self.external

    def add_external(self, name, kind="binary", lb=0, ub=1):
        self.external[name] = Variable(name, kind, int(lb), int(ub))
        return name

    def add_var(self, name, kind="binary", lb=0, ub=1):
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        if kind == "binary":
            lb, ub = 0, 1
        self.variables[name] = Variable(name, kind, int(lb), int(ub))
        return name

    def add_constraint(self, name, coeffs, sense, rhs):
        if sense == "==":
            sense = "="
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense}")
        merged = {}
        for v, a in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
            if not self._known(v):
                raise KeyError(f"constraint {name} uses undeclared variable {v}")
            merged[v] = merged.get(v, 0.0) + float(a)
        merged = {v: a for v, a in merged.items() if a != 0.0}
        self.constraints.append(Constraint(name, merged, sense, float(rhs)))

    def set_objective(self, sense, coeffs):
        if sense not in ("min", "max"):
            raise ValueError("objective sense must be min or max")
        for v in coeffs:
            if not self._known(v):
                raise KeyError(f"objective uses undeclared variable {v}")
        self.objective_sense = sense
        self.objective = {v: float(a) for v, a in coeffs.items() if a != 0.0}

    # -- queries -----------------------------------------------------------
    def count(self, prefix: str) -> int:
        """Variables of one family: count("x") counts x_1_1, x_1_2, ..."""
        return sum(1 for v in self.variables if v.split("_")[0] == prefix)

    def constraint_count(self, prefix: str) -> int:
        return sum(1 for c in self.constraints if c.name.split("_")[0] == prefix)

    def binaries(self):
        return [v.name for v in self.variables.values() if v.kind == "binary"]

    def check(self, assignment: dict, tol=1e-9):
        """Name of the first violated constraint, or None if all hold."""
        for name, var in self.variables.items():
            val = assignment.get(name, 0)
            if val < var.lb - tol or val > var.ub + tol:
                return f"bound:{name}"
        for c in self.constraints:
            act = sum(a * assignment.get(v, 0) for v, a in c.coeffs.items())
            if c.sense == "<=" and act > c.rhs + tol:
                return c.name
            if c.sense == ">=" and act < c.rhs - tol:
                return c.name
            if c.sense == "=" and abs(act - c.rhs) > tol:
                return c.name
        return None

    def evaluate(self, assignment: dict) -> float:
        return float(sum(a * assignment.get(v, 0) for v, a in self.objective.items()))

    def structurally_equal(self, other: "IntegerModel") -> bool:
        if list(self.variables) != list(other.variables):
            return False
        for name, v in self.variables.items():
            w = other.variables[name]
            if (v.kind, v.lb, v.ub) != (w.kind, w.lb, w.ub):
                return False
        if len(self.constraints) != len(other.constraints):
            return False
        for c, d in zip(self.constraints, other.constraints):
            if (c.name, c.sense, c.rhs, c.coeffs) != (d.name, d.sense, d.rhs, d.coeffs):
                return False
        if {k: (v.kind, v.lb, v.ub) for k, v in self.external.items()} != \
                {k: (v.kind, v.lb, v.ub) for k, v in other.external.items()}:
            return False
        return self.objective_sense == other.objective_sense and self.objective == other.objective

    def fix_external(self, values: dict) -> "IntegerModel":
        """Copy with every external variable replaced by its given value."""
        out = IntegerModel(name=self.name, objective_sense=self.objective_sense)
        out.variables = {k: Variable(v.name, v.kind, v.lb, v.ub) for k, v in self.variables.items()}
        for c in self.constraints:
            rhs = c.rhs
            co = {}
            for v, a in c.coeffs.items():
                if v in self.external:
                    rhs -= a * values[v]
                else:
                    co[v] = a
            out.constraints.append(Constraint(c.name, co, c.sense, rhs))
        out.objective = {v: a for v, a in self.objective.items() if v not in self.external}
        return out


# -- LP-style text --------------------------------------------------------

def _num(x: float) -> str:
    return repr(float(x))


def _expr(coeffs: dict) -> str:
    if not coeffs:
        return "0"
    parts = []
    for v, a in coeffs.items():
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_num(abs(a))} {v}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_model(model: IntegerModel) -> str:
    lines = [f"\\ {model.name}", "Maximize" if model.objective_sense == "max" else "Minimize"]
    lines.append(f" obj: {_expr(model.objective)}")
    lines.append("Subject To")
    for c in model.constraints:
        lines.append(f" {c.name}: {_expr(c.coeffs)} {c.sense} {_num(c.rhs)}")
    lines.append("Bounds")
    for v in model.variables.values():
        lines.append(f" {v.lb} <= {v.name} <= {v.ub}")
    for v in model.external.values():
        lines.append(f"\\ linked {v.kind} {v.lb} {v.ub} {v.name}")
    lines.append("Binaries")
    for v in model.variables.values():
        if v.kind == "binary":
            lines.append(f" {v.name}")
    lines.append("Generals")
    for v in model.variables.values():
        if v.kind == "integer":
            lines.append(f" {v.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-])?\s*([0-9.eE+-]+(?:inf)?)\s+([A-Za-z_][A-Za-z0-9_]*)")


def _parse_expr(text: str) -> dict:
    text = text.strip()
    if text == "0":
        return {}
    out = {}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse expression near {text[pos:]!r}")
        sign, num, var = m.groups()
        val = float(num) * (-1.0 if sign == "-" else 1.0)
        out[var] = out.get(var, 0.0) + val
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return out


def parse_model(text: str) -> IntegerModel:
    lines = [ln.rstrip() for ln in text.splitlines()]
    model = IntegerModel()
    section = None
    bounds, kinds, cons, obj = {}, {}, [], {}
    for ln in lines:
        s = ln.strip()
        if not s:
            continue
        if s.startswith("\\ linked "):
            kind, lo, hi, name = s.split()[2:]
            model.external[name] = Variable(name, kind, int(lo), int(hi))
            continue
        if s.startswith("\\"):
            model.name = s[1:].strip()
            continue
        if s in ("Minimize", "Maximize"):
            model.objective_sense = "min" if s == "Minimize" else "max"
            section = "obj"
            continue
        if s in ("Subject To", "Bounds", "Binaries", "Generals", "End"):
            section = s
            continue
        if section == "obj":
            obj = _parse_expr(s.split(":", 1)[1])
        elif section == "Subject To":
            name, rest = s.split(":", 1)
            m = re.match(r"(.*)\s(<=|>=|=)\s(\S+)$", rest.strip())
            cons.append((name.strip(), _parse_expr(m.group(1)), m.group(2), float(m.group(3))))
        elif section == "Bounds":
            lo, name, hi = re.match(r"(-?\d+)\s*<=\s*(\S+)\s*<=\s*(-?\d+)", s).groups()
            bounds[name] = (int(lo), int(hi))
        elif section == "Binaries":
            kinds[s] = "binary"
        elif section == "Generals":
            kinds[s] = "integer"
    for name, (lo, hi) in bounds.items():
        model.variables[name] = Variable(name, kinds.get(name, "integer"), lo, hi)
    for name, co, sense, rhs in cons:
        model.constraints.append(Constraint(name, co, sense, rhs))
    model.objective = obj
    return model


# -- exact enumeration ----------------------------------------------------

@dataclass
class CompiledModel:
    names: list
    lb: np.ndarray
    ub: np.ndarray
    obj: np.ndarray
    sign: float            # +1 for min, -1 for max (internally minimized)
    col_ptr: np.ndarray    # CSC structure: constraints touching each var
    col_row: np.ndarray
    col_val: np.ndarray
    sense: np.ndarray      # 0: <=, 1: >=, 2: =
    rhs: np.ndarray
    row_names: list


def compile_model(model: IntegerModel) -> CompiledModel:
    names = list(model.variables)
    index = {v: i for i, v in enumerate(names)}
    nv = len(names)
    lb = np.array([model.variables[v].lb for v in names], dtype=np.int64)
    ub = np.array([model.variables[v].ub for v in names], dtype=np.int64)
    sign = 1.0 if model.objective_sense == "min" else -1.0
    obj = np.zeros(nv)
    for v, a in model.objective.items():
        obj[index[v]] = sign * a
    cols = [[] for _ in range(nv)]
    for r, c in enumerate(model.constraints):
        for v, a in c.coeffs.items():
            cols[index[v]].append((r, a))
    ptr = np.zeros(nv + 1, dtype=np.int64)
    for i in range(nv):
        ptr[i + 1] = ptr[i] + len(cols[i])
    rows = np.array([r for col in cols for r, _ in col], dtype=np.int64)
    vals = np.array([a for col in cols for _, a in col], dtype=np.float64)
    sense = np.array([SENSES.index(c.sense) for c in model.constraints], dtype=np.int64)
    rhs = np.array([c.rhs for c in model.constraints], dtype=np.float64)
    return CompiledModel(names, lb, ub, obj, sign, ptr, rows, vals, sense, rhs,
                         [c.name for c in model.constraints])


@njit
def _enum_kernel(lb, ub, obj, ptr, rows, vals, sense, rhs, cutoff, node_limit):
    nv = lb.shape[0]
    m = rhs.shape[0]
    eps = 1e-9
    lo = np.zeros(m)
    hi = np.zeros(m)
    for v in range(nv):
        for q in range(ptr[v], ptr[v + 1]):
            a = vals[q]
            r = rows[q]
            if a >= 0:
                lo[r] += a * lb[v]
                hi[r] += a * ub[v]
            else:
                lo[r] += a * ub[v]
                hi[r] += a * lb[v]
    obj_lo = 0.0
    for v in range(nv):
        obj_lo += min(obj[v] * lb[v], obj[v] * ub[v])
    # initial feasibility of the all-free state
    for r in range(m):
        if sense[r] != 1 and lo[r] > rhs[r] + eps:
            return np.inf, lb.copy(), 0, False
        if sense[r] != 0 and hi[r] < rhs[r] - eps:
            return np.inf, lb.copy(), 0, False
    best = cutoff
    best_x = lb.copy()
    found = False
    x = lb.copy()
    nxt = lb.copy()          # next value to try per depth
    depth = 0
    nodes = 0
    cur = np.zeros(nv, dtype=np.int64)  # value currently applied per depth
    applied = np.zeros(nv, dtype=np.bool_)
    if nv == 0:
        if obj_lo < best - 1e-12:
            return obj_lo, best_x, 1, True
        return best, best_x, 1, False
    while depth >= 0:
        v = depth
        if applied[v]:
            # undo previous value at this depth
            val = cur[v]
            for q in range(ptr[v], ptr[v + 1]):
                a = vals[q]
                r = rows[q]
                if a >= 0:
                    lo[r] -= a * (val - lb[v])
                    hi[r] -= a * (val - ub[v])
                else:
                    lo[r] -= a * (val - ub[v])
                    hi[r] -= a * (val - lb[v])
            obj_lo -= obj[v] * val - min(obj[v] * lb[v], obj[v] * ub[v])
            applied[v] = False
        if nxt[v] > ub[v]:
            nxt[v] = lb[v]
            depth -= 1
            continue
        val = nxt[v]
        nxt[v] += 1
        nodes += 1
        if node_limit > 0 and nodes > node_limit:
            return best, best_x, nodes, found
        ok = True
        for q in range(ptr[v], ptr[v + 1]):
            a = vals[q]
            r = rows[q]
            if a >= 0:
                lo[r] += a * (val - lb[v])
                hi[r] += a * (val - ub[v])
            else:
                lo[r] += a * (val - ub[v])
                hi[r] += a * (val - lb[v])
            if sense[r] != 1 and lo[r] > rhs[r] + eps:
                ok = False
            if sense[r] != 0 and hi[r] < rhs[r] - eps:
                ok = False
        obj_lo += obj[v] * val - min(obj[v] * lb[v], obj[v] * ub[v])
        cur[v] = val
        applied[v] = True
        x[v] = val
        if not ok or obj_lo >= best - 1e-12:
            continue
        if depth == nv - 1:
            best = obj_lo
            best_x = x.copy()
            found = True
            continue
        depth += 1
    return best, best_x, nodes, found


@dataclass
class EnumResult:
    status: str            # optimal | infeasible | node_limit
    objective: Optional[float]
    assignment: Optional[dict]
    nodes: int


def solve_by_enumeration(model: IntegerModel, cutoff: float = np.inf, node_limit: int = 0) -> EnumResult:
    """Exact optimum of a small model by exhaustive search with pruning.

    cutoff (in the model's own objective sense) only reports solutions
    strictly better than it.
    """
    cm = compile_model(model)
    internal_cut = cm.sign * cutoff if np.isfinite(cutoff) else np.inf
    best, x, nodes, found = _enum_kernel(cm.lb, cm.ub, cm.obj, cm.col_ptr, cm.col_row,
                                         cm.col_val, cm.sense, cm.rhs, float(internal_cut),
                                         int(node_limit))
    if node_limit and nodes > node_limit:
        status = "node_limit"
    else:
        status = "optimal" if found else "infeasible"
    if not found:
        return EnumResult(status, None, None, int(nodes))
    assignment = {name: int(x[i]) for i, name in enumerate(cm.names)}
    return EnumResult(status, model.evaluate(assignment), assignment, int(nodes))


def enumerate_feasible(model: IntegerModel, limit: int = 100000):
    """All feasible assignments of a very small model (plain recursion)."""
    names = list(model.variables)
    out = []

    def rec(i, cur):
        if len(out) >= limit:
            return
        if i == len(names):
            if model.check(cur) is None:
                out.append(dict(cur))
            return
        v = model.variables[names[i]]
        for val in range(v.lb, v.ub + 1):
            cur[names[i]] = val
            rec(i + 1, cur)
        del cur[names[i]]

    rec(0, {})
    return out

"""Game data model: instances, orderings, plans, validity and types.

Conventions used throughout the package:
  * targets are addressed by 0-based array index (row of the matrix),
  * positions in an ordering are 1-based,
  * sensors inside a SensingPlan are 1-based (0/None means "not sensed").
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

INF = math.inf
TOL = 1e-9


class StructuralError(ValueError):
    """Inputs whose shapes or ranges do not fit together."""


def is_inf(tau) -> bool:
    return isinstance(tau, float) and math.isinf(tau)


def _norm_tau(tau):
    if isinstance(tau, str):
        if tau.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        tau = int(tau)
    if isinstance(tau, float):
        if math.isinf(tau) and tau > 0:
            return INF
        if not tau.is_integer():
            raise StructuralError(f"tau must be integral, got {tau}")
        tau = int(tau)
    tau = int(tau)
    if tau < 0:
        raise StructuralError("tau must be non-negative")
    return tau


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    k: int
    tau: Union[int, float]
    values: np.ndarray
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64).reshape(-1))
        matrix = np.asarray(self.matrix, dtype=np.uint8)
        if matrix.size == 0:
            matrix = matrix.reshape(int(self.n), int(self.k))
        if matrix.ndim != 2:
            raise StructuralError("matrix must be two dimensional")
        matrix = np.ascontiguousarray(matrix)
        n, k = int(self.n), int(self.k)
        if n < 0 or k < 0:
            raise StructuralError("n and k must be non-negative")
        if values.shape[0] != n:
            raise StructuralError(f"expected {n} values, got {values.shape[0]}")
        if matrix.shape != (n, k):
            raise StructuralError(f"matrix must be {n}x{k}, got {matrix.shape}")
        if np.any(matrix > 1):
            raise StructuralError("matrix entries must be 0 or 1")
        if np.any(~np.isfinite(values)) or np.any(values < 0):
            raise StructuralError("values must be finite and non-negative")
        values.setflags(write=False)
        matrix.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "tau", _norm_tau(self.tau))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "metadata", dict(self.metadata or {}))

    @property
    def tau_eff(self) -> int:
        """τ with the infinity sentinel replaced by n."""
        return self.n if is_inf(self.tau) else int(self.tau)

    @property
    def tau_window(self) -> int:
        """Largest τ that still matters: gaps never exceed n-1."""
        return max(0, min(self.tau_eff, self.n - 1))

    @property
    def total_value(self) -> float:
        return float(self.values.sum())

    def with_tau(self, tau) -> "Instance":
        return Instance(self.n, self.k, tau, self.values, self.matrix, self.metadata)

    def with_matrix(self, matrix) -> "Instance":
        matrix = np.asarray(matrix, dtype=np.uint8)
        return Instance(self.n, matrix.shape[1], self.tau, self.values, matrix, self.metadata)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.n == other.n and self.k == other.k and self.tau == other.tau
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.matrix, other.matrix)
                and self.metadata == other.metadata)

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "tau": "inf" if is_inf(self.tau) else int(self.tau),
            "values": [float(v) for v in self.values],
            "matrix": [[int(b) for b in row] for row in self.matrix],
            "metadata": _jsonable(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        n, k = int(d["n"]), int(d["k"])
        matrix = np.array(d["matrix"], dtype=np.uint8).reshape(n, k) if n * k else np.zeros((n, k), np.uint8)
        return cls(n, k, d["tau"], d["values"], matrix, d.get("metadata", {}))

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def load_instance(path) -> Instance:
    with open(path) as fh:
        return Instance.from_json(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(inst.to_json())
        fh.write("\n")


@dataclass(frozen=True, eq=False)
class TargetOrdering:
    """σ: positions[i] is the 1-based position of target i."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=np.int64).reshape(-1))
        n = pos.shape[0]
        seen = np.zeros(n + 1, dtype=bool)
        for p in pos:
            if p < 1 or p > n or seen[p]:
                raise StructuralError("positions must be a permutation of 1..n")
            seen[p] = True
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return int(self.positions.shape[0])

    @classmethod
    def identity(cls, n: int) -> "TargetOrdering":
        return cls(np.arange(1, n + 1))

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "TargetOrdering":
        """Build σ from σ^{-1}: order[p] is the 0-based target at position p+1."""
        order = np.asarray(order, dtype=np.int64).reshape(-1)
        pos = np.zeros(order.shape[0], dtype=np.int64)
        if order.shape[0] and (order.min() < 0 or order.max() >= order.shape[0]):
            raise StructuralError("order entries must be target indices 0..n-1")
        pos[order] = np.arange(1, order.shape[0] + 1)
        return cls(pos)

    def order(self) -> np.ndarray:
        """σ^{-1} as 0-based target indices, by increasing position."""
        out = np.empty(self.n, dtype=np.int64)
        out[self.positions - 1] = np.arange(self.n)
        return out

    def swapped(self, a: int, b: int) -> "TargetOrdering":
        pos = self.positions.copy()
        pos[a], pos[b] = pos[b], pos[a]
        return TargetOrdering(pos)

    def __eq__(self, other):
        if not isinstance(other, TargetOrdering):
            return NotImplemented
        return np.array_equal(self.positions, other.positions)

    def __hash__(self):
        return hash(self.positions.tobytes())

    def __repr__(self):
        return f"TargetOrdering({self.positions.tolist()})"


def parse_sigma(text: str, n: Optional[int] = None) -> TargetOrdering:
    """Parse "3,1,2" as a list of 1-based targets in passing order."""
    items = [int(x) for x in text.replace(" ", "").split(",") if x]
    if n is not None and len(items) != n:
        raise StructuralError(f"sigma has {len(items)} entries, expected {n}")
    return TargetOrdering.from_order([x - 1 for x in items])


@dataclass(frozen=True)
class SensingPlan:
    """ψ stored target-indexed: assignment[i] is a 1-based sensor or None."""

    assignment: tuple

    def __post_init__(self):
        fixed = []
        for a in self.assignment:
            if a is None:
                fixed.append(None)
                continue
            a = int(a)
            fixed.append(None if a == 0 else a)
        object.__setattr__(self, "assignment", tuple(fixed))

    @classmethod
    def empty(cls, n: int) -> "SensingPlan":
        return cls((None,) * n)

    @classmethod
    def from_array(cls, arr) -> "SensingPlan":
        """0 in the array means unsensed."""
        return cls(tuple(int(a) if a > 0 else None for a in np.asarray(arr).reshape(-1)))

    def to_array(self) -> np.ndarray:
        return np.array([a or 0 for a in self.assignment], dtype=np.int64)

    def by_sensor(self, k: int) -> dict:
        """The ψ: S → 2^T view (1-based sensor → sorted target indices)."""
        out = {j: [] for j in range(1, k + 1)}
        for i, a in enumerate(self.assignment):
            if a is not None:
                out.setdefault(a, []).append(i)
        return out

    def sensed(self) -> list:
        return [i for i, a in enumerate(self.assignment) if a is not None]

    def to_list(self) -> list:
        return list(self.assignment)


@dataclass(frozen=True)
class Valid:
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Invalid:
    reason: str              # "capability" or "recharge"
    pair: tuple              # (target, sensor) or (target, target)
    sensor: Optional[int] = None

    def __bool__(self):
        return False


def _check_dims(inst: Instance, sigma: Optional[TargetOrdering], psi: Optional[SensingPlan]):
    if sigma is not None and sigma.n != inst.n:
        raise StructuralError(f"ordering has {sigma.n} targets, instance has {inst.n}")
    if psi is not None:
        if len(psi.assignment) != inst.n:
            raise StructuralError(f"plan has {len(psi.assignment)} entries, instance has {inst.n}")
        for a in psi.assignment:
            if a is not None and not (1 <= a <= inst.k):
                raise StructuralError(f"sensor {a} out of range 1..{inst.k}")


def validate_plan(inst: Instance, sigma: TargetOrdering, psi: SensingPlan):
    """Valid() or Invalid(reason, first violated pair).

    Capability is checked first (targets by index); then recharge per
    sensor (sensors ascending, targets by position).
    """
    _check_dims(inst, sigma, psi)
    for i, a in enumerate(psi.assignment):
        if a is not None and inst.matrix[i, a - 1] == 0:
            return Invalid("capability", (i, a), a)
    tau = inst.tau_eff
    for j, targets in sorted(psi.by_sensor(inst.k).items()):
        if len(targets) < 2:
            continue
        ts = sorted(targets, key=lambda t: sigma.positions[t])
        for a, b in zip(ts, ts[1:]):
            if sigma.positions[b] - sigma.positions[a] <= tau:
                return Invalid("recharge", (a, b), j)
    return Valid()


def plan_value(inst: Instance, psi: SensingPlan) -> float:
    """Blue's utility: total value of the targets nobody senses."""
    _check_dims(inst, None, psi)
    mask = np.array([a is None for a in psi.assignment], dtype=bool)
    return float(inst.values[mask].sum()) if inst.n else 0.0


@dataclass(frozen=True)
class TypePartition:
    target_types: tuple      # tuple of tuples of 0-based target indices
    sensor_types: tuple      # tuple of tuples of 0-based sensor indices

    @property
    def n_chi(self) -> int:
        return len(self.target_types)

    @property
    def k_chi(self) -> int:
        return len(self.sensor_types)

    @property
    def target_counts(self) -> tuple:
        return tuple(len(c) for c in self.target_types)

    @property
    def sensor_counts(self) -> tuple:
        return tuple(len(c) for c in self.sensor_types)

    def sensor_type_of(self) -> np.ndarray:
        out = np.empty(sum(self.sensor_counts), dtype=np.int64)
        for t, cls in enumerate(self.sensor_types):
            out[list(cls)] = t
        return out

    def target_type_of(self) -> np.ndarray:
        out = np.empty(sum(self.target_counts), dtype=np.int64)
        for t, cls in enumerate(self.target_types):
            out[list(cls)] = t
        return out


def _group(keys) -> tuple:
    classes = {}
    for idx, key in enumerate(keys):
        classes.setdefault(key, []).append(idx)
    # dict keeps first-seen order, i.e. by smallest member
    return tuple(tuple(v) for v in classes.values())


def compute_types(inst: Instance) -> TypePartition:
    rows = [(inst.matrix[i].tobytes(), float(inst.values[i])) for i in range(inst.n)]
    cols = [inst.matrix[:, j].tobytes() for j in range(inst.k)]
    return TypePartition(_group(rows), _group(cols))


@dataclass
class SolveReport:
    value: float
    ordering: Optional[TargetOrdering]
    plan: Optional[SensingPlan]
    solver: str
    seed: Optional[int] = None
    seconds: float = 0.0
    counters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sigma": None if self.ordering is None else [int(t) + 1 for t in self.ordering.order()],
            "positions": None if self.ordering is None else self.ordering.positions.tolist(),
            "plan": None if self.plan is None else self.plan.to_list(),
            "solver": self.solver,
            "seed": self.seed,
            "seconds": self.seconds,
            "counters": _jsonable(self.counters),
        }

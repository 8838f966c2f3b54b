"""Naive reference implementations written straight from the game
definitions. They share no code with the package solvers."""
import itertools
import math

import numpy as np

from escape_sensing.core import INF, Instance, TargetOrdering
from escape_sensing.rng import SplitMix64, derive_seed

KINDS = ("default", "euclidean", "randomlevel", "append")


def small_instance(seed, n_range=(1, 6), k_range=(0, 3), taus=(0, 1, 2, 3, INF), p=None):
    r = SplitMix64(derive_seed("tests", seed), "small")
    n = n_range[0] + r.randbelow(n_range[1] - n_range[0] + 1)
    k = k_range[0] + r.randbelow(k_range[1] - k_range[0] + 1)
    tau = taus[r.randbelow(len(taus))]
    dens = p if p is not None else 0.2 + 0.6 * r.random()
    vals = [round(r.random(), 3) for _ in range(n)]
    if r.randbelow(3) == 0:
        vals = [1.0] * n     # many equal values -> large type classes
    D = [[1 if r.random() < dens else 0 for _ in range(k)] for _ in range(n)]
    return Instance(n, k, tau, np.array(vals), np.array(D, dtype=np.uint8).reshape(n, k))


def random_sigma(n, seed):
    return TargetOrdering.from_order(SplitMix64(derive_seed("tests-sigma", seed), "sigma").permutation(n))


def _gap(tau, n):
    return n if tau == INF else tau


def naive_valid(inst, positions, assign):
    """assign[i] = 0-based sensor or -1."""
    t = _gap(inst.tau, inst.n)
    for i, a in enumerate(assign):
        if a >= 0 and not inst.matrix[i, a]:
            return False
    for i in range(inst.n):
        for q in range(i + 1, inst.n):
            if assign[i] >= 0 and assign[i] == assign[q] and abs(positions[i] - positions[q]) <= t:
                return False
    return True


def naive_red(inst, positions):
    """Min surviving value over every assignment in {-1, 0..k-1}^n."""
    best = math.inf
    for assign in itertools.product(range(-1, inst.k), repeat=inst.n):
        if naive_valid(inst, positions, assign):
            v = sum(inst.values[i] for i in range(inst.n) if assign[i] < 0)
            best = min(best, v)
    return best


def naive_greedy(inst, positions):
    """Step-by-step pipeline: at step l, target at position p passes sensor
    j with p + j - 1 = l; it is sensed if unsensed, capable and ready."""
    n, k = inst.n, inst.k
    t = _gap(inst.tau, n)
    order = [0] * n
    for i, p in enumerate(positions):
        order[p - 1] = i
    last = [None] * k          # position of the last target each sensor sensed
    assign = [-1] * n
    for step in range(1, n + k):
        for j in range(k):
            p = step - j
            if not 1 <= p <= n:
                continue
            i = order[p - 1]
            if assign[i] >= 0 or not inst.matrix[i, j]:
                continue
            if last[j] is not None and p - last[j] <= t:
                continue
            assign[i] = j
            last[j] = p
    return sum(inst.values[i] for i in range(n) if assign[i] < 0), assign


def all_positions(n):
    for perm in itertools.permutations(range(1, n + 1)):
        yield perm


def naive_blue(inst):
    return max(naive_greedy(inst, p)[0] for p in all_positions(inst.n))


def naive_stackelberg(inst):
    return max(naive_red(inst, p) for p in all_positions(inst.n))

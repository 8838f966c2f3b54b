"""Batch experiments: generator grid x solvers x replicas -> CSV.

Every solver in a cell sees the same instance per replica; the instance
seed is derive_seed(master_seed, cell_id, replica), so reordering the grid
does not change any instance.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .core import INF, _norm_tau
from .generators import GeneratorConfig, generate
from .noncoord import best_blue_bruteforce, best_blue_dp, sa_blue
from .rng import derive_seed
from .stackelberg import random_baseline, sa_stackelberg, stackelberg_bruteforce

CSV_COLUMNS = ["cell_id", "n", "k", "tau", "generator", "solver", "mean_utility", "std_utility",
               "mean_seconds", "std_seconds", "replicas"]
STD_NOTE = "# std columns use the sample standard deviation (ddof=1)"

SOLVERS = {
    # coordinated Red
    "opt": lambda inst, seed: stackelberg_bruteforce(inst).value,
    "sa_relax": lambda inst, seed: sa_stackelberg(inst, "relax", seed).value,
    "sa_full": lambda inst, seed: sa_stackelberg(inst, "full", seed).value,
    "random": lambda inst, seed: random_baseline(inst, 1, seed, "coordinated").value,
    "random2": lambda inst, seed: random_baseline(inst, 3000, seed, "coordinated").value,
    "random2_large": lambda inst, seed: random_baseline(inst, 3 * 10 ** 7, seed, "coordinated").value,
    # greedy Red
    "greedy_opt": lambda inst, seed: best_blue_bruteforce(inst)[0],
    "greedy_dp": lambda inst, seed: best_blue_dp(inst)[0],
    "greedy_sa_relax": lambda inst, seed: sa_blue(inst, "relax", seed).value,
    "greedy_sa_full": lambda inst, seed: sa_blue(inst, "full", seed).value,
    "greedy_random": lambda inst, seed: random_baseline(inst, 1, seed, "greedy").value,
    "greedy_random2": lambda inst, seed: random_baseline(inst, 1000, seed, "greedy").value,
    "greedy_random2_large": lambda inst, seed: random_baseline(inst, 5 * 10 ** 5, seed, "greedy").value,
}


@dataclass(frozen=True)
class Cell:
    generator: str
    n: int
    k: int
    tau: object = 2
    p: float = 0.2
    radius: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "tau", _norm_tau(self.tau))

    @property
    def cell_id(self) -> str:
        tau = "inf" if self.tau == INF else int(self.tau)
        extra = ""
        if self.generator == "default" and self.p != 0.2:
            extra = f"-p{self.p!r}"
        if self.generator == "euclidean" and self.radius != 0.3:
            extra = f"-r{self.radius!r}"
        return f"{self.generator}-n{self.n}-k{self.k}-tau{tau}{extra}"

    def instance(self, seed):
        return generate(GeneratorConfig(self.generator, self.n, self.k, self.tau, seed, p=self.p,
                                        radius=self.radius))


@dataclass
class ExperimentConfig:
    cells: list
    solvers: list
    replicas: int = 50
    master_seed: int = 0
    cell_budget: Optional[float] = None     # seconds per cell, None = unlimited
    name: str = "experiment"
    long_running: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if "preset" in d:
            cfg = PRESETS[d["preset"]]()
            for key in ("replicas", "master_seed", "cell_budget", "solvers"):
                if key in d:
                    setattr(cfg, key, d[key])
            return cfg
        cells = [Cell(c.get("generator", "default"), int(c["n"]), int(c["k"]), c.get("tau", 2),
                      float(c.get("p", 0.2)), float(c.get("radius", 0.3))) for c in d["cells"]]
        return cls(cells, list(d["solvers"]), int(d.get("replicas", 50)), int(d.get("master_seed", 0)),
                   d.get("cell_budget"), d.get("name", "experiment"), bool(d.get("long_running", False)))


@dataclass
class ResultRow:
    cell: Cell
    solver: str
    values: list           # per replica, replica order
    seconds: list
    complete: bool = True

    @property
    def mean_utility(self):
        return mean(self.values)

    @property
    def std_utility(self):
        return sample_std(self.values)


@dataclass
class ResultsTable:
    rows: list = field(default_factory=list)

    def row(self, cell_id, solver) -> ResultRow:
        for r in self.rows:
            if r.cell.cell_id == cell_id and r.solver == solver:
                return r
        raise KeyError((cell_id, solver))

    def to_csv(self, timings: bool = True) -> str:
        buf = io.StringIO()
        buf.write(STD_NOTE + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            c = r.cell
            tau = "inf" if c.tau == INF else int(c.tau)
            secs = [repr(mean(r.seconds)), repr(sample_std(r.seconds))] if timings else ["", ""]
            w.writerow([c.cell_id, c.n, c.k, tau, c.generator, r.solver, repr(r.mean_utility),
                        repr(r.std_utility)] + secs + [len(r.values)])
        return buf.getvalue()


def mean(xs) -> float:
    xs = list(xs)
    if not xs:
        return float("nan")
    return math.fsum(xs) / len(xs)


def sample_std(xs) -> float:
    xs = list(xs)
    if len(xs) < 2:
        return 0.0
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def _threads():
    try:
        return max(1, int(os.environ.get("ESG_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, progress=None) -> ResultsTable:
    for s in cfg.solvers:
        if s not in SOLVERS:
            raise KeyError(f"unknown solver {s!r}")
    table = ResultsTable()
    threads = _threads()
    for cell in cfg.cells:
        cid = cell.cell_id
        start = time.perf_counter()
        per = {s: ([], []) for s in cfg.solvers}
        complete = True

        def job(rep):
            inst = cell.instance(derive_seed(cfg.master_seed, cid, rep))
            out = {}
            for s in cfg.solvers:
                t0 = time.perf_counter()
                v = SOLVERS[s](inst, derive_seed(cfg.master_seed, cid, rep, s))
                out[s] = (float(v), time.perf_counter() - t0)
            return rep, out

        results = []
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for res in pool.map(job, range(cfg.replicas)):
                    results.append(res)
                    if cfg.cell_budget is not None and time.perf_counter() - start > cfg.cell_budget:
                        complete = False
                        break
        else:
            for rep in range(cfg.replicas):
                results.append(job(rep))
                if cfg.cell_budget is not None and time.perf_counter() - start > cfg.cell_budget \
                        and rep + 1 < cfg.replicas:
                    complete = False
                    break
        results.sort(key=lambda r: r[0])
        for rep, out in results:
            for s in cfg.solvers:
                per[s][0].append(out[s][0])
                per[s][1].append(out[s][1])
        if cfg.replicas == 0:
            continue
        for s in cfg.solvers:
            table.rows.append(ResultRow(cell, s, per[s][0], per[s][1], complete))
        if progress:
            progress(cid)
    return table


@dataclass
class PairedSummary:
    cell_id: str
    mean_diff: float
    a_wins: int
    ties: int
    b_wins: int


def paired_compare(table: ResultsTable, a: str, b: str, tol: float = 1e-9) -> list:
    out = []
    cells = []
    for r in table.rows:
        if r.cell.cell_id not in cells:
            cells.append(r.cell.cell_id)
    for cid in cells:
        ra, rb = table.row(cid, a), table.row(cid, b)
        if len(ra.values) != len(rb.values):
            raise ValueError(f"unmatched replica sets in cell {cid}")
        diffs = [x - y for x, y in zip(ra.values, rb.values)]
        out.append(PairedSummary(cid, mean(diffs), sum(d > tol for d in diffs),
                                 sum(abs(d) <= tol for d in diffs), sum(d < -tol for d in diffs)))
    return out


def _grid(n, ks, tau=2, gen="default"):
    return [Cell(gen, n, k, tau) for k in ks]


PRESETS = {
    "table1": lambda: ExperimentConfig(_grid(5, (2, 3, 5)), ["opt"], name="table1"),
    "table5": lambda: ExperimentConfig(_grid(5, (2, 3, 5)), ["greedy_opt"], name="table5"),
    "gap": lambda: ExperimentConfig(_grid(5, (2, 3, 5)), ["greedy_opt", "opt"], name="gap"),
    "table2": lambda: ExperimentConfig(_grid(7, (3,)), ["opt", "sa_relax", "sa_full", "random", "random2"],
                                       name="table2"),
    "table6": lambda: ExperimentConfig(_grid(10, (5,)), ["greedy_opt", "greedy_sa_relax", "greedy_random2"],
                                       name="table6"),
    "settings": lambda: ExperimentConfig(
        [Cell(g, 7, 3, 2) for g in ("default", "euclidean", "randomlevel", "append")],
        ["opt", "sa_relax", "random2"], replicas=9, name="settings"),
    # full-size grids (9 instances each); hours of compute, never part of the test suite
    "large": lambda: ExperimentConfig(_grid(75, (10,), tau=5), ["sa_relax", "random2_large"], replicas=9,
                                            name="large", long_running=True),
    "large_greedy": lambda: ExperimentConfig(_grid(75, (10,), tau=5),
                                                   ["greedy_sa_relax", "greedy_random2_large"], replicas=9,
                                                   name="large_greedy", long_running=True),
}


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))

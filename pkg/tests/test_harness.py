import math
import statistics

import pytest
from hypothesis import given, strategies as st

from escape_sensing.harness import (CSV_COLUMNS, Cell, ExperimentConfig, PRESETS, ResultRow, ResultsTable, mean,
                                    paired_compare, run_experiment, sample_std)


def small_cfg(replicas=6, solvers=("opt", "random", "greedy_opt")):
    return ExperimentConfig([Cell("default", 5, 2), Cell("euclidean", 4, 3, "inf")], list(solvers), replicas,
                            master_seed=7)


def test_csv_deterministic_and_columns():
    a = run_experiment(small_cfg()).to_csv(timings=False)
    b = run_experiment(small_cfg()).to_csv(timings=False)
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("#") and "ddof=1" in lines[0]
    assert lines[1].split(",") == CSV_COLUMNS
    assert len(lines) == 2 + 2 * 3


def test_grid_reordering_keeps_instances():
    cfg = small_cfg(solvers=("opt",))
    rev = ExperimentConfig(list(reversed(cfg.cells)), ["opt"], cfg.replicas, cfg.master_seed)
    a, b = run_experiment(cfg), run_experiment(rev)
    for cell in cfg.cells:
        assert a.row(cell.cell_id, "opt").values == b.row(cell.cell_id, "opt").values


def test_zero_replicas():
    assert run_experiment(small_cfg(replicas=0)).rows == []


def test_unknown_solver():
    with pytest.raises(KeyError):
        run_experiment(small_cfg(solvers=("nope",)))


def test_threads_do_not_change_results(monkeypatch):
    base = run_experiment(small_cfg()).to_csv(timings=False)
    monkeypatch.setenv("ESG_THREADS", "3")
    assert run_experiment(small_cfg()).to_csv(timings=False) == base


def test_cell_budget_marks_incomplete():
    cfg = small_cfg(replicas=5, solvers=("opt",))
    cfg.cell_budget = 0.0
    table = run_experiment(cfg)
    assert all(not r.complete and len(r.values) == 1 for r in table.rows)


@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=2, max_size=60))
def test_aggregation_matches_two_pass(xs):
    m = statistics.fmean(xs)
    assert mean(xs) == pytest.approx(m, rel=1e-12, abs=1e-12)
    ref = math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1))
    assert sample_std(xs) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_paired_compare():
    table = run_experiment(small_cfg())
    for s in paired_compare(table, "opt", "opt"):
        assert s.ties == 6 and s.a_wins == s.b_wins == 0 and s.mean_diff == 0
    for s in paired_compare(table, "opt", "random"):
        assert s.b_wins == 0
    for s in paired_compare(table, "greedy_opt", "opt"):
        assert s.b_wins == 0


def test_paired_compare_unmatched():
    c = Cell("default", 3, 1)
    t = ResultsTable([ResultRow(c, "a", [1, 2], [0, 0]), ResultRow(c, "b", [1], [0])])
    with pytest.raises(ValueError):
        paired_compare(t, "a", "b")


def test_table2_sa_relax_vs_random2():
    cfg = PRESETS["table2"]()
    cfg.solvers = ["sa_relax", "random2"]
    (s,) = paired_compare(run_experiment(cfg), "sa_relax", "random2")
    assert s.ties >= 45


def test_presets_and_config_loading(tmp_path):
    cfg = ExperimentConfig.from_dict({"preset": "table1", "replicas": 3})
    assert cfg.replicas == 3 and [c.k for c in cfg.cells] == [2, 3, 5]
    assert PRESETS["large"]().long_running
    d = {"cells": [{"generator": "append", "n": 4, "k": 2, "tau": "inf"}], "solvers": ["greedy_dp"], "replicas": 2}
    cfg = ExperimentConfig.from_dict(d)
    assert cfg.cells[0].cell_id == "append-n4-k2-tauinf"
    assert len(run_experiment(cfg).rows[0].values) == 2

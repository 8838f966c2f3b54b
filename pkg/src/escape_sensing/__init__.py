"""Solvers for Escape Sensing Games."""
from .core import (INF, Instance, TargetOrdering, SensingPlan, TypePartition, SolveReport, StructuralError,
                   Valid, Invalid, validate_plan, plan_value, compute_types, load_instance, save_instance)
from .generators import GeneratorConfig, generate
from .red_response import (best_red_bruteforce, best_red_dp, greedy_red, build_red_ilp, export_model,
                           RedOracle, BudgetExceeded)
from .noncoord import (simulate_greedy, best_blue_bruteforce, best_blue_dp, best_blue_unlimited, build_blue_ilp,
                       check_blue_ilp, sa_blue, Schedule)
from .stackelberg import (stackelberg_bruteforce, build_bilevel, check_bilevel, sa_stackelberg, random_baseline,
                          coordination_gap)
from .reductions import reduce_hitting_set, reduce_restricted_3sat
from .harness import ExperimentConfig, run_experiment, paired_compare

__version__ = "0.1.0"

"""Command line front end: `esg <subcommand> ...` (also `python -m escape_sensing`)."""
from __future__ import annotations

import argparse
import json
import os
import sys

from .core import load_instance, save_instance, parse_sigma, SolveReport
from .generators import GeneratorConfig, generate
from .harness import load_config, run_experiment
from .noncoord import (Schedule, best_blue_bruteforce, best_blue_dp, best_blue_unlimited, build_blue_ilp,
                       sa_blue, simulate_greedy)
from .red_response import (DEFAULT_BUDGET, best_red_bruteforce, best_red_dp, build_red_ilp, export_model,
                           greedy_red, solve_red_ilp)
from .reductions import reduce_hitting_set, reduce_restricted_3sat
from .stackelberg import (build_bilevel, coordination_gap, random_baseline, sa_stackelberg,
                          stackelberg_bruteforce)


def _dump(obj):
    print(json.dumps(obj, sort_keys=True))


def _schedule(a):
    return Schedule(a.t0, a.cool, a.floor, a.restarts)


def cmd_gen(a):
    cfg = GeneratorConfig(a.kind, a.n, a.k, a.tau, a.seed, p=a.p, radius=a.radius)
    inst = generate(cfg)
    if a.out:
        save_instance(inst, a.out)
    else:
        print(inst.to_json())


def cmd_solve_red(a):
    inst = load_instance(a.instance)
    sigma = parse_sigma(a.sigma, inst.n)
    solver = a.solver
    if solver == "dp":
        value, plan = best_red_dp(inst, sigma, budget=a.budget, typed=not a.untyped)
    elif solver == "brute":
        value, plan = best_red_bruteforce(inst, sigma)
    elif solver == "ilp":
        value, plan = solve_red_ilp(inst, sigma)
    elif solver.startswith("greedy:"):
        value, plan = greedy_red(inst, sigma, solver.split(":", 1)[1], a.seed)
    else:
        raise SystemExit(f"unknown solver {solver}")
    _dump({"value": value, "plan": plan.to_list()})


def cmd_solve_blue(a):
    inst = load_instance(a.instance)
    s = a.solver
    if s in ("brute", "dp", "unlimited"):
        fn = {"brute": best_blue_bruteforce, "dp": best_blue_dp, "unlimited": best_blue_unlimited}[s]
        value, sigma = fn(inst)
        _, plan = simulate_greedy(inst, sigma)
        rep = SolveReport(value, sigma, plan, s)
    elif s in ("sa:relax", "sa:full"):
        rep = sa_blue(inst, s.split(":")[1], a.seed, _schedule(a), paper_exact=a.paper_exact,
                      always_move=a.always_move)
    elif s.startswith("random"):
        rep = random_baseline(inst, a.samples or 1000, a.seed, "greedy")
    else:
        raise SystemExit(f"unknown solver {s}")
    _dump(rep.to_dict())


def cmd_stackelberg(a):
    inst = load_instance(a.instance)
    s = a.solver
    if s == "brute":
        rep = stackelberg_bruteforce(inst)
    elif s in ("sa:relax", "sa:full"):
        rep = sa_stackelberg(inst, s.split(":")[1], a.seed, _schedule(a), mu=a.mu, paper_exact=a.paper_exact,
                             always_move=a.always_move)
    elif s.startswith("random"):
        rep = random_baseline(inst, a.samples or 3000, a.seed, "coordinated")
    else:
        raise SystemExit(f"unknown solver {s}")
    _dump(rep.to_dict())


def cmd_gap(a):
    inst = load_instance(a.instance)
    if a.heuristic:
        res = coordination_gap(inst, "sa:relax", "sa:relax", a.seed)
    else:
        res = coordination_gap(inst, "brute", "brute", a.seed)
    _dump({"v_greedy": res.v_greedy, "v_coord": res.v_coord, "gap": res.gap, "consistent": res.consistent})
    if not res.consistent:
        print("warning: greedy utility below coordinated utility (solver inconsistency)", file=sys.stderr)


def cmd_reduce(a):
    with open(a.input) as fh:
        prob = json.load(fh)
    if a.kind == "hitting-set":
        red = reduce_hitting_set(prob["universe"], prob["sets"], int(prob["t"]))
        inst = red.instance
        inst.metadata["sigma"] = [int(t) + 1 for t in red.sigma.order()]
        inst.metadata["threshold"] = red.threshold
    else:
        red = reduce_restricted_3sat(int(prob["num_vars"]), prob["clauses"], prob.get("order", "construction"))
        inst = red.instance
        inst.metadata["threshold"] = red.threshold
    save_instance(inst, a.out)


def cmd_experiment(a):
    cfg = load_config(a.config)
    table = run_experiment(cfg)
    text = table.to_csv(timings=not a.no_timings)
    if a.out:
        with open(a.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_export(a):
    inst = load_instance(a.instance)
    if a.model == "red":
        print(export_model(build_red_ilp(inst, parse_sigma(a.sigma, inst.n))), end="")
    elif a.model == "blue":
        print(export_model(build_blue_ilp(inst)), end="")
    else:
        outer, inner, _ = build_bilevel(inst)
        print(export_model(outer), end="")
        print(export_model(inner), end="")


def _add_sa(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t0", type=float, default=100.0)
    p.add_argument("--cool", type=float, default=0.9)
    p.add_argument("--floor", type=float, default=1e-5)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--paper-exact", action="store_true", help="report the final state instead of best seen")
    p.add_argument("--always-move", action="store_true", help="skip the Metropolis test")
    p.add_argument("--samples", type=int, default=None, help="orderings for random baselines")


def build_parser():
    ap = argparse.ArgumentParser(prog="esg", description="Escape Sensing Game solvers")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--kind", required=True, choices=["default", "euclidean", "randomlevel", "append"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tau", default="2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("solve-red", help="Best Red Response for a fixed ordering")
    p.add_argument("--instance", required=True)
    p.add_argument("--sigma", required=True, help="1-based targets in passing order, e.g. 3,1,2")
    p.add_argument("--solver", default="dp", help="dp | brute | ilp | greedy:<random|remaining_value|harm>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--untyped", action="store_true", help="one DP type per sensor")
    p.set_defaults(fn=cmd_solve_red)

    p = sub.add_parser("solve-blue-greedy", help="Best Blue Response against greedy sensors")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", default="dp", help="brute | dp | unlimited | sa:relax | sa:full | random")
    _add_sa(p)
    p.set_defaults(fn=cmd_solve_blue)

    p = sub.add_parser("stackelberg", help="Blue-leader equilibrium against coordinated Red")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", default="brute", help="brute | sa:relax | sa:full | random")
    p.add_argument("--mu", type=float, default=0.1)
    _add_sa(p)
    p.set_defaults(fn=cmd_stackelberg)

    p = sub.add_parser("gap", help="coordination gap on one instance")
    p.add_argument("--instance", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", default=True)
    g.add_argument("--heuristic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gap)

    p = sub.add_parser("reduce", help="build an instance from a hardness reduction")
    p.add_argument("--kind", required=True, choices=["hitting-set", "r3sat"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("experiment", help="run an experiment grid and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--no-timings", action="store_true", help="leave wall-time columns empty (byte-stable output)")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("export-ilp", help="print an integer model in LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--model", choices=["red", "blue", "bilevel"], default="red")
    p.add_argument("--sigma")
    p.set_defaults(fn=cmd_export)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except BrokenPipeError:
        # output piped into e.g. `head`; silence the flush at exit too
        sys.stdout = open(os.devnull, "w")
    return 0


if __name__ == "__main__":
    sys.exit(main())

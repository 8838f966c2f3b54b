"""Compare the numba kernels with the ESG_DISABLE_NUMBA=1 fallback.

Each backend runs in its own interpreter (the switch is read at import).
The first call per kernel is a warm-up and excluded from the timings.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r'''
import json, sys, time
from escape_sensing import _accel
from escape_sensing.core import TargetOrdering
from escape_sensing.generators import generate_kind
from escape_sensing.noncoord import best_blue_bruteforce, simulate_greedy
from escape_sensing.red_response import best_red_dp, solve_red_ilp
from escape_sensing.stackelberg import stackelberg_bruteforce

repeat, quick = int(sys.argv[1]), sys.argv[2] == "1"
big = generate_kind("default", 200 if quick else 400, 6, 3, seed=1, p=0.3)
sig = TargetOrdering.identity(big.n)
st = generate_kind("default", 6 if quick else 7, 3, 2, seed=2)
bb = generate_kind("default", 7 if quick else 8, 4, 2, seed=3)
ilp = generate_kind("default", 5, 2, 1, seed=4, p=0.6)
orders = [TargetOrdering.identity(60).swapped(i, 59 - i) for i in range(30)]
sim = generate_kind("default", 60, 10, 3, seed=5)

cases = {
    "red_dp_dense": lambda: best_red_dp(big, sig, typed=False, backend="dense"),
    "stackelberg_enum": lambda: stackelberg_bruteforce(st),
    "blue_enum": lambda: best_blue_bruteforce(bb),
    "simulate_greedy_x30": lambda: [simulate_greedy(sim, o) for o in orders],
    "ilp_enumeration": lambda: solve_red_ilp(ilp, TargetOrdering.identity(5)),
}
out = {"backend": _accel.backend(), "times": {}}
for name, fn in cases.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out["times"][name] = best
print(json.dumps(out))
'''


def run(disable, repeat, quick):
    env = dict(os.environ)
    env.pop("ESG_DISABLE_NUMBA", None)
    if disable:
        env["ESG_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat), "1" if quick else "0"],
                          capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    t0 = time.perf_counter()
    jit = run(False, args.repeat, args.quick)
    py = run(True, args.repeat, args.quick)
    print(f"{'kernel':<22}{jit['backend']:>12}{py['backend']:>12}{'speedup':>10}")
    for name in jit["times"]:
        a, b = jit["times"][name], py["times"][name]
        print(f"{name:<22}{a:>11.4f}s{b:>11.4f}s{b / a:>9.1f}x")
    print(f"total wall {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()

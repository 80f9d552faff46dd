"""Time the first-return kernels with and without numba.

    python benchmarks/bench_walk.py [--trials N] [--horizon T] [--repeat R]

Both backends see the same random draws, so the return times are compared
as well as timed.
"""
import argparse
import time

import numpy as np

from linecomplex import _kernels
from linecomplex.explore import explore_ball, radial_profile
from linecomplex.rules import exp_rule, modular_rule
from linecomplex.type_criterion import counterexample_family


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(horizon):
    reach = horizon // 2 + 1
    for rule in (exp_rule(), modular_rule(), counterexample_family()):
        back = np.asarray(radial_profile(rule, reach).back_slots)
        yield f"radial {rule.name}", "radial", back, rule.q
    nbr = explore_ball(modular_rule(), 12).nbr
    yield "graph modular r=12", "graph", nbr, 3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--horizon", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or LINECOMPLEX_DISABLE_NUMBA set); timing numpy only")

    print(f"{'case':<26}{'numpy s':>10}{'numba s':>10}{'speedup':>10}  same")
    for label, kind, table, q in cases(args.horizon):
        start = np.zeros(args.trials, dtype=np.int64)

        def go(use):
            return _kernels.first_returns(kind, table, start, q, args.trials, args.horizon, 0, use)

        t_py, a = best_of(lambda: go(False), args.repeat)
        if _kernels.HAVE_NUMBA:
            go(True)  # warm-up: compile outside the timed runs
            t_nb, b = best_of(lambda: go(True), args.repeat)
            same = np.array_equal(a, b)
            print(f"{label:<26}{t_py:>10.3f}{t_nb:>10.3f}{t_py / t_nb:>10.1f}  {same}")
        else:
            print(f"{label:<26}{t_py:>10.3f}{'-':>10}{'-':>10}  -")


if __name__ == "__main__":
    main()

"""Benchmark the hot kernels: numba @njit loops vs the pure-numpy fallback.

Both implementation families are importable regardless of the selected
backend, so a single process can time them side by side.  Run with

    python3 benchmarks/bench_kernels.py [--quick]

The first njit call per kernel compiles (cached on disk); compilation is
excluded by a warmup call.
"""

import argparse
import time

import numpy as np

from lattice_recon import (WeightedSetRule, make_weighted_set, mirror_expand,
                           next_prime, project)
from lattice_recon._accel import HAVE_NUMBA
from lattice_recon import kernels as K


def timeit(fn, *args, repeat=5):
    fn(*args)  # warmup / compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller workload")
    args = parser.parse_args()

    if not HAVE_NUMBA:
        print("numba backend unavailable (or disabled via "
              "LATTICE_RECON_NUMBA=0); nothing to compare")
        return

    degree = 6 if args.quick else 8
    d = 4 if args.quick else 5
    L = make_weighted_set(WeightedSetRule("product", (1.0,) * d, degree), d)
    Ls = project(L, d, "full")
    rows, group_start = mirror_expand(Ls)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    mirror = rows.shape[0]
    n = next_prime(4 * mirror)
    rng = np.random.default_rng(0)
    z = np.asarray([1] + [int(v) for v in rng.integers(1, n, size=d - 1)],
                   dtype=np.int64)
    prefix = K._dot_mod_numpy(np.ascontiguousarray(rows[:, :-1]), z[:-1], n)
    last = rows[:, -1] % n

    print(f"workload: |L| = {len(L)}, |M(L)| = {mirror} rows, n = {n}")
    print(f"{'kernel':<24} {'numba':>10} {'numpy':>10} {'speedup':>8}")

    def row(name, loop_fn, numpy_fn, *fargs):
        t_loop = timeit(loop_fn, *fargs)
        t_numpy = timeit(numpy_fn, *fargs)
        print(f"{name:<24} {t_loop * 1e3:>9.2f}ms {t_numpy * 1e3:>9.2f}ms "
              f"{t_numpy / t_loop:>7.1f}x")

    row("dot_mod", K._dot_mod_loop, K._dot_mod_numpy, rows, z, n)

    res = K._dot_mod_numpy(rows, z, n)
    row("check_distinct", K._check_distinct_loop, K._check_distinct_numpy,
        res, n)
    row("check_plan_b", K._check_plan_b_loop, K._check_plan_b_numpy,
        res, group_start, n)
    row("check_plan_c", K._check_plan_c_loop, K._check_plan_c_numpy,
        res, group_start, n)

    # candidate scan: force a long search by starting right after a failure
    row("brute_force_step(B)", K._brute_force_step_loop,
        K._brute_force_step_numpy, prefix, last, group_start, n, 2, n,
        K.COND_PLAN_B)

    bad = np.zeros(n, dtype=bool)

    def bad_loop(p, l, nn):
        bad[:] = False
        K._mark_bad_generic_loop(p, l, nn, bad)

    def bad_numpy(p, l, nn):
        bad[:] = False
        K._mark_bad_generic_numpy(p, l, nn, bad)

    row("mark_bad_generic", bad_loop, bad_numpy, prefix, last, n)

    leads = np.ascontiguousarray(Ls.as_array(), dtype=np.int64)
    lead_prefix = K._dot_mod_numpy(
        np.ascontiguousarray(leads[:, :-1]), z[:-1], n)
    lead_last = leads[:, -1] % n
    counts = np.diff(group_start)
    mir_group = np.repeat(np.arange(len(Ls), dtype=np.int64), counts)

    def badc_loop():
        bad[:] = False
        K._mark_bad_plan_c_loop(lead_prefix, lead_last, prefix, last,
                                mir_group, n, bad)

    def badc_numpy():
        bad[:] = False
        K._mark_bad_plan_c_numpy(lead_prefix, lead_last, prefix, last,
                                 mir_group, n, bad)

    row("mark_bad_plan_c", badc_loop, badc_numpy)


if __name__ == "__main__":
    main()

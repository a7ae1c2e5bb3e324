#!/usr/bin/env python3
"""Benchmark the numba kernels against their numpy fallbacks.

Runs each hot kernel both ways on the same inputs and prints the per-call
times and speedup. The first numba call includes JIT compilation, so every
kernel is warmed before timing.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--repeats R]
"""

import argparse
import time

import numpy as np

from soc_cascade import names, rc, rt, topology
from soc_cascade.accel import HAVE_NUMBA
from soc_cascade.attack import AttackPlan
from soc_cascade.rng import uniform_array
from soc_cascade.synth import CapitalSpec, assign_capital, barabasi_albert


def timeit(fn, repeats):
    fn()  # warmup (includes JIT compile on the numba side)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not HAVE_NUMBA:
        print("numba is not importable; only the numpy fallback exists here")
        return

    net = assign_capital(
        barabasi_albert(args.nodes, 2, seed=1), CapitalSpec("pareto", 2, 50), seed=2
    )
    print(f"fixture: preferential-attachment graph, {net.n_nodes} nodes, "
          f"{net.n_edges} edges\n")
    rows = []

    vals = uniform_array(7, 0, np.arange(net.n_nodes))
    rows.append((
        "neighbor_sums",
        timeit(lambda: topology._neighbor_sums_jit(net.indptr, net.indices, vals),
               args.repeats * 20),
        timeit(lambda: topology._neighbor_sums_vec(net, vals), args.repeats * 20),
    ))

    rows.append((
        "all_pairs_bfs",
        timeit(lambda: topology._all_bfs_jit(net.indptr, net.indices), args.repeats),
        timeit(lambda: topology._all_bfs_vec(net), args.repeats),
    ))

    rows.append((
        "betweenness",
        timeit(lambda: topology._brandes_jit(net.indptr, net.indices), args.repeats),
        timeit(lambda: topology._brandes_vec(net), args.repeats),
    ))

    rows.append((
        "triangles",
        timeit(lambda: topology._triangles_jit(net.indptr, net.indices),
               args.repeats * 5),
        timeit(lambda: topology._triangles_vec(net), args.repeats * 5),
    ))

    rng = np.random.default_rng(3)
    words = [np.array([ord(c) for c in
                       "".join(rng.choice(list("abcdefgh"), size=12))],
                      dtype=np.int64) for _ in range(200)]

    def lev_all(impl):
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                impl(words[i], words[j])

    rows.append((
        "levenshtein (200 names)",
        timeit(lambda: lev_all(names._levenshtein_codes_jit), 1),
        timeit(lambda: lev_all(names._levenshtein_codes_numpy), 1),
    ))

    plan = AttackPlan(strategy="HDA", seed_fraction=0.02)
    cfg_rc = rc.RcConfig(max_steps=200, convergence_eps=1e-12)

    import soc_cascade.rc as rc_mod
    import soc_cascade.rt as rt_mod

    def rc_both(use):
        old = rc_mod.USE_NUMBA
        rc_mod.USE_NUMBA = use
        try:
            rc.rc_run(net, cfg_rc, plan)
        finally:
            rc_mod.USE_NUMBA = old

    rows.append((
        "rc_run (200 steps)",
        timeit(lambda: rc_both(True), args.repeats),
        timeit(lambda: rc_both(False), args.repeats),
    ))

    cfg_rt = rt.RtConfig(policy="random", delta_c=2.0, c_floor=0.3,
                         base_exposure=0.2, rng_seed=5)

    def rt_both(use):
        old = rt_mod.USE_NUMBA
        rt_mod.USE_NUMBA = use
        try:
            rt.rt_run(net, cfg_rt, plan)
        finally:
            rt_mod.USE_NUMBA = old

    rows.append((
        "rt_run (full cascade)",
        timeit(lambda: rt_both(True), args.repeats),
        timeit(lambda: rt_both(False), args.repeats),
    ))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, t_nb, t_np in rows:
        print(f"{label:<{width}}  {t_nb * 1e3:>8.2f}ms  {t_np * 1e3:>8.2f}ms  "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the scaled-integer kernels: numba (jit) vs numpy (vectorized).

Three hot paths are timed:
  * grid scan      - every profile of an n=3 price grid tested for
                     eps-equilibrium (the oracle behind uniqueness and PoA
                     measurements)
  * subset sums    - price totals over all 2^20 subsets (demand scans)
  * revenue table  - monopolist take r(S) for all 2^20 subsets

Run: python benchmarks/bench_backends.py [--repeat N]
The numba path needs one warm-up call per kernel to trigger compilation; the
warm-up is excluded from the timings.
"""

from __future__ import annotations

import argparse
import random
import time
from fractions import Fraction as F

import numpy as np

import pricegame._kernels as kernels
from pricegame import game, make_table, scan_max_gains
from pricegame.bitsets import items_of


def build_scan_game(n=3, den=8, seed=7):
    rng = random.Random(seed)
    table = [F(0)] * (1 << n)
    for s in range(1, 1 << n):
        table[s] = max(table[s ^ (1 << i)] for i in items_of(s)) + F(
            rng.randint(0, 3), den
        )
    v = make_table(n, table)
    costs = [F(rng.randint(0, 2), den) for _ in range(n)]
    return game(v, costs=costs)


def timed(fn, repeat):
    fn()  # warm up (numba compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = ["numpy"]
    if kernels.BACKEND == "numba":
        backends.insert(0, "numba")
    else:
        print("numba unavailable or disabled (PRICEGAME_BACKEND=numpy); "
              "timing the numpy fallback only")

    g = build_scan_game()
    step, cap = F(1, 64), F(2)
    gcount = int(cap / step) + 1
    print(f"\ngrid scan: n=3, {gcount}^3 = {gcount ** 3} profiles")
    results = {}
    for be in backends:
        dt = timed(
            lambda be=be: scan_max_gains(g, step, F(1, 64), cap, backend=be),
            args.repeat,
        )
        results[be] = dt
        print(f"  {be:<6} {dt * 1e3:9.1f} ms   "
              f"{gcount ** 3 / dt / 1e6:6.2f} Mprofiles/s")
    if len(results) == 2:
        print(f"  speedup numba/numpy: {results['numpy'] / results['numba']:.1f}x")

    n = 20
    prices_int = np.arange(1, n + 1, dtype=np.int64) * 1000
    print(f"\nsubset sums: 2^{n} = {1 << n} subsets")
    for be in backends:
        dt = timed(lambda be=be: kernels.subset_sums(prices_int, backend_name=be),
                   args.repeat)
        print(f"  {be:<6} {dt * 1e3:9.1f} ms")

    rng = random.Random(3)
    tab = np.zeros(1 << n, dtype=np.int64)
    for s in range(1, 1 << n):
        tab[s] = tab[s & (s - 1)] + rng.randint(0, 50)
    print(f"\nrevenue table: 2^{n} subsets")
    for be in backends:
        dt = timed(lambda be=be: kernels.revenue_table(tab, n, backend_name=be),
                   args.repeat)
        print(f"  {be:<6} {dt * 1e3:9.1f} ms")

    # both paths must agree exactly, bit for bit
    if len(backends) == 2:
        a = scan_max_gains(g, step, F(1, 64), cap, backend="numba")
        b = scan_max_gains(g, step, F(1, 64), cap, backend="numpy")
        assert all(np.array_equal(x, y) for x, y in zip(a[3:], b[3:]))
        assert np.array_equal(
            kernels.revenue_table(tab, n, backend_name="numba"),
            kernels.revenue_table(tab, n, backend_name="numpy"),
        )
        print("\nbackends agree bit for bit")


if __name__ == "__main__":
    main()

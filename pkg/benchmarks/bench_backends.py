#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Usage: python3 benchmarks/bench_backends.py [--quick]

Times the raw counter-based generator and the three mechanism hot
loops; reports throughput per backend and the native/python speedup.
Both backends produce identical streams, so this is a pure
implementation-strategy comparison (fused scalar loops vs vectorized
array passes).
"""

import argparse
import time

import numpy as np

from ldpgap import backends


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def make_cases(scale):
    n_rows = int(10**6 * scale)
    n_runs = int(5 * 10**4 * scale)
    groups = (np.arange(n_rows) % 2).astype(np.int64)
    values = np.linspace(-1.0, 1.0, n_rows)
    pop_g = np.repeat(np.arange(2, dtype=np.int64), 10)
    pop_v = np.linspace(-0.9, 0.9, 20)

    def philox(kern):
        kern.philox_raw(1, 2, 0, 0, 0, 0, n_rows)

    def perturb_r(kern):
        kern.perturb_r_batch(groups, values, 2, 0.73, 0.73, 7, 1, 0, 0)

    def perturb_l(kern):
        kern.perturb_l_batch(groups, values, 2, 0.73, 2.0, 1.0, 7, 1, 0, 0)

    def run_sums(kern):
        kern.run_sums_r(pop_g, pop_v, 2, 0.73, 0.73, 7, 1, 0, n_runs)

    return [
        ("philox blocks", philox, n_rows),
        ("perturb_r rows", perturb_r, n_rows),
        ("perturb_l rows", perturb_l, n_rows),
        ("run_sums_r records", run_sums, n_runs * 20),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="10x smaller sizes")
    args = parser.parse_args()

    names = backends.available()
    if "native" not in names:
        print("note: compiled extension unavailable; timing the fallback only")
    cases = make_cases(0.1 if args.quick else 1.0)

    print(f"{'case':<22}" + "".join(f"{n:>16}" for n in names) + f"{'speedup':>10}")
    for label, fn, units in cases:
        row = {}
        for name in names:
            kern = backends.get(name)
            dt = best_of(lambda: fn(kern))
            row[name] = units / dt
        cells = "".join(f"{row[n] / 1e6:>13.2f} M/s" for n in names)
        if "native" in row and "python" in row:
            cells += f"{row['native'] / row['python']:>9.1f}x"
        print(f"{label:<22}" + cells)


if __name__ == "__main__":
    main()

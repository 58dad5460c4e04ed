#!/usr/bin/env python3
"""Timing comparison of the compiled kernel core against the numpy fallback.

Times the three hot operations at representative problem sizes and prints a
table with the speed ratio.  The numpy pairwise path is BLAS-backed (GEMM
expansion) and wins on long feature dimensions; the compiled direct-sum
loops win on short rows and avoid the expansion's cancellation error.

    python3 benchmarks/bench_backends.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from hilbertconformal import _backend_np

try:
    from hilbertconformal import _native
except ImportError:
    _native = None

CASES = [
    # (label, n_rows_a, n_rows_b, n_features)
    ("scalar predictors", 1000, 1000, 1),
    ("scalar predictors, tall", 3000, 2000, 1),
    ("curves m=50", 1000, 1000, 50),
    ("quantile functions m=100", 500, 2000, 100),
]


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_case(label, na, nb, m, repeats):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(na, m))
    b = rng.normal(size=(nb, m))
    w = rng.uniform(0.5, 1.5, size=m)
    bank = rng.normal(size=nb)
    queries = rng.normal(size=na)
    sqd = _backend_np.pairwise_sq_dists(a, b, w)

    ops = {
        "pairwise_sq_dists": lambda impl: impl.pairwise_sq_dists(a, b, w),
        "gram_gaussian": lambda impl: impl.gram_gaussian(a, w, 1.0),
        "nw_cdf": lambda impl: impl.nw_cdf(sqd, 0.5, bank, queries),
    }
    rows = []
    for op_name, op in ops.items():
        t_np = best_of(lambda: op(_backend_np), repeats)
        if _native is not None:
            t_nat = best_of(lambda: op(_native), repeats)
            ratio = t_np / t_nat
            rows.append((label, op_name, t_nat * 1e3, t_np * 1e3, ratio))
        else:
            rows.append((label, op_name, float("nan"), t_np * 1e3, float("nan")))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _native is None:
        print("compiled core not built; timing the numpy fallback only\n")

    header = f"{'case':28s} {'operation':20s} {'native ms':>10s} {'numpy ms':>10s} {'numpy/native':>13s}"
    print(header)
    print("-" * len(header))
    for case in CASES:
        for label, op_name, t_nat, t_np, ratio in bench_case(*case, args.repeats):
            nat = f"{t_nat:10.2f}" if np.isfinite(t_nat) else "       n/a"
            rat = f"{ratio:13.2f}" if np.isfinite(ratio) else "          n/a"
            print(f"{label:28s} {op_name:20s} {nat} {t_np:10.2f} {rat}")


if __name__ == "__main__":
    main()

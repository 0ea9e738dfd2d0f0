"""Benchmark the compiled kernels against the numpy fallbacks.

Usage: python benchmarks/bench_kernels.py

Covers the two hot paths: the t-step orbit evolution (dominates the
Monte Carlo success-probability sweeps) and the O(D^2) pair-XOR count
behind the exact geometric term.
"""

from __future__ import annotations

import time

import numpy as np

from shormagic import _kernels_py, kernels


def _time(fn, *args, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_run_orbit() -> None:
    print("run_orbit: full circuit at depth t = 2*ceil(log2 r) + 3")
    print(f"{'r':>8} {'t':>4} {'compiled':>12} {'numpy':>12} {'speedup':>9}")
    rng = np.random.Generator(np.random.Philox(1))
    for r in (64, 256, 1024, 4096, 9324):
        t = 2 * int(np.ceil(np.log2(r))) + 3
        shifts = np.array([pow(2, t - tau, r) for tau in range(1, t + 1)], dtype=np.int64)
        u = rng.random(t)
        reps = max(3, 2000 // t)
        args = (r, shifts, u, None, False)

        def many(fn, n=reps):
            for _ in range(n):
                fn(*args)

        t_py = _time(many, _kernels_py.run_orbit) / reps
        if kernels.BACKEND == "cython":
            t_cy = _time(many, kernels.run_orbit) / reps
            print(f"{r:>8} {t:>4} {t_cy * 1e6:>10.1f}us {t_py * 1e6:>10.1f}us {t_py / t_cy:>8.1f}x")
        else:
            print(f"{r:>8} {t:>4} {'n/a':>12} {t_py * 1e6:>10.1f}us {'':>9}")


def bench_pair_lambda() -> None:
    print("\nxor_pair_lambda: O(D^2) pair count, width-16 strings")
    print(f"{'D':>8} {'compiled':>12} {'numpy':>12} {'speedup':>9}")
    rng = np.random.Generator(np.random.Philox(2))
    for D in (512, 2048, 8192, 18646):
        values = np.sort(rng.choice(1 << 16, size=D, replace=False)).astype(np.int64)
        t_py = _time(_kernels_py.xor_pair_lambda, values, 16, repeat=3)
        if kernels.BACKEND == "cython":
            t_cy = _time(kernels.xor_pair_lambda, values, 16, repeat=3)
            assert kernels.xor_pair_lambda(values, 16) == _kernels_py.xor_pair_lambda(values, 16)
            print(f"{D:>8} {t_cy * 1e3:>10.2f}ms {t_py * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")
        else:
            print(f"{D:>8} {'n/a':>12} {t_py * 1e3:>10.2f}ms {'':>9}")


if __name__ == "__main__":
    print(f"backend available: {kernels.BACKEND}\n")
    bench_run_orbit()
    bench_pair_lambda()

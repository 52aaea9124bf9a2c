#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py
The numba column includes a warm-up call so compilation time is excluded.
Select the runtime backend for the package itself with FEYNPAR_BACKEND=numpy.
"""

import time

import numpy as np

from feynpar.kernels import _count_zeros_mod_np, _eval_poly_batch_np


def timed(fn, *args, repeat=5):
    fn(*args)  # warm-up (JIT compile for numba)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    try:
        from numba import njit

        from feynpar.kernels import _count_zeros_mod_loop, _eval_poly_batch_loop

        numba_eval = njit(cache=True)(_eval_poly_batch_loop)
        numba_count = njit(cache=True)(_count_zeros_mod_loop)
        have_numba = True
    except ImportError:
        have_numba = False
        print("numba not importable: timing the numpy path only")

    rng = np.random.default_rng(0)
    rows = []

    # Batched polynomial evaluation: degree-4 polynomial in 3 variables.
    exps = rng.integers(0, 4, size=(12, 3)).astype(np.int64)
    coefs = rng.standard_normal(12)
    pts = rng.uniform(0.05, 1.0, size=(200_000, 3))
    t_np = timed(_eval_poly_batch_np, coefs, exps, pts)
    t_nb = timed(numba_eval, coefs, exps, pts) if have_numba else float("nan")
    rows.append(("eval_poly_batch (200k pts)", t_np, t_nb))

    # Finite-field point counting over F_7^6.
    fexps = rng.integers(0, 2, size=(8, 6)).astype(np.int64)
    fcoefs = rng.integers(1, 7, size=8).astype(np.int64)
    t_np = timed(_count_zeros_mod_np, fcoefs, fexps, 7, 6, repeat=3)
    t_nb = timed(numba_count, fcoefs, fexps, 7, 6, repeat=3) if have_numba else float("nan")
    rows.append(("count_zeros_mod (7^6 pts)", t_np, t_nb))

    print(f"{'kernel':<30}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, t_np, t_nb in rows:
        speed = t_np / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{name:<30}{t_np:>12.4f}{t_nb:>12.4f}{speed:>9.1f}x")


if __name__ == "__main__":
    main()

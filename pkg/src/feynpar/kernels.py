"""Numeric hot kernels: batched sparse-polynomial evaluation and finite-field
point counting.

Two interchangeable backends. The default uses numba's @njit; setting the
environment variable FEYNPAR_BACKEND=numpy (or numba being unimportable)
selects a pure-numpy path. Both produce identical results; see
benchmarks/bench_kernels.py for a speed comparison.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "eval_poly_batch",
    "count_zeros_mod",
    "pairwise_sum",
]


def _eval_poly_batch_np(coefs, exps, pts):
    # pts: (N, n) float64; exps: (T, n) int64; coefs: (T,) float64 -> (N,)
    out = np.zeros(pts.shape[0])
    for t in range(exps.shape[0]):
        term = np.full(pts.shape[0], coefs[t])
        for j in range(exps.shape[1]):
            e = exps[t, j]
            if e:
                term *= pts[:, j] ** e
        out += term
    return out


def _eval_poly_batch_loop(coefs, exps, pts):
    npts, nvar = pts.shape
    out = np.zeros(npts)
    for i in range(npts):
        acc = 0.0
        for t in range(exps.shape[0]):
            term = coefs[t]
            for j in range(nvar):
                e = exps[t, j]
                for _ in range(e):
                    term *= pts[i, j]
            acc += term
        out[i] = acc
    return out


def _count_zeros_mod_loop(coefs, exps, q, n):
    # coefs already reduced mod q; enumerates all q**n points by odometer.
    total = q**n
    point = np.zeros(n, dtype=np.int64)
    count = 0
    for _ in range(total):
        acc = 0
        for t in range(exps.shape[0]):
            term = coefs[t]
            for j in range(n):
                e = exps[t, j]
                for _ in range(e):
                    term = (term * point[j]) % q
            acc = (acc + term) % q
        if acc == 0:
            count += 1
        k = 0
        while k < n:
            point[k] += 1
            if point[k] < q:
                break
            point[k] = 0
            k += 1
    return count


def _count_zeros_mod_np(coefs, exps, q, n):
    total = q**n
    count = 0
    block = 1 << 16
    radix = q ** np.arange(n, dtype=np.int64)
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.int64)
        pts = (idx[:, None] // radix[None, :]) % q
        acc = np.zeros(len(idx), dtype=np.int64)
        for t in range(exps.shape[0]):
            term = np.full(len(idx), coefs[t], dtype=np.int64)
            for j in range(n):
                e = exps[t, j]
                for _ in range(e):
                    term = (term * pts[:, j]) % q
            acc = (acc + term) % q
        count += int(np.count_nonzero(acc == 0))
    return count


def _pairwise_sum_np(values):
    # Fixed reduction tree so accumulation order never depends on chunking.
    v = np.asarray(values, dtype=np.float64).copy()
    m = v.shape[0]
    if m == 0:
        return 0.0
    while m > 1:
        half = m // 2
        v[:half] += v[m - half : m]
        m = m - half
    return float(v[0])


def _want_numba():
    flag = os.environ.get("FEYNPAR_BACKEND", "auto").lower()
    if flag == "numpy":
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag == "numba":
            raise
        return False
    return True


if _want_numba():
    from numba import njit

    BACKEND = "numba"
    eval_poly_batch = njit(cache=True)(_eval_poly_batch_loop)
    count_zeros_mod = njit(cache=True)(_count_zeros_mod_loop)
else:
    BACKEND = "numpy"
    eval_poly_batch = _eval_poly_batch_np
    count_zeros_mod = _count_zeros_mod_np

pairwise_sum = _pairwise_sum_np

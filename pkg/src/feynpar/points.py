"""Brute-force point counts of hypersurfaces over small prime fields.

Deliberately dumb: enumerates every point so it can serve as an independent
oracle for the motivic sanity checks. Affine counts run over F_q^n, projective
counts over normalized representatives of P^{n-1}(F_q) (first nonzero
coordinate scaled to 1), which requires a homogeneous polynomial.
"""

from __future__ import annotations

from math import gcd

import numpy as np

from .kernels import count_zeros_mod
from .poly import MultiPoly, ZeroPolynomial


class TooLarge(ValueError):
    pass


def _is_prime(q):
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


def _reduce_mod(p: MultiPoly, q: int):
    """Clear denominators and reduce coefficients mod q (unit rescale is safe)."""
    coefs = []
    exps = []
    lcm = 1
    for _, c in p.terms.items():
        lcm = lcm * c.denominator // gcd(lcm, c.denominator)
    if lcm % q == 0:
        raise ValueError(f"coefficient denominators not invertible mod {q}")
    for exp, c in p.sorted_terms():
        v = (c.numerator * (lcm // c.denominator)) % q
        if v:
            coefs.append(v)
            exps.append(exp)
    return (
        np.array(coefs, dtype=np.int64),
        np.array(exps, dtype=np.int64).reshape(len(coefs), p.arity),
    )


def count_points(p: MultiPoly, q: int, projective: bool = False,
                 enumeration_cap: int = 2**24) -> int:
    """Number of zeros of p over F_q, affine or projective."""
    if p.is_zero():
        raise ZeroPolynomial("point count of the zero polynomial")
    if not _is_prime(q):
        raise ValueError(f"q = {q}: prime powers beyond primes are not supported")
    n = p.arity
    if q**n > enumeration_cap:
        raise TooLarge(f"q^n = {q**n} exceeds enumeration cap {enumeration_cap}")

    coefs, exps = _reduce_mod(p, q)
    if len(coefs) == 0:
        raise ZeroPolynomial(f"polynomial vanishes identically mod {q}")

    if not projective:
        return int(count_zeros_mod(coefs, exps, q, n))

    homog, _, _ = p.homogeneity()
    if not homog:
        raise ValueError("projective count needs a homogeneous polynomial")
    # Normalized representatives: leading coordinate 1, earlier ones 0.
    total = 0
    for lead in range(n):
        sub = _substitute_prefix(p, lead)
        if sub.is_zero():
            # The polynomial vanishes identically on this stratum.
            total += q ** (n - lead - 1)
            continue
        c2, e2 = _reduce_mod(sub, q)
        if len(c2) == 0:
            total += q ** (n - lead - 1)
            continue
        if sub.arity == 0:
            continue  # nonzero constant: no zeros on this stratum
        total += int(count_zeros_mod(c2, e2, q, sub.arity))
    return total


def _substitute_prefix(p: MultiPoly, lead: int):
    """Set t_1..t_{lead} = 0, t_{lead+1} = 1; keep the remaining variables."""
    rest = p.arity - lead - 1
    terms = {}
    for exp, c in p.terms.items():
        if any(exp[i] for i in range(lead)):
            continue
        key = tuple(exp[lead + 1 :])
        terms[key] = terms.get(key, 0) + c
    out = MultiPoly(rest, {k: v for k, v in terms.items() if v})
    return out


def count_points_naive(p: MultiPoly, q: int) -> int:
    """Independent affine evaluator (pure python, exact) for cross-checks."""
    from itertools import product

    count = 0
    for point in product(range(q), repeat=p.arity):
        acc = 0
        for exp, c in p.terms.items():
            term = c.numerator * pow(c.denominator, -1, q)
            for x, e in zip(point, exp):
                term = term * pow(x, e, q)
            acc = (acc + term) % q
        if acc % q == 0:
            count += 1
    return count

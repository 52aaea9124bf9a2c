"""Polynomial differential forms on A^n and their integrals over affine
simplex chains.

A PolyForm of degree k stores {increasing index tuple I: MultiPoly}; wedge,
exterior derivative, and contraction with the Euler vector field are exact
symbolic operations. Rational forms numerator/f^m integrate over affine
chains by constant-Jacobian pullback: on the chain sigma(x) = v0 + M x the
density is sum_I coeff_I(sigma(x)) det(M[I, :]).

Chains carry integer orientation weights; boundary() implements the standard
singular-simplex boundary operator, which is exactly what Stokes-based
identities need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import ArityMismatch, MultiPoly
from .quadrature import IntegrateOpts, integrate_over_simplices


class PolyForm:
    """Differential k-form with MultiPoly coefficients."""

    def __init__(self, arity: int, degree: int, coeffs=None):
        self.arity = arity
        self.degree = degree
        self.coeffs = {}
        if coeffs:
            for idx, p in coeffs.items():
                idx = tuple(idx)
                if len(idx) != degree or list(idx) != sorted(set(idx)):
                    raise ValueError(f"bad index tuple {idx}")
                if p.arity != arity:
                    raise ArityMismatch("coefficient arity mismatch")
                if not p.is_zero():
                    self.coeffs[idx] = p

    @classmethod
    def volume(cls, arity):
        """omega_n = dt_1 ^ ... ^ dt_n."""
        return cls(arity, arity, {tuple(range(arity)): MultiPoly.one(arity)})

    @classmethod
    def from_function(cls, p: MultiPoly):
        return cls(p.arity, 0, {(): p})

    @classmethod
    def d_coordinate(cls, arity, i):
        return cls(arity, 1, {(i,): MultiPoly.one(arity)})

    def scale_poly(self, p: MultiPoly):
        return PolyForm(
            self.arity, self.degree, {i: c * p for i, c in self.coeffs.items()}
        )

    def __add__(self, other):
        if self.degree != other.degree or self.arity != other.arity:
            raise ValueError("form degree/arity mismatch")
        coeffs = dict(self.coeffs)
        for idx, p in other.coeffs.items():
            coeffs[idx] = coeffs.get(idx, MultiPoly(self.arity)) + p
        return PolyForm(self.arity, self.degree, coeffs)

    def __neg__(self):
        return PolyForm(self.arity, self.degree, {i: -c for i, c in self.coeffs.items()})

    def wedge(self, other):
        if self.arity != other.arity:
            raise ArityMismatch("wedge of forms on different spaces")
        deg = self.degree + other.degree
        coeffs = {}
        for i1, c1 in self.coeffs.items():
            for i2, c2 in other.coeffs.items():
                if set(i1) & set(i2):
                    continue
                merged = i1 + i2
                idx = tuple(sorted(merged))
                sign = _perm_sign(merged)
                term = (c1 * c2).scale(sign)
                coeffs[idx] = coeffs.get(idx, MultiPoly(self.arity)) + term
        return PolyForm(self.arity, deg, coeffs)

    def d(self):
        """Exterior derivative."""
        coeffs = {}
        for idx, c in self.coeffs.items():
            for j in range(self.arity):
                if j in idx:
                    continue
                dc = c.partial(j)
                if dc.is_zero():
                    continue
                merged = (j,) + idx
                new_idx = tuple(sorted(merged))
                sign = _perm_sign(merged)
                coeffs[new_idx] = coeffs.get(new_idx, MultiPoly(self.arity)) + dc.scale(sign)
        return PolyForm(self.arity, self.degree + 1, coeffs)

    def contract_euler(self):
        """Delta: contraction with E = sum t_i d/dt_i (degree drops by one)."""
        coeffs = {}
        for idx, c in self.coeffs.items():
            for pos, i in enumerate(idx):
                rest = idx[:pos] + idx[pos + 1 :]
                term = (c * MultiPoly.variable(self.arity, i)).scale((-1) ** pos)
                coeffs[rest] = coeffs.get(rest, MultiPoly(self.arity)) + term
        return PolyForm(self.arity, self.degree - 1, coeffs)

    def is_closed(self):
        return not self.d().coeffs

    def __repr__(self):
        if not self.coeffs:
            return "PolyForm(0)"
        parts = [
            f"({c.pretty()}) dt{list(i)}" for i, c in sorted(self.coeffs.items())
        ]
        return "PolyForm(" + " + ".join(parts) + ")"


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


# -- affine chains ------------------------------------------------------------------


@dataclass
class AffineChain:
    """Weighted affine k-simplices in R^n: [(weight, vertex array (k+1, n))]."""

    pieces: list

    @classmethod
    def from_simplex(cls, vertices):
        return cls([(1, np.asarray(vertices, dtype=np.float64))])

    def dimension(self):
        return self.pieces[0][1].shape[0] - 1 if self.pieces else 0

    def boundary(self):
        out = []
        for weight, verts in self.pieces:
            m = verts.shape[0]
            for j in range(m):
                face = np.delete(verts, j, axis=0)
                out.append((weight * (-1) ** j, face))
        return AffineChain(out)


def integrate_rational_form(
    numerator: PolyForm,
    denominator: MultiPoly | None,
    power: int,
    chain: AffineChain,
    opts: IntegrateOpts | None = None,
):
    """Integral of numerator/denominator^power over the chain.

    The chain dimension must equal the form degree. Each piece pulls back
    through its affine parametrization; the signed minors of the Jacobian
    carry the orientation, the chain weight carries the boundary sign.
    Returns (value, error estimate, evaluations).
    """
    from .quadrature import ToleranceNotReached

    opts = opts or IntegrateOpts()
    k = numerator.degree
    total = 0.0
    err = 0.0
    evals = 0
    for weight, verts in chain.pieces:
        if verts.shape[0] - 1 != k:
            raise ValueError("chain dimension does not match form degree")
        if k == 0:
            pt = np.asarray(verts[0], dtype=np.float64)[None, :]
            val = _eval_density(numerator, denominator, power, None, pt)[0]
            total += weight * float(val)
            evals += 1
            continue
        v0 = np.asarray(verts[0], dtype=np.float64)
        mat = np.asarray(verts[1:] - verts[0], dtype=np.float64).T  # (n, k)
        minors = {
            idx: float(np.linalg.det(mat[list(idx), :])) for idx in numerator.coeffs
        }

        def density(x, v0=v0, mat=mat, minors=minors):
            pts = v0[None, :] + x @ mat.T
            return _eval_density(numerator, denominator, power, minors, pts)

        base = np.vstack([np.zeros((1, k)), np.eye(k)])  # parameter simplex
        try:
            res = integrate_over_simplices(density, [base], opts)
        except ToleranceNotReached as exc:
            res = exc.result
        total += weight * res.value
        err += abs(weight) * res.error_estimate
        evals += res.evaluations
    return total, err, evals


def _eval_density(numerator, denominator, power, minors, pts):
    acc = np.zeros(pts.shape[0])
    for idx, coeff in numerator.coeffs.items():
        vals = coeff.eval_float(pts)
        factor = 1.0 if minors is None else minors[idx]
        if factor:
            acc += vals * factor
    if denominator is not None and power:
        acc = acc / denominator.eval_float(pts) ** power
    return acc

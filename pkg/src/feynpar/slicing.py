"""Rational linear slices, singular points of restricted polynomials, Milnor
numbers, and the momentum-spanned subspace of the local Milnor algebra.

Slices are stored by exact integer normals (plus the generating seed) so
every run is reproducible byte for byte; the spanning basis is an exact
kernel. Only exact (rational) singular points are ever fed to the local
quotient machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import FeynmanGraph
from .groebner import (
    GRLEX,
    LEX,
    LocalQuotient,
    PolyIdeal,
    groebner_basis,
    ideal_dimension,
    local_milnor_dimension,
    quotient_dimension,
)
from .poly import ArityMismatch, MultiPoly
from .graph_poly import psi_polynomial


class CannotGenerate(RuntimeError):
    pass


class PositiveDimensional(ValueError):
    pass


class NotSingular(ValueError):
    pass


class RegimeViolation(ValueError):
    pass


# -- exact linear algebra helpers ---------------------------------------------


def frac_rref(rows):
    rows = [list(map(Fraction, r)) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def frac_kernel(rows, ncols):
    """Basis of the right kernel of the row space; exact."""
    rref, pivots = frac_rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for row, pc in zip(rref, pivots):
            vec[pc] = -row[fc]
        basis.append(vec)
    return basis


def frac_rank(rows):
    return len(frac_rref(rows)[0])


# -- linear slices ---------------------------------------------------------------


@dataclass(frozen=True)
class LinearSlice:
    ambient: int
    dim: int
    basis: tuple  # dim x ambient rows spanning the slice
    normals: tuple  # (ambient - dim) x ambient rows cutting it out
    seed: int | None = None

    def __post_init__(self):
        for xi in self.normals:
            for b in self.basis:
                if sum(x * y for x, y in zip(xi, b)) != 0:
                    raise ValueError("normals not orthogonal to basis")

    def canonical_key(self):
        rows = ";".join(
            ",".join(str(Fraction(x)) for x in row) for row in self.normals
        )
        return f"slice[{self.ambient}->{self.dim}|{rows}]"

    def contains_origin(self):
        return True  # homogeneous cutting: slices always pass through 0

    def serialize(self):
        return {
            "ambient": self.ambient,
            "dim": self.dim,
            "seed": self.seed,
            "normals": [[str(Fraction(x)) for x in row] for row in self.normals],
            "basis": [[str(Fraction(x)) for x in row] for row in self.basis],
        }

    @staticmethod
    def from_normals(normals, ambient, seed=None):
        rows = [tuple(Fraction(x) for x in row) for row in normals]
        basis = frac_kernel(rows, ambient)
        return LinearSlice(
            ambient, len(basis), tuple(tuple(b) for b in basis),
            tuple(rows), seed,
        )


def make_slice(n: int, k: int, seed: int) -> LinearSlice:
    """Deterministic pseudo-random slice: integer normals in [-9, 9]."""
    import random

    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = random.Random(seed)
    for _ in range(64):
        normals = [
            [Fraction(rng.randint(-9, 9)) for _ in range(n)] for _ in range(n - k)
        ]
        if frac_rank(normals) == n - k:
            return LinearSlice.from_normals(normals, n, seed)
    raise CannotGenerate(f"no full-rank normal frame after 64 draws (n={n}, k={k})")


def restrict(p: MultiPoly, s: LinearSlice) -> MultiPoly:
    """Restrict p to the slice: substitute t = sum_j u_j basis_j."""
    if p.arity != s.ambient:
        raise ArityMismatch(f"polynomial arity {p.arity} vs ambient {s.ambient}")
    images = []
    for j in range(s.ambient):
        terms = {}
        for i in range(s.dim):
            c = s.basis[i][j]
            if c:
                exp = [0] * s.dim
                exp[i] = 1
                terms[tuple(exp)] = c
        images.append(MultiPoly(s.dim, terms))
    return p.substitute(images)


def restrict_to_coordinates(s: LinearSlice, coord_subset) -> LinearSlice:
    """Intersect with the coordinate subspace of `coord_subset`, reindexed.

    The intersection of {<xi_i, t> = 0} with {t_j = 0, j not in S} is cut out
    inside A^S by the normals restricted to the S-columns.
    """
    cols = sorted(coord_subset)
    sub_normals = [[row[c] for c in cols] for row in s.normals]
    rref, pivots = frac_rref(sub_normals)
    return LinearSlice.from_normals(rref, len(cols), s.seed)


# -- singular locus ----------------------------------------------------------------


def singular_locus_system(g: FeynmanGraph) -> PolyIdeal:
    """Jacobian ideal of Psi_Gamma; generators are deletion-graph polynomials."""
    psi = psi_polynomial(g, "det")
    gens = [psi.partial(i) for i in range(g.n_edges)]
    return PolyIdeal(gens, GRLEX)


def verify_deletion_contraction(g: FeynmanGraph):
    """Check d(Psi)/dt_e = Psi of the e-deleted graph, edge by edge."""
    psi = psi_polynomial(g, "det")
    results = {}
    ids = set(g.edge_ids())
    for i, e in enumerate(g.internal_edges):
        deriv = psi.partial(i)
        if not g._is_connected(ids - {e.id}):
            results[e.id] = deriv.is_zero()
            continue
        deleted = g.delete_edge(e.id)
        psi_del = psi_polynomial(deleted, "trees")
        # The deleted graph keeps all original edge slots except e.
        keep = [j for j in range(g.n_edges) if j != i]
        embedded = MultiPoly(
            g.n_edges,
            {
                tuple(
                    exp[keep.index(j)] if j in keep else 0 for j in range(g.n_edges)
                ): c
                for exp, c in psi_del.terms.items()
            },
        )
        results[e.id] = deriv == embedded
    return results


def sing_codim(g: FeynmanGraph, max_arity: int = 8) -> int:
    """Codimension in A^n of the singular locus of the affine hypersurface.

    Empty singular locus gives codimension n (the slice-dimension cap is then
    unconstrained below the ambient dimension).
    """
    ideal = singular_locus_system(g)
    dim = ideal_dimension(PolyIdeal(ideal.generators + [psi_polynomial(g, "det")]),
                          max_arity=max_arity)
    if dim < 0:
        return g.n_edges
    return g.n_edges - dim


# -- singular points ------------------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    coords: tuple
    tag: str  # "exact" | "numeric"
    box_radius: float = 0.0

    def is_exact(self):
        return self.tag == "exact"


def _rational_roots(coeffs):
    """Rational roots of a univariate Fraction polynomial {deg: coeff}."""
    deg = max(coeffs)
    lead = coeffs[deg]
    low_deg = min(k for k, v in coeffs.items() if v)
    roots = set()
    if low_deg > 0:
        roots.add(Fraction(0))
    trailing = coeffs.get(low_deg)
    num = abs(trailing.numerator * lead.denominator)
    den = abs(lead.numerator * trailing.denominator)

    def divisors(x):
        out = set()
        d = 1
        while d * d <= x:
            if x % d == 0:
                out.update((d, x // d))
            d += 1
        return out

    for p in divisors(num) if num else {0}:
        for q in divisors(den) if den else {1}:
            for cand in (Fraction(p, q), Fraction(-p, q)):
                val = sum(c * cand**k for k, c in coeffs.items())
                if val == 0:
                    roots.add(cand)
    return sorted(roots)


def _solve_zero_dim(gens, max_arity=6):
    """All rational solutions of a zero-dimensional system by lex elimination.

    Returns (points, complete) where complete is False if non-rational
    branches were dropped (handled upstream by the numeric fallback).
    """
    arity = gens[0].arity
    if arity == 0:
        return ([()] if all(g.is_zero() for g in gens) else [], True)
    gb = groebner_basis(PolyIdeal(gens, LEX), max_arity=max_arity)
    if not gb.generators:
        return [tuple([Fraction(0)] * arity)], True  # zero ideal: everything; caller guards
    if any(g.is_constant() for g in gb.generators):
        return [], True
    # Univariate generator in the last variable (exists for zero-dim lex GB).
    uni = None
    for g in gb.generators:
        if all(all(e == 0 for e in exp[:-1]) for exp in g.terms):
            uni = g
            break
    if uni is None:
        raise PositiveDimensional("no univariate eliminant: system not zero-dimensional")
    coeffs = {exp[-1]: c for exp, c in uni.terms.items()}
    roots = _rational_roots(coeffs)
    complete = len(roots) == max(coeffs)  # accounting multiplicity-free bound
    points = []
    for r in roots:
        substituted = []
        for g in gens:
            img = [MultiPoly.variable(arity - 1, i) for i in range(arity - 1)]
            img.append(MultiPoly.constant(arity - 1, r))
            substituted.append(g.substitute(img))
        substituted = [g for g in substituted if not g.is_zero()]
        if not substituted:
            sub_points, sub_complete = [tuple([Fraction(0)] * (arity - 1))], True
        else:
            sub_points, sub_complete = _solve_zero_dim(substituted, max_arity)
        complete = complete and sub_complete
        points.extend(tuple(sp) + (r,) for sp in sub_points)
    return points, complete


def find_singular_points(f: MultiPoly, max_arity=3, newton_starts=40, seed=11):
    """Singular points of {f = 0}: solve all partials = 0.

    Homogeneous input is treated projectively: solutions are sought in every
    chart u_j = 1 (deduplicated by normalization) together with the affine
    cone point at the origin. Non-homogeneous input is solved affinely.
    Exact points come from lex elimination with rational root extraction;
    remaining candidates come from multi-start Newton iteration, tagged
    numeric with a residual box radius.
    """
    if f.arity > max_arity:
        raise ArityMismatch(f"arity {f.arity} exceeds cap {max_arity}")
    grads = [f.partial(i) for i in range(f.arity)]
    nonzero = [g for g in grads if not g.is_zero()]
    if not nonzero:
        raise PositiveDimensional("gradient identically zero")
    qdim = quotient_dimension(PolyIdeal(nonzero, GRLEX), max_arity=max_arity)
    if qdim == "infinite":
        raise PositiveDimensional("Jacobian ideal is positive-dimensional")

    homog = f.homogeneity()[0] and f.total_degree() >= 2
    points = []

    def push(coords):
        coords = tuple(Fraction(c) for c in coords)
        if all(g.eval(coords) == 0 for g in grads):
            if not any(p.coords == coords for p in points):
                points.append(SingularPoint(coords, "exact"))

    if homog:
        push([Fraction(0)] * f.arity)
        seen_proj = set()
        for chart in range(f.arity):
            imgs = []
            for j in range(f.arity):
                if j == chart:
                    imgs.append(MultiPoly.one(f.arity - 1))
                elif j < chart:
                    imgs.append(MultiPoly.variable(f.arity - 1, j))
                else:
                    imgs.append(MultiPoly.variable(f.arity - 1, j - 1))
            sys = [g.substitute(imgs) for g in grads]
            sys = [g for g in sys if not g.is_zero()]
            if not sys:
                continue
            if any(g.is_constant() for g in sys):
                continue
            try:
                sols, _ = _solve_zero_dim(sys, max_arity)
            except PositiveDimensional:
                continue
            for sol in sols:
                coords = list(sol[:chart]) + [Fraction(1)] + list(sol[chart:])
                # normalize projectively: first nonzero coordinate = 1
                first = next(i for i, c in enumerate(coords) if c)
                normed = tuple(c / coords[first] for c in coords)
                if normed not in seen_proj:
                    seen_proj.add(normed)
                    push(normed)
        return points

    sols, complete = _solve_zero_dim(nonzero, max_arity)
    for sol in sols:
        push(sol)
    if not complete:
        points.extend(
            _newton_candidates(grads, [p.coords for p in points], newton_starts, seed)
        )
    return points


def _newton_candidates(grads, known, starts, seed):
    rng = np.random.default_rng(seed)
    arity = grads[0].arity
    hess = [[g.partial(j) for j in range(arity)] for g in grads]
    found = []
    for _ in range(starts):
        x = rng.uniform(-2, 2, arity)
        for _ in range(60):
            gval = np.array([float(g.eval_float(x[None, :])[0]) for g in grads])
            hval = np.array(
                [[float(h.eval_float(x[None, :])[0]) for h in row] for row in hess]
            )
            try:
                step = np.linalg.solve(hval, gval)
            except np.linalg.LinAlgError:
                break
            x = x - step
            if np.linalg.norm(step) < 1e-14:
                break
        res = max(abs(float(g.eval_float(x[None, :])[0])) for g in grads)
        if res < 1e-10:
            # exact verification of a rational snap
            snapped = tuple(Fraction(v).limit_denominator(10**6) for v in x)
            if all(g.eval(snapped) == 0 for g in grads):
                if not any(np.allclose([float(c) for c in snapped],
                                       [float(c) for c in k]) for k in known):
                    known.append(snapped)
                    found.append(SingularPoint(snapped, "exact"))
                continue
            if not any(
                np.allclose(x, [float(c) for c in k.coords], atol=1e-8)
                for k in found
            ) and not any(
                np.allclose(x, [float(c) for c in k], atol=1e-8) for k in known
            ):
                found.append(
                    SingularPoint(tuple(float(v) for v in x), "numeric", 1e-8)
                )
    return found


# -- Milnor numbers ----------------------------------------------------------------


def milnor_number(f: MultiPoly, point, max_truncation=24):
    """Local Jacobian-quotient dimension at an exact singular point."""
    coords = tuple(Fraction(c) for c in point)
    grads = [f.partial(i) for i in range(f.arity)]
    if any(g.eval(coords) != 0 for g in grads):
        raise NotSingular(f"gradient nonzero at {coords}")
    shifted = [
        g.substitute(
            [
                MultiPoly.variable(f.arity, i) + MultiPoly.constant(f.arity, coords[i])
                for i in range(f.arity)
            ]
        )
        for g in grads
    ]
    return local_milnor_dimension(shifted, max_truncation=max_truncation)


@dataclass
class MilnorReport:
    restricted: MultiPoly
    slice_data: LinearSlice
    points: list
    milnor_numbers: list
    global_quotient_dim: object
    transversal: bool

    def to_json(self):
        return {
            "restricted": self.restricted.serialize(),
            "slice": self.slice_data.serialize(),
            "points": [
                {
                    "coords": [str(c) for c in p.coords]
                    if p.is_exact()
                    else [float(c) for c in p.coords],
                    "tag": p.tag,
                    "milnor_mu": str(mu),
                }
                for p, mu in zip(self.points, self.milnor_numbers)
            ],
            "global_quotient_dim": str(self.global_quotient_dim),
            "transversal": self.transversal,
        }


def milnor_report(g: FeynmanGraph, s: LinearSlice, reslice_seed=1234) -> MilnorReport:
    """Slice Psi_Gamma, find singular points, and collect local invariants.

    Transversality proxy: the restricted Jacobian ideal is zero-dimensional
    and the global quotient dimension is stable under one re-randomization of
    the slice.
    """
    psi = psi_polynomial(g, "det")
    f = restrict(psi, s)
    grads = [f.partial(i) for i in range(f.arity)]
    nz = [x for x in grads if not x.is_zero()]
    if not nz:
        raise PositiveDimensional("restricted polynomial has zero gradient")
    qdim = quotient_dimension(PolyIdeal(nz, GRLEX), max_arity=max(4, f.arity))
    transversal = qdim != "infinite"
    if transversal:
        s2 = make_slice(s.ambient, s.dim, reslice_seed)
        f2 = restrict(psi, s2)
        g2 = [f2.partial(i) for i in range(f2.arity)]
        g2 = [x for x in g2 if not x.is_zero()]
        q2 = quotient_dimension(PolyIdeal(g2, GRLEX), max_arity=max(4, f.arity)) if g2 else "infinite"
        transversal = q2 == qdim
    points = find_singular_points(f, max_arity=max(3, f.arity))
    mus = []
    for p in points:
        if p.is_exact():
            mus.append(milnor_number(f, p.coords))
        else:
            mus.append("not-computed(numeric point)")
    return MilnorReport(f, s, points, mus, qdim, transversal)


# -- Feynman subspace of the Milnor algebra ---------------------------------------


def _tree_factor_polynomials(g: FeynmanGraph, p_squared=Fraction(1)):
    """L_T(t) * prod_{e not in T} t_e for every spanning tree, two-leg mode."""
    from .graph_poly import _check_two_leg

    v1, v2 = _check_two_leg(g)
    n = g.n_edges
    t = MultiPoly.variables(n)
    out = []
    for tree in g.spanning_trees():
        tset = set(tree)
        path = g._tree_path(tset, v1, v2)
        lt = MultiPoly(n)
        for eid, _sign in path:
            lt = lt + t[g.edge_index(eid)]
        lt = lt.scale(p_squared)
        mono = MultiPoly.one(n)
        for i, e in enumerate(g.internal_edges):
            if e.id not in tset:
                mono = mono * t[i]
        out.append(lt * mono)
    return out


def feynman_subspace_dim(g: FeynmanGraph, s: LinearSlice, d_list,
                         point=None, p_squared=Fraction(1), max_truncation=24):
    """Rank of momentum-generated numerator classes inside the local quotient.

    For each spacetime dimension D (regime k - D*loops/2 <= 0), the products
    of r = -k + D*loops/2 tree factors restrict to the slice and reduce
    modulo the Jacobian ideal of the restricted Kirchhoff polynomial at the
    singular point; the rank of the reduced set is returned per D, with the
    surviving coordinate vectors as certificates.
    """
    from itertools import combinations_with_replacement

    ell = g.loop_number()
    k = s.dim
    psi = psi_polynomial(g, "det")
    f = restrict(psi, s)
    if point is None:
        point = tuple([Fraction(0)] * k)
    grads = [f.partial(i) for i in range(f.arity)]
    if any(gr.eval(point) != 0 for gr in grads):
        raise NotSingular("reference point is not singular on the slice")
    shifted = [
        gr.substitute(
            [
                MultiPoly.variable(k, i) + MultiPoly.constant(k, point[i])
                for i in range(k)
            ]
        )
        for gr in grads
    ]
    quotient = LocalQuotient(shifted, max_truncation=max_truncation)
    factors = _tree_factor_polynomials(g, p_squared)
    results = {}
    for d in d_list:
        if d % 2 or k - d * ell / 2 > 0:
            raise RegimeViolation(f"D={d}: need even D with k - D*loops/2 <= 0")
        r = -k + d * ell // 2
        vectors = []
        certificates = []
        for combo in combinations_with_replacement(range(len(factors)), r):
            h = MultiPoly.one(g.n_edges)
            for idx in combo:
                h = h * factors[idx]
            h_restricted = restrict(h, s)
            h_shift = h_restricted.substitute(
                [
                    MultiPoly.variable(k, i) + MultiPoly.constant(k, point[i])
                    for i in range(k)
                ]
            )
            vec = quotient.normal_form_vector(h_shift)
            if any(vec):
                vectors.append(vec)
                certificates.append(combo)
        rank = frac_rank(vectors) if vectors else 0
        results[d] = {
            "rank": rank,
            "quotient_dim": quotient.dimension,
            "tree_combos": certificates,
            "vectors": vectors,
        }
    return results

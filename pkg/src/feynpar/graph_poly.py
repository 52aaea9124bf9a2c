"""Graph polynomials and regime case tables.

Builds M_Gamma(t), the Kirchhoff polynomial (det and spanning-tree routes),
the cut-set polynomial with momentum coefficients, the reduced-Laplacian
quadratic form, the generic-condition certificate, and the (f, m, omega, h, C)
selection tables in the three inequality regimes.

Two momentum modes: `two-leg` treats p^2 as an extra exact indeterminate (the
configuration every tree reduces to), `gram` evaluates coefficients from an
exact Gram matrix of external momenta.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .graphs import FeynmanGraph
from .poly import MultiPoly, det_polynomial, poly_gcd


class MomentumNotConserved(ValueError):
    pass


class BadLegConfiguration(ValueError):
    pass


class OddDimension(ValueError):
    pass


class SingularAtPoint(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class MomentumData:
    """External momentum data: symbolic two-leg p^2 or an exact Gram matrix."""

    mode: str  # "two-leg" | "gram"
    p_squared: Fraction | None = None  # two-leg: value; None keeps p^2 symbolic
    labels: tuple = ()
    gram: tuple = ()  # tuple of tuples of Fraction
    mass_squared: Fraction = Fraction(0)

    @staticmethod
    def two_leg(p_squared=None, mass_squared=0):
        p2 = None if p_squared is None else Fraction(p_squared)
        return MomentumData("two-leg", p2, mass_squared=Fraction(mass_squared))

    @staticmethod
    def from_gram(labels, gram, mass_squared=0):
        g = tuple(tuple(Fraction(x) for x in row) for row in gram)
        if any(len(row) != len(labels) for row in g):
            raise ValueError("gram matrix shape mismatch")
        for i in range(len(labels)):
            for j in range(len(labels)):
                if g[i][j] != g[j][i]:
                    raise ValueError("gram matrix not symmetric")
        return MomentumData("gram", labels=tuple(labels), gram=g,
                            mass_squared=Fraction(mass_squared))

    def label_index(self, label):
        return self.labels.index(label)


def _leg_signs(g: FeynmanGraph):
    return [(leg.vertex,) + leg.signed_label() for leg in g.external_legs]


def _check_two_leg(g: FeynmanGraph):
    legs = _leg_signs(g)
    carriers = [(v, lab, s) for v, lab, s in legs]
    labs = {lab for _, lab, _ in carriers}
    if len(carriers) != 2 or len(labs) != 1:
        raise BadLegConfiguration("two-leg mode needs exactly two legs of one label")
    (v1, _, s1), (v2, _, s2) = carriers
    if s1 + s2 != 0:
        raise MomentumNotConserved("two-leg momenta must carry opposite signs")
    return v1 if s1 > 0 else v2, v2 if s1 > 0 else v1


def check_conservation(g: FeynmanGraph, mom: MomentumData):
    if mom.mode == "two-leg":
        _check_two_leg(g)
        return
    coeff = {lab: 0 for lab in mom.labels}
    for _, lab, s in _leg_signs(g):
        if lab not in coeff:
            raise BadLegConfiguration(f"leg label {lab} missing from gram data")
        coeff[lab] += s
    c = [coeff[lab] for lab in mom.labels]
    for row in mom.gram:
        if sum(r * x for r, x in zip(row, c)) != 0:
            raise MomentumNotConserved("gram matrix inconsistent with leg sum = 0")


def _vertex_momentum_coeffs(g: FeynmanGraph):
    """P_v as integer combinations of momentum labels, per vertex."""
    out = {v: {} for v in g.vertices}
    for v, lab, s in _leg_signs(g):
        out[v][lab] = out[v].get(lab, 0) + s
    return out


def _dot(mom: MomentumData, ca: dict, cb: dict):
    """Exact inner product of two label-combinations under the Gram matrix."""
    acc = Fraction(0)
    for la, xa in ca.items():
        for lb, xb in cb.items():
            acc += xa * xb * mom.gram[mom.label_index(la)][mom.label_index(lb)]
    return acc


# -- Kirchhoff / Symanzik -------------------------------------------------------


def kirchhoff_matrix(g: FeynmanGraph):
    """M_Gamma(t): loop-basis Gram matrix of the t-weighted circuit vectors."""
    eta = g.circuit_matrix()
    n = g.n_edges
    ell = g.loop_number()
    t = MultiPoly.variables(n)
    rows = []
    for k in range(ell):
        row = []
        for r in range(ell):
            acc = MultiPoly(n)
            for i in range(n):
                coef = eta[i][k] * eta[i][r]
                if coef:
                    acc = acc + t[i].scale(coef)
            row.append(acc)
        rows.append(row)
    return rows


def psi_polynomial(g: FeynmanGraph, method: str = "det") -> MultiPoly:
    """First Symanzik polynomial, via det M_Gamma or the spanning-tree sum."""
    n = g.n_edges
    if method == "det":
        m = kirchhoff_matrix(g)
        if not m:
            return MultiPoly.one(n)
        return det_polynomial(m)
    if method == "trees":
        t = MultiPoly.variables(n)
        acc = MultiPoly(n)
        for tree in g.spanning_trees():
            term = MultiPoly.one(n)
            tset = set(tree)
            for i, e in enumerate(g.internal_edges):
                if e.id not in tset:
                    term = term * t[i]
            acc = acc + term
        return acc
    raise ValueError(f"unknown method {method!r}")


def _cut_coefficient(g, mom, side_vertices):
    """s_C for the bipartition side `side_vertices` (exact)."""
    pv = _vertex_momentum_coeffs(g)
    combo = {}
    for v in side_vertices:
        for lab, x in pv[v].items():
            combo[lab] = combo.get(lab, 0) + x
    if mom.mode == "two-leg":
        c = sum(combo.values())  # single label
        return Fraction(c * c)  # units of p^2
    return _dot(mom, combo, combo)


def second_symanzik(g: FeynmanGraph, mom: MomentumData, method: str = "cutsets") -> MultiPoly:
    """P_Gamma(t, p) = sum over cut-sets of s_C prod_{e in C} t_e.

    In two-leg mode the result lives in Q[t, p2] with p2 as the last variable
    (unless mom.p_squared fixes it). The `trees` route enumerates cut-sets as
    complements of spanning trees joined with a path edge; pairs (T, e') that
    map to one cut-set are deduplicated, which reproduces the cut-set sum.
    """
    check_conservation(g, mom)
    n = g.n_edges
    symbolic = mom.mode == "two-leg" and mom.p_squared is None
    arity = n + 1 if symbolic else n

    def monomial(edge_ids, s_c):
        if not s_c:
            return MultiPoly(arity)
        exp = [0] * arity
        for eid in edge_ids:
            exp[g.edge_index(eid)] = 1
        if symbolic:
            exp[n] = 1  # degree in p^2
            return MultiPoly(arity, {tuple(exp): s_c})
        scale = s_c if mom.mode == "gram" else s_c * mom.p_squared
        return MultiPoly(arity, {tuple(exp): scale})

    if method == "cutsets":
        acc = MultiPoly(arity)
        for cut, (side1, _) in g.cut_sets():
            acc = acc + monomial(cut, _cut_coefficient(g, mom, side1))
        return acc

    if method == "trees":
        if mom.mode != "two-leg":
            raise BadLegConfiguration("tree route implemented for two-leg mode")
        v1, v2 = _check_two_leg(g)
        seen = set()
        acc = MultiPoly(arity)
        all_ids = set(g.edge_ids())
        for tree in g.spanning_trees():
            tset = set(tree)
            path = {eid for eid, _ in g._tree_path(tset, v1, v2)}
            for eid in sorted(path):
                cut = tuple(sorted((all_ids - tset) | {eid}))
                if cut in seen:
                    continue
                seen.add(cut)
                acc = acc + monomial(cut, Fraction(1))
        return acc

    raise ValueError(f"unknown method {method!r}")


def v_function(g: FeynmanGraph, mom: MomentumData):
    """(P_eff, Psi) with V = P_eff/Psi on the simplex; P_eff = P + m^2 Psi."""
    psi = psi_polynomial(g, "det")
    p = second_symanzik(g, mom, "cutsets")
    if p.arity > psi.arity:
        psi = psi.extend_arity(p.arity)
    if mom.mass_squared:
        p = p + psi.scale(mom.mass_squared)
    return p, psi


# -- reduced vertex matrix / quadratic form --------------------------------------


def _fraction_matrix_inverse(m):
    n = len(m)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularAtPoint("reduced vertex matrix is singular here")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def r_form_evaluator(g: FeynmanGraph, mom: MomentumData):
    """Evaluator t -> p^T R_Gamma(t) p via the reduced vertex matrix.

    D_Gamma(t) is singular (incidence columns sum to zero), so one reference
    vertex row/column is deleted before inversion; correctness is certified by
    the Psi * (p^T R p) = P identity rather than by construction.
    """
    check_conservation(g, mom)
    if mom.mode == "two-leg":
        p2 = mom.p_squared if mom.p_squared is not None else Fraction(1)
        v_plus, v_minus = _check_two_leg(g)
        pv = {}
        pv[v_plus] = {"_p": pv.get(v_plus, {}).get("_p", 0) + 1}
        pv[v_minus] = {"_p": pv.get(v_minus, {}).get("_p", 0) - 1}
        pv = {v: c for v, c in pv.items() if c["_p"]}
        dot = lambda ca, cb: p2 * sum(ca.values()) * sum(cb.values())
    else:
        pv = _vertex_momentum_coeffs(g)
        dot = lambda ca, cb: _dot(mom, ca, cb)

    verts = list(g.vertices)
    reduced = verts[:-1]  # delete the last vertex as reference
    eps = g.incidence_matrix()

    def evaluate(t_point):
        t = [Fraction(x) for x in t_point]
        if any(x == 0 for x in t):
            raise SingularAtPoint("t on a coordinate hyperplane")
        n_red = len(reduced)
        d = [[Fraction(0)] * n_red for _ in range(n_red)]
        for i in range(g.n_edges):
            inv = 1 / t[i]
            for a in range(n_red):
                ea = eps[a][i]
                if not ea:
                    continue
                for b in range(n_red):
                    eb = eps[b][i]
                    if eb:
                        d[a][b] += ea * eb * inv
        dinv = _fraction_matrix_inverse(d)
        acc = Fraction(0)
        for a, va in enumerate(reduced):
            ca = pv.get(va, {})
            if not ca:
                continue
            for b, vb in enumerate(reduced):
                cb = pv.get(vb, {})
                if not cb:
                    continue
                acc += dinv[a][b] * dot(ca, cb)
        return acc

    return evaluate


# -- generic condition -------------------------------------------------------------


def generic_condition(g: FeynmanGraph, mom: MomentumData, perturbations: int = 8,
                      seed: int = 2024):
    """(holds, certificate): Psi and P share no factor, exactly or generically."""
    from . import corpus as _corpus

    psi = psi_polynomial(g, "det")
    cert = {"mode": mom.mode, "checks": []}
    if mom.mode == "two-leg":
        p = second_symanzik(g, MomentumData.two_leg(None), "cutsets")
        if p.is_zero():
            return False, cert | {"reason": "P vanishes"}
        gcd_poly = poly_gcd(psi.extend_arity(p.arity), p)
        cert["checks"].append({"kind": "symbolic", "gcd": gcd_poly.serialize()})
        return gcd_poly.is_constant(), cert
    # gram mode: exact gcd at the given momenta plus random perturbations
    p0 = second_symanzik(g, mom, "cutsets")
    if p0.is_zero():
        return False, cert | {"reason": "P vanishes"}
    good = True
    gcd0 = poly_gcd(psi, p0)
    cert["checks"].append({"kind": "given", "gcd": gcd0.serialize()})
    good &= gcd0.is_constant()
    for k in range(perturbations):
        labels, gram = _corpus.random_gram(g, seed + k)
        mom_k = MomentumData.from_gram(labels, gram)
        pk = second_symanzik(g, mom_k, "cutsets")
        if pk.is_zero():
            cert["checks"].append({"kind": f"perturbation{k}", "gcd": "P=0"})
            continue
        gk = poly_gcd(psi, pk)
        cert["checks"].append({"kind": f"perturbation{k}", "gcd": gk.serialize()})
        good &= gk.is_constant()
    return good, cert


# -- case tables ----------------------------------------------------------------


@dataclass(frozen=True)
class CaseTableResult:
    regime: str  # "high" (n-D(l+1)/2 >= 0) | "middle" | "low" (n-Dl/2 <= 0)
    f_exponents: tuple  # (power of P, power of Psi)
    m: int
    omega_exponents: tuple  # (power of P, power of Psi) multiplying omega_n
    h_exponents: tuple  # (power of P, power of Psi); sliced tables
    big_c: int
    r_max: int | None  # sliced tables only

    def f_degree(self, loops: int) -> int:
        ep, epsi = self.f_exponents
        return ep * (loops + 1) + epsi * loops


def _regimes(n, d, ell):
    if d <= 0 or d % 2:
        raise OddDimension("case tables are defined for even positive D only")
    if n < 1 or ell < 1:
        raise ValueError("need n >= 1 and loop number >= 1")
    hi = n - d * (ell + 1) // 2
    lo = n - d * ell // 2
    return hi, lo


def case_table_affine(n: int, d: int, ell: int) -> CaseTableResult:
    """(f, m, omega, C) of the projective reformulation, affine index n."""
    hi, lo = _regimes(n, d, ell)
    if hi >= 0:
        res = CaseTableResult("high", (1, 0), lo, (0, hi), (0, 0),
                              lo * (ell + 1), None)
    elif lo > 0:
        m = gcd(lo, d // 2)
        res = CaseTableResult("middle", (lo // m, (d // 2) // m), m, (0, lo),
                              (0, 0), lo * ell + n, None)
    else:
        res = CaseTableResult("low", (0, 1), -hi, (-lo, 0), (0, 0),
                              (-hi) * ell, None)
    assert res.big_c == res.m * res.f_degree(ell)
    return res


def case_table_sliced(k: int, d: int, ell: int) -> CaseTableResult:
    """(f, m, h, r_max) of the polar-filtration tables, slice dimension k."""
    hi, lo = _regimes(k, d, ell)
    if hi >= 0:
        return CaseTableResult("high", (1, 0), lo, (0, 0), (0, hi),
                               lo * (ell + 1), d * ell // 2)
    if lo > 0:
        m = gcd(lo, d // 2)
        return CaseTableResult("middle", (lo // m, (d // 2) // m), m, (0, 0),
                               (0, lo), lo * ell + k, k - m)
    return CaseTableResult("low", (0, 1), -hi, (0, 0), (-lo, 0),
                           (-hi) * ell, 2 * k - d * (ell + 1) // 2)

"""Groebner bases (global orders) and Mora standard bases (local order).

Global orders: graded-lex (default) and lex, via Buchberger with the coprime
criterion. Local computations use the degree-anticompatible order (smallest
total degree leads, lex tie-break) and Mora's normal form, which is enough
for staircase dimension counts of local quotients. Quotient classes needed
elsewhere are reduced by exact linear algebra (see local_quotient_basis).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .poly import ArityMismatch, MultiPoly, grlex_key


class GroebnerTimeout(RuntimeError):
    """Raised with .partial holding the basis computed so far."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


GRLEX = "grlex"
LEX = "lex"
LOCAL = "local"


def lex_key(exp):
    return exp


def local_key(exp):
    # Degree-anticompatible: lower total degree is *larger*; lex tie-break.
    return (-sum(exp), exp)


_KEYS = {GRLEX: grlex_key, LEX: lex_key, LOCAL: local_key}


@dataclass
class PolyIdeal:
    generators: list
    order: str = GRLEX
    is_basis: bool = field(default=False, compare=False)

    def __post_init__(self):
        gens = [g for g in self.generators if not g.is_zero()]
        if gens:
            arity = gens[0].arity
            if any(g.arity != arity for g in gens):
                raise ArityMismatch("ideal generators of mixed arity")
        self.generators = gens

    @property
    def arity(self):
        return self.generators[0].arity if self.generators else 0


def _lead(p, key):
    exp = max(p.terms, key=key)
    return exp, p.terms[exp]


def _divides_exp(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm_exp(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _reduce_global(p, basis, key):
    """Full normal form of p against basis for a global order."""
    rem = MultiPoly(p.arity)
    cur = p
    leads = [(_lead(g, key), g) for g in basis]
    while cur.terms:
        exp = max(cur.terms, key=key)
        c = cur.terms[exp]
        hit = None
        for (lexp, lc), g in leads:
            if _divides_exp(lexp, exp):
                hit = (lexp, lc, g)
                break
        if hit is None:
            mono = MultiPoly(cur.arity, {exp: c})
            rem = rem + mono
            cur = cur - mono
        else:
            lexp, lc, g = hit
            qexp = tuple(a - b for a, b in zip(exp, lexp))
            cur = cur - MultiPoly(cur.arity, {qexp: c / lc}) * g
    return rem


def groebner_basis(ideal: PolyIdeal, max_arity: int = 4, max_steps: int = 20000):
    """Reduced Groebner basis (global orders) or Mora standard basis (local).

    max_arity guards runaway inputs; raise it explicitly for bigger systems.
    """
    if ideal.arity > max_arity:
        raise ArityMismatch(
            f"ideal arity {ideal.arity} exceeds configured cap {max_arity}"
        )
    if ideal.order == LOCAL:
        gens = mora_standard_basis(ideal.generators, max_steps=max_steps)
        out = PolyIdeal(gens, order=LOCAL)
        out.is_basis = True
        return out

    key = _KEYS[ideal.order]
    basis = [g.scale(1 / _lead(g, key)[1]) for g in ideal.generators]
    pairs = list(combinations(range(len(basis)), 2))
    steps = 0
    while pairs:
        i, j = pairs.pop(0)
        steps += 1
        if steps > max_steps:
            out = PolyIdeal(basis, order=ideal.order)
            raise GroebnerTimeout("step budget exhausted", out)
        ei, _ = _lead(basis[i], key)
        ej, _ = _lead(basis[j], key)
        if all(a == 0 or b == 0 for a, b in zip(ei, ej)):
            continue  # coprime leading monomials
        lcm = _lcm_exp(ei, ej)
        mi = tuple(a - b for a, b in zip(lcm, ei))
        mj = tuple(a - b for a, b in zip(lcm, ej))
        spoly = (
            MultiPoly(basis[i].arity, {mi: Fraction(1)}) * basis[i]
            - MultiPoly(basis[j].arity, {mj: Fraction(1)}) * basis[j]
        )
        rem = _reduce_global(spoly, basis, key)
        if rem.terms:
            rem = rem.scale(1 / _lead(rem, key)[1])
            k = len(basis)
            basis.append(rem)
            pairs.extend((i2, k) for i2 in range(k))

    # Minimalize and reduce.
    minimal = []
    for i, g in enumerate(basis):
        e, _ = _lead(g, key)
        if not any(
            _divides_exp(_lead(h, key)[0], e) for j, h in enumerate(basis) if j != i
            and (j < i or _lead(h, key)[0] != e)
        ):
            minimal.append(g)
    reduced = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        r = _reduce_global(g, others, key) if others else g
        if r.terms:
            reduced.append(r.scale(1 / _lead(r, key)[1]))
    reduced.sort(key=lambda g: _lead(g, key)[0])
    out = PolyIdeal(reduced, order=ideal.order)
    out.is_basis = True
    return out


# -- Mora normal form / standard basis (local order) ---------------------------


def _ecart(p):
    lexp = max(p.terms, key=local_key)
    return p.total_degree() - sum(lexp)


def _mora_nf(h, gens, max_steps):
    """Mora weak normal form of h against gens for the local order."""
    t_set = list(gens)
    steps = 0
    while h.terms:
        steps += 1
        if steps > max_steps:
            raise GroebnerTimeout("Mora normal form budget", PolyIdeal(gens, LOCAL))
        hexp = max(h.terms, key=local_key)
        candidates = [g for g in t_set if _divides_exp(max(g.terms, key=local_key), hexp)]
        if not candidates:
            return h
        g = min(candidates, key=_ecart)
        if _ecart(g) > _ecart(h):
            t_set.append(h)
        gexp = max(g.terms, key=local_key)
        gc = g.terms[gexp]
        qexp = tuple(a - b for a, b in zip(hexp, gexp))
        h = h - MultiPoly(h.arity, {qexp: h.terms[hexp] / gc}) * g
    return h


def mora_standard_basis(gens, max_steps=20000):
    """Standard basis for the local degree-anticompatible order."""
    basis = [g for g in gens if not g.is_zero()]
    if not basis:
        return []
    basis = [g.scale(1 / g.terms[max(g.terms, key=local_key)]) for g in basis]
    pairs = list(combinations(range(len(basis)), 2))
    steps = 0
    while pairs:
        i, j = pairs.pop(0)
        steps += 1
        if steps > max_steps:
            raise GroebnerTimeout("step budget exhausted", PolyIdeal(basis, LOCAL))
        ei = max(basis[i].terms, key=local_key)
        ej = max(basis[j].terms, key=local_key)
        lcm = _lcm_exp(ei, ej)
        mi = tuple(a - b for a, b in zip(lcm, ei))
        mj = tuple(a - b for a, b in zip(lcm, ej))
        spoly = (
            MultiPoly(basis[i].arity, {mi: Fraction(1)}) * basis[i]
            - MultiPoly(basis[j].arity, {mj: Fraction(1)}) * basis[j]
        )
        if spoly.is_zero():
            continue
        rem = _mora_nf(spoly, basis, max_steps)
        if rem.terms:
            rem = rem.scale(1 / rem.terms[max(rem.terms, key=local_key)])
            k = len(basis)
            basis.append(rem)
            pairs.extend((i2, k) for i2 in range(k))
    basis.sort(key=lambda g: local_key(max(g.terms, key=local_key)), reverse=True)
    return basis


# -- staircase counting ---------------------------------------------------------


def _staircase_count(lead_exps, arity, cap=100000):
    """Count monomials outside the staircase; None means infinite."""
    for i in range(arity):
        if not any(e[i] > 0 and all(e[j] == 0 for j in range(arity) if j != i)
                   for e in lead_exps):
            # No pure power of variable i among the leading terms: check
            # whether some mixed leading monomial still bounds it; the
            # staircase is finite iff every variable has a pure power.
            return None
    bounds = []
    for i in range(arity):
        b = min(
            e[i]
            for e in lead_exps
            if e[i] > 0 and all(e[j] == 0 for j in range(arity) if j != i)
        )
        bounds.append(b)

    count = 0
    stack = [(0, tuple())]
    while stack:
        i, prefix = stack.pop()
        if i == arity:
            exp = prefix
            if not any(_divides_exp(l, exp) for l in lead_exps):
                count += 1
                if count > cap:
                    return None
            continue
        for v in range(bounds[i]):
            stack.append((i + 1, prefix + (v,)))
    return count


def quotient_dimension(ideal: PolyIdeal, max_arity: int = 4):
    """Vector-space dimension of R/I (global) or the local quotient (local).

    Returns a nonnegative integer or the string "infinite".
    """
    basis = ideal if ideal.is_basis else groebner_basis(ideal, max_arity=max_arity)
    if not basis.generators:
        return "infinite"  # zero ideal in >=1 variables (or trivial ring)
    key = _KEYS[basis.order]
    leads = [max(g.terms, key=key) for g in basis.generators]
    if any(sum(e) == 0 for e in leads):
        return 0  # unit ideal
    n = _staircase_count(leads, basis.arity)
    return n if n is not None else "infinite"


def ideal_dimension(ideal: PolyIdeal, max_arity: int = 6):
    """Krull dimension of R/I (affine): max independent variable set mod LT(I).

    Returns -1 for the unit ideal (empty variety).
    """
    basis = ideal if ideal.is_basis else groebner_basis(
        PolyIdeal(ideal.generators, GRLEX), max_arity=max_arity
    )
    if not basis.generators:
        return ideal.arity
    key = _KEYS[basis.order]
    leads = [max(g.terms, key=key) for g in basis.generators]
    if any(sum(e) == 0 for e in leads):
        return -1
    arity = basis.arity
    best = -1
    for r in range(arity, -1, -1):
        for subset in combinations(range(arity), r):
            subset_set = set(subset)
            if not any(
                all(i in subset_set for i in range(arity) if e[i] > 0) for e in leads
            ):
                return r
    return best


# -- exact local quotient by linear algebra -------------------------------------


def _monomials_upto(arity, deg):
    out = [tuple()]
    for _ in range(arity):
        out = [p + (v,) for p in out for v in range(deg + 1)]
    return sorted(
        (e for e in out if sum(e) <= deg), key=grlex_key
    )


def _rref(rows, ncols):
    """Reduced row echelon form over Fraction; returns (rows, pivot cols)."""
    rows = [list(r) for r in rows if any(r)]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
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
    rows = [row for row in rows[:r]]
    return rows, pivots


class LocalQuotient:
    """Exact model of C[[u]]/J at the origin, J generated by polynomials.

    Works in C[u]/m^N for increasing N until dim(C[u]/(J+m^N)) stabilizes;
    by Nakayama a single plateau step certifies m^N lies in J, so the
    dimension and all normal forms below are exact. Raises ValueError if no
    plateau is reached by max_truncation (non-isolated singularity).
    """

    def __init__(self, gens, max_truncation=24):
        if not gens:
            raise ValueError("empty generator list")
        self.arity = gens[0].arity
        self.gens = gens
        prev_dim = None
        for trunc in range(2, max_truncation + 1):
            dim = self._build(trunc)
            if prev_dim is not None and dim == prev_dim:
                self.dimension = dim
                self.truncation = trunc
                return
            prev_dim = dim
        raise ValueError("no plateau: local quotient looks infinite-dimensional")

    def _build(self, trunc):
        monos = _monomials_upto(self.arity, trunc - 1)
        index = {m: i for i, m in enumerate(monos)}
        rows = []
        for g in self.gens:
            for shift in monos:
                row = [Fraction(0)] * len(monos)
                touched = False
                for exp, c in g.terms.items():
                    tot = tuple(a + b for a, b in zip(exp, shift))
                    if sum(tot) < trunc:
                        row[index[tot]] += c
                        touched = True
                if touched and any(row):
                    rows.append(row)
        rref, pivots = _rref(rows, len(monos))
        self._monos = monos
        self._index = index
        self._rref = rref
        self._pivots = pivots
        self._pivot_of_col = {c: i for i, c in enumerate(pivots)}
        self._free_cols = [i for i in range(len(monos)) if i not in set(pivots)]
        return len(self._free_cols)

    def normal_form_vector(self, p):
        """Coordinates of [p] in the basis of standard monomials (free cols)."""
        vec = [Fraction(0)] * len(self._monos)
        for exp, c in p.terms.items():
            if sum(exp) < self.truncation:
                vec[self._index[exp]] += c
            # monomials of degree >= truncation lie in m^N subset J: drop
        for row_i, col in zip(range(len(self._rref)), self._pivots):
            if vec[col]:
                f = vec[col]
                row = self._rref[row_i]
                vec = [x - f * y for x, y in zip(vec, row)]
        return [vec[c] for c in self._free_cols]

    def basis_monomials(self):
        return [self._monos[c] for c in self._free_cols]


def local_milnor_dimension(gens, max_truncation=24):
    """dim C[[u]]/(gens) at the origin, or "infinite"."""
    try:
        return LocalQuotient(gens, max_truncation=max_truncation).dimension
    except ValueError:
        return "infinite"

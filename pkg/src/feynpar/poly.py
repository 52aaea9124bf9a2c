"""Sparse multivariate polynomials over exact rationals.

Terms are stored as {exponent tuple: Fraction} with no zero coefficients.
Canonical term order is graded lexicographic (total degree first, then lex),
which fixes the serialization format `coef num/den : e1 e2 ... en`.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class ArityMismatch(ValueError):
    pass


class ZeroPolynomial(ValueError):
    pass


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def grlex_key(exp):
    return (sum(exp), exp)


class MultiPoly:
    __slots__ = ("arity", "terms", "_compiled")

    def __init__(self, arity: int, terms=None):
        self.arity = arity
        self.terms = {}
        self._compiled = None
        if terms:
            for exp, c in terms.items():
                c = _as_fraction(c)
                if c:
                    if len(exp) != arity:
                        raise ArityMismatch(f"exponent {exp} has wrong length")
                    self.terms[tuple(exp)] = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, arity):
        return cls(arity)

    @classmethod
    def constant(cls, arity, c):
        return cls(arity, {tuple([0] * arity): _as_fraction(c)})

    @classmethod
    def one(cls, arity):
        return cls.constant(arity, 1)

    @classmethod
    def variable(cls, arity, i):
        exp = [0] * arity
        exp[i] = 1
        return cls(arity, {tuple(exp): Fraction(1)})

    @classmethod
    def variables(cls, arity):
        return [cls.variable(arity, i) for i in range(arity)]

    # -- basic queries ------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self):
        return self.terms.get(tuple([0] * self.arity), Fraction(0))

    def total_degree(self):
        if not self.terms:
            raise ZeroPolynomial("degree of zero polynomial")
        return max(sum(e) for e in self.terms)

    def degree_in(self, i):
        if not self.terms:
            raise ZeroPolynomial("degree of zero polynomial")
        return max(e[i] for e in self.terms)

    def leading_term(self, key=grlex_key):
        exp = max(self.terms, key=key)
        return exp, self.terms[exp]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if self.arity != other.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(self.arity, other)
        self._check(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp, Fraction(0)) + c
            if s:
                terms[exp] = s
            else:
                terms.pop(exp, None)
        return MultiPoly(self.arity, terms)

    def __neg__(self):
        return MultiPoly(self.arity, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(self.arity, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(exp, Fraction(0)) + c1 * c2
                if s:
                    terms[exp] = s
                else:
                    terms.pop(exp, None)
        return MultiPoly(self.arity, terms)

    __rmul__ = __mul__
    __radd__ = __add__

    def scale(self, c):
        c = _as_fraction(c)
        if not c:
            return MultiPoly(self.arity)
        return MultiPoly(self.arity, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.one(self.arity)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def eval(self, point):
        if len(point) != self.arity:
            raise ArityMismatch("evaluation point has wrong length")
        point = [_as_fraction(p) for p in point]
        acc = Fraction(0)
        for exp, c in self.terms.items():
            term = c
            for x, e in zip(point, exp):
                if e:
                    term *= x**e
            acc += term
        return acc

    def eval_float(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate at a batch of float points (N, arity) via the hot kernel."""
        from .kernels import eval_poly_batch

        coefs, exps = self.compiled()
        pts = np.ascontiguousarray(pts, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[1] != self.arity:
            raise ArityMismatch("point batch has wrong width")
        if coefs.shape[0] == 0:
            return np.zeros(pts.shape[0])
        return eval_poly_batch(coefs, exps, pts)

    def compiled(self):
        if self._compiled is None:
            items = self.sorted_terms()
            coefs = np.array([float(c) for _, c in items], dtype=np.float64)
            exps = np.array(
                [e for e, _ in items] or np.empty((0, self.arity)),
                dtype=np.int64,
            ).reshape(len(items), self.arity)
            self._compiled = (coefs, exps)
        return self._compiled

    # -- calculus and structure ----------------------------------------------

    def partial(self, i):
        if i >= self.arity:
            raise ArityMismatch(f"variable index {i} out of range")
        terms = {}
        for exp, c in self.terms.items():
            if exp[i]:
                new = list(exp)
                new[i] -= 1
                terms[tuple(new)] = terms.get(tuple(new), Fraction(0)) + c * exp[i]
        return MultiPoly(self.arity, terms)

    def homogeneity(self):
        """(is_homogeneous, total_degree, per-variable max degree)."""
        if not self.terms:
            raise ZeroPolynomial("homogeneity of zero polynomial")
        degrees = {sum(e) for e in self.terms}
        per_var = tuple(
            max(e[i] for e in self.terms) for i in range(self.arity)
        )
        return len(degrees) == 1, self.total_degree(), per_var

    def substitute(self, images):
        """Substitute variable i -> images[i]; images share a common arity."""
        if len(images) != self.arity:
            raise ArityMismatch("need one image per variable")
        out_arity = images[0].arity
        result = MultiPoly(out_arity)
        pow_cache = [{0: MultiPoly.one(out_arity)} for _ in range(self.arity)]

        def img_pow(i, e):
            cache = pow_cache[i]
            if e not in cache:
                cache[e] = img_pow(i, e - 1) * images[i]
            return cache[e]

        for exp, c in self.terms.items():
            term = MultiPoly.constant(out_arity, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * img_pow(i, e)
            result = result + term
        return result

    def extend_arity(self, new_arity, offset=0):
        """Re-embed into a larger variable ring, shifting indices by offset."""
        if new_arity < self.arity + offset:
            raise ArityMismatch("extension too small")
        terms = {}
        for exp, c in self.terms.items():
            new = [0] * new_arity
            new[offset : offset + self.arity] = exp
            terms[tuple(new)] = c
        return MultiPoly(new_arity, terms)

    # -- division, gcd -------------------------------------------------------

    def divide_by(self, divisor):
        """Single-divisor division: returns (quotient, remainder), graded-lex."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        self._check(divisor)
        lt_exp, lt_coef = divisor.leading_term()
        quo = MultiPoly(self.arity)
        rem = MultiPoly(self.arity)
        cur = self
        while cur.terms:
            exp, c = cur.leading_term()
            if all(a >= b for a, b in zip(exp, lt_exp)):
                qexp = tuple(a - b for a, b in zip(exp, lt_exp))
                qmono = MultiPoly(self.arity, {qexp: c / lt_coef})
                quo = quo + qmono
                cur = cur - qmono * divisor
            else:
                mono = MultiPoly(self.arity, {exp: c})
                rem = rem + mono
                cur = cur - mono
        return quo, rem

    def divides(self, other):
        """True iff self divides other exactly."""
        if other.is_zero():
            return True
        if self.is_zero():
            return False
        _, rem = other.divide_by(self)
        return rem.is_zero()

    def divide_exact(self, divisor):
        quo, rem = self.divide_by(divisor)
        if not rem.is_zero():
            raise ValueError("inexact polynomial division")
        return quo

    # -- serialization --------------------------------------------------------

    def serialize(self):
        lines = []
        for exp, c in self.sorted_terms():
            lines.append(f"{c.numerator}/{c.denominator} : " + " ".join(map(str, exp)))
        return "\n".join(lines) if lines else "0"

    @classmethod
    def parse(cls, text, arity=None):
        text = text.strip()
        if text == "0":
            if arity is None:
                raise ValueError("arity required to parse the zero polynomial")
            return cls(arity)
        terms = {}
        for line in text.splitlines():
            coef_s, exp_s = line.split(":")
            exp = tuple(int(x) for x in exp_s.split())
            terms[exp] = Fraction(coef_s.strip())
        arities = {len(e) for e in terms}
        if len(arities) != 1:
            raise ValueError("inconsistent exponent lengths")
        got = arities.pop()
        if arity is not None and got != arity:
            raise ArityMismatch(f"expected arity {arity}, got {got}")
        return cls(got, terms)

    def pretty(self, names=None):
        if not self.terms:
            return "0"
        names = names or [f"t{i+1}" for i in range(self.arity)]
        parts = []
        for exp, c in self.sorted_terms():
            factors = [
                names[i] if e == 1 else f"{names[i]}^{e}"
                for i, e in enumerate(exp)
                if e
            ]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"MultiPoly({self.pretty()})"


# -- determinants -------------------------------------------------------------


def det_cofactor(matrix):
    """Naive cofactor-expansion determinant; the small-matrix cross-check."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    arity = matrix[0][0].arity
    if n == 1:
        return matrix[0][0]
    result = MultiPoly(arity)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = matrix[0][j] * det_cofactor(minor)
        result = result + (term if j % 2 == 0 else -term)
    return result


def det_polynomial(matrix):
    """Exact determinant of a square MultiPoly matrix (fraction-free Bareiss)."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    for row in matrix:
        if len(row) != n:
            raise ValueError("matrix not square")
    arity = matrix[0][0].arity
    m = [list(row) for row in matrix]
    sign = 1
    prev = MultiPoly.one(arity)
    for k in range(n - 1):
        if m[k][k].is_zero():
            pivot_row = next(
                (i for i in range(k + 1, n) if not m[i][k].is_zero()), None
            )
            if pivot_row is None:
                return MultiPoly(arity)
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num.divide_exact(prev)
            m[i][k] = MultiPoly(arity)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign == 1 else -det


# -- multivariate gcd ----------------------------------------------------------


def _to_univariate(p, var):
    """View p as a polynomial in `var` with MultiPoly coefficients (arity-1)."""
    rest = [i for i in range(p.arity) if i != var]
    coeffs = {}
    for exp, c in p.terms.items():
        d = exp[var]
        rest_exp = tuple(exp[i] for i in rest)
        coeffs.setdefault(d, {})[rest_exp] = c
    return {d: MultiPoly(p.arity - 1, t) for d, t in coeffs.items()}


def _from_univariate(coeffs, var, arity):
    terms = {}
    for d, poly in coeffs.items():
        for exp, c in poly.terms.items():
            full = list(exp[:var]) + [d] + list(exp[var:])
            terms[tuple(full)] = c
    return MultiPoly(arity, terms)


def _univ_degree(coeffs):
    return max(coeffs) if coeffs else -1


def _univ_mul(a, b, arity1):
    out = {}
    for da, pa in a.items():
        for db, pb in b.items():
            prod = pa * pb
            if prod.is_zero():
                continue
            d = da + db
            out[d] = out.get(d, MultiPoly(arity1)) + prod
    return {d: p for d, p in out.items() if not p.is_zero()}


def _univ_scale(a, poly):
    out = {}
    for d, pa in a.items():
        prod = pa * poly
        if not prod.is_zero():
            out[d] = prod
    return out


def _univ_sub(a, b, arity1):
    out = dict(a)
    for d, pb in b.items():
        s = out.get(d, MultiPoly(arity1)) - pb
        if s.is_zero():
            out.pop(d, None)
        else:
            out[d] = s
    return out


def _pseudo_rem(a, b, arity1):
    """Pseudo-remainder of univariate-over-MultiPoly polynomials."""
    da, db = _univ_degree(a), _univ_degree(b)
    lead_b = b[db]
    r = dict(a)
    while _univ_degree(r) >= db and r:
        dr = _univ_degree(r)
        lead_r = r[dr]
        r = _univ_sub(
            _univ_scale(r, lead_b),
            _univ_mul({dr - db: lead_r}, b, arity1),
            arity1,
        )
    return r


def _normalize_unit(p):
    """Scale so the graded-lex leading coefficient is 1 (gcds unique up to Q*)."""
    if p.is_zero():
        return p
    _, lc = p.leading_term()
    return p.scale(1 / lc)


def poly_gcd(a, b):
    """GCD via content/primitive-part recursion on the variable of least degree.

    Result normalized to leading coefficient 1; gcd(0, b) = normalized b.
    """
    if a.arity != b.arity:
        raise ArityMismatch("gcd of different rings")
    if a.is_zero():
        return _normalize_unit(b)
    if b.is_zero():
        return _normalize_unit(a)
    if a.is_constant() or b.is_constant():
        return MultiPoly.one(a.arity)
    if a.arity == 1:
        # Euclid over Q[x].
        x, y = a, b
        while not y.is_zero():
            _, r = x.divide_by(y)
            x, y = y, r
        return _normalize_unit(x)

    # Recurse on the variable where max(deg_a, deg_b) is least but positive.
    cand = []
    for i in range(a.arity):
        d = max(a.degree_in(i), b.degree_in(i))
        if d > 0:
            cand.append((d, i))
    if not cand:
        return MultiPoly.one(a.arity)
    _, var = min(cand)

    ua, ub = _to_univariate(a, var), _to_univariate(b, var)
    if _univ_degree(ua) == 0 or _univ_degree(ub) == 0:
        # One of them is free of var after all; gcd divides its content.
        content_a = _univ_content(ua)
        content_b = _univ_content(ub)
        return _normalize_unit(
            _from_univariate({0: poly_gcd(content_a, content_b)}, var, a.arity)
        )

    ca, pa = _univ_content_pp(ua)
    cb, pb = _univ_content_pp(ub)
    cont = poly_gcd(ca, cb)

    # Primitive PRS on the primitive parts.
    f, g = pa, pb
    if _univ_degree(f) < _univ_degree(g):
        f, g = g, f
    arity1 = a.arity - 1
    while True:
        r = _pseudo_rem(f, g, arity1)
        if not r:
            break
        _, r = _univ_content_pp(r)
        f, g = g, r
    _, g = _univ_content_pp(g)
    result = _univ_mul(g, {0: cont}, arity1)
    return _normalize_unit(_from_univariate(result, var, a.arity))


def _univ_content(u):
    c = None
    for _, p in sorted(u.items()):
        c = p if c is None else poly_gcd(c, p)
        if c.is_constant():
            break
    return c if c is not None else None


def _univ_content_pp(u):
    cont = _univ_content(u)
    pp = {d: p.divide_exact(cont) for d, p in u.items()}
    return cont, pp


def gcd_divides(a, b):
    """Spec pair: (gcd(a, b) with unit-normalized leading coeff, a | b)."""
    if a.is_zero():
        raise ZeroPolynomial("gcd_divides needs a nonzero first argument")
    return poly_gcd(a, b), a.divides(b)

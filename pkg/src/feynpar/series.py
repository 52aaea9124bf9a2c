"""Truncated Laurent series in the regularization variable.

Semantics of a series with window [lo, hi]:
  * no nonzero coefficients below lo (the low side is always exact);
  * coefficients in [lo, hi] are stored;
  * coefficients above hi are exactly zero when `entire` is set (Laurent
    polynomials: every character built from a finite coefficient list), and
    unknown otherwise (truncated expansions).
Arithmetic tracks the window on which results remain exact, so every
reported coefficient is trustworthy; reading an unknown coefficient raises
TruncationUnderflow. Coefficients are exact Fractions by default; float
backing mixes freely for quadrature-built characters.
"""

from __future__ import annotations

from fractions import Fraction

DEFAULT_LO = -8
DEFAULT_HI = 8
_SPAN = DEFAULT_HI - DEFAULT_LO


class TruncationUnderflow(ArithmeticError):
    pass


def _coerce(x):
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"bad coefficient {x!r}")


class LaurentSeries:
    __slots__ = ("lo", "hi", "coeffs", "entire")

    def __init__(self, coeffs=None, lo=DEFAULT_LO, hi=DEFAULT_HI, entire=None):
        """coeffs: {exponent: coefficient}. entire defaults to True when the
        coefficients are given directly (a Laurent polynomial)."""
        self.coeffs = {}
        if coeffs:
            for k, v in coeffs.items():
                v = _coerce(v)
                if v != 0:
                    self.coeffs[int(k)] = v
        if entire is None:
            entire = True
        self.entire = entire
        if self.coeffs:
            lo = min(lo, min(self.coeffs))
            hi = max(hi, max(self.coeffs))
        if lo > hi:
            raise TruncationUnderflow(f"empty window [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- constructors --

    @classmethod
    def zero(cls, lo=DEFAULT_LO, hi=DEFAULT_HI):
        return cls({}, lo, hi, entire=True)

    @classmethod
    def one(cls, lo=DEFAULT_LO, hi=DEFAULT_HI):
        return cls({0: Fraction(1)}, lo, hi, entire=True)

    @classmethod
    def monomial(cls, exponent, coeff=1, lo=DEFAULT_LO, hi=DEFAULT_HI):
        return cls({exponent: coeff}, lo, hi, entire=True)

    @classmethod
    def truncated(cls, coeffs, lo=DEFAULT_LO, hi=DEFAULT_HI):
        return cls(coeffs, lo, hi, entire=False)

    @classmethod
    def exp_linear(cls, rate, hi=DEFAULT_HI):
        """exp(rate * z) truncated at z^hi; exact for Fraction rate."""
        rate = _coerce(rate)
        coeffs = {}
        term = Fraction(1) if isinstance(rate, Fraction) else 1.0
        for k in range(0, hi + 1):
            if k:
                term = term * rate / k
            coeffs[k] = term
        return cls(coeffs, 0, hi, entire=False)

    # -- inspection --

    def is_zero(self):
        return not self.coeffs

    def order(self):
        if not self.coeffs:
            return None
        return min(self.coeffs)

    def coeff(self, k):
        if k > self.hi and not self.entire:
            raise TruncationUnderflow(f"coefficient of z^{k} beyond window {self.hi}")
        return self.coeffs.get(k, Fraction(0))

    def known_hi(self):
        return None if self.entire else self.hi

    def is_exact(self):
        return all(isinstance(v, Fraction) for v in self.coeffs.values())

    def is_holomorphic(self):
        return all(k >= 0 for k in self.coeffs)

    def norm(self):
        return max((abs(v) for v in self.coeffs.values()), default=Fraction(0))

    def __eq__(self, other):
        return isinstance(other, LaurentSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(
                f"{v}*z^{k}" if k else f"{v}" for k, v in sorted(self.coeffs.items())
            )
        tail = "" if self.entire else f"; exact to z^{self.hi}"
        return f"LaurentSeries({body}{tail})"

    # -- arithmetic --

    def __add__(self, other):
        if isinstance(other, (int, Fraction, float, str)):
            other = LaurentSeries({0: _coerce(other)})
        entire = self.entire and other.entire
        if entire:
            hi = max(self.hi, other.hi)
        else:
            hi = min(x.hi for x in (self, other) if not x.entire)
        lo = min(self.lo, other.lo)
        if hi < lo:
            raise TruncationUnderflow("sum window collapsed")
        coeffs = {}
        for k in set(self.coeffs) | set(other.coeffs):
            if k <= hi:
                v = self.coeffs.get(k, 0) + other.coeffs.get(k, 0)
                if v != 0:
                    coeffs[k] = v
        return LaurentSeries(coeffs, lo, hi, entire=entire)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(
            {k: -v for k, v in self.coeffs.items()}, self.lo, self.hi, self.entire
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, float, str)):
            other = LaurentSeries({0: _coerce(other)})
        return self + (-other)

    def scale(self, c):
        c = _coerce(c)
        if c == 0:
            return LaurentSeries({}, self.lo, self.hi, entire=True)
        return LaurentSeries(
            {k: c * v for k, v in self.coeffs.items()}, self.lo, self.hi, self.entire
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, float, str)):
            return self.scale(other)
        entire = self.entire and other.entire
        # A product coefficient is uncertain once an unknown tail (beyond a
        # factor's hi) can pair with the other factor's lowest exponent.
        bounds = []
        o_self = self.order()
        o_other = other.order()
        if not self.entire:
            bounds.append(self.hi + (o_other if o_other is not None else _SPAN))
        if not other.entire:
            bounds.append(other.hi + (o_self if o_self is not None else _SPAN))
        if self.is_zero() or other.is_zero():
            if entire:
                return LaurentSeries({}, self.lo + other.lo, self.hi + other.hi, True)
            return LaurentSeries({}, min(self.lo, other.lo), min(bounds), False)
        lo = o_self + o_other
        hi = (self.hi + other.hi) if entire else min(bounds)
        if hi < lo:
            raise TruncationUnderflow("product window collapsed")
        coeffs = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = k1 + k2
                if k <= hi:
                    coeffs[k] = coeffs.get(k, 0) + v1 * v2
        return LaurentSeries(
            {k: v for k, v in coeffs.items() if v != 0}, lo, hi, entire=entire
        )

    __rmul__ = __mul__

    def invert(self):
        """Multiplicative inverse; needs a nonzero leading coefficient."""
        if self.is_zero():
            raise ZeroDivisionError("inverting the zero series")
        n0 = self.order()
        a0 = self.coeffs[n0]
        if len(self.coeffs) == 1:
            return LaurentSeries({-n0: 1 / a0 if isinstance(a0, Fraction) else 1.0 / a0})
        hi = (-n0 + _SPAN) if self.entire else (self.hi - 2 * n0)
        lo = -n0
        if lo > hi:
            raise TruncationUnderflow("inverse window collapsed")
        inv = {lo: 1 / a0 if isinstance(a0, Fraction) else 1.0 / a0}
        for k in range(1, hi - lo + 1):
            acc = 0
            for j in range(1, k + 1):
                aj = self.coeffs.get(n0 + j, 0)
                bj = inv.get(lo + k - j, 0)
                if aj and bj:
                    acc += aj * bj
            inv[lo + k] = -acc / a0
        return LaurentSeries(
            {k: v for k, v in inv.items() if v != 0}, lo, hi, entire=False
        )

    def derivative(self):
        coeffs = {k - 1: k * v for k, v in self.coeffs.items() if k != 0}
        return LaurentSeries(coeffs, self.lo - 1, self.hi - 1, self.entire)

    # -- minimal subtraction --

    def polar_part(self):
        """Rota-Baxter T: keep strictly negative exponents."""
        entire = self.entire or self.hi >= -1
        return LaurentSeries(
            {k: v for k, v in self.coeffs.items() if k < 0},
            self.lo,
            max(self.hi, -1) if entire else self.hi,
            entire=entire,
        )

    def holomorphic_part(self):
        return LaurentSeries(
            {k: v for k, v in self.coeffs.items() if k >= 0},
            max(self.lo, 0),
            max(self.hi, 0),
            entire=self.entire,
        )

    def eval_at_zero(self):
        if any(k < 0 for k in self.coeffs):
            raise ArithmeticError("series has a pole at 0")
        return self.coeff(0)


def rota_baxter_T(s: LaurentSeries) -> LaurentSeries:
    return s.polar_part()

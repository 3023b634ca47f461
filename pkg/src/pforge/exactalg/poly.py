"""Sparse multivariate polynomials over the rationals.

A :class:`Poly` is stored as ``scale * P`` where ``P`` is a primitive integer
polynomial (coefficient gcd 1, positive leading coefficient under grlex).
The representation is canonical, so structural equality is polynomial
equality.  Monomials are packed integers (see :class:`~.chart.Chart`).
"""

from __future__ import annotations

from fractions import Fraction
from heapq import heapify, heappop, heappush
from math import gcd
from numbers import Rational
from typing import Dict, Iterator, Mapping, Optional, Tuple

from .chart import Chart, ChartError

IntTerms = Dict[int, int]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"expected a rational number, got {type(value).__name__}")


# ---------------------------------------------------------------------------
# integer kernels on {packed monomial: int}


def primitive(terms: IntTerms) -> Tuple[int, IntTerms]:
    """Split ``terms`` into (signed content, primitive part with LC > 0)."""
    if not terms:
        return 0, {}
    g = gcd(*terms.values())
    if terms[max(terms)] < 0:
        g = -g
    if g == 1:
        return 1, terms
    return g, {k: c // g for k, c in terms.items()}


def mul_terms(a: IntTerms, b: IntTerms) -> IntTerms:
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 1:
        (kb, cb), = b.items()
        if kb == 0:
            return {k: c * cb for k, c in a.items()} if cb != 1 else dict(a)
        return {k + kb: c * cb for k, c in a.items()}
    out: IntTerms = {}
    get = out.get
    bi = list(b.items())
    for ka, ca in a.items():
        for kb, cb in bi:
            k = ka + kb
            out[k] = get(k, 0) + ca * cb
    return {k: c for k, c in out.items() if c}


def add_terms(a: IntTerms, b: IntTerms, ma: int = 1, mb: int = 1) -> IntTerms:
    out = {k: c * ma for k, c in a.items()} if ma != 1 else dict(a)
    get = out.get
    for k, c in b.items():
        v = get(k, 0) + c * mb
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def pow_terms(a: IntTerms, n: int) -> IntTerms:
    result: IntTerms = {0: 1}
    base = a
    while n:
        if n & 1:
            result = mul_terms(result, base)
        n >>= 1
        if n:
            base = mul_terms(base, base)
    return result


def divmod_terms(a: IntTerms, b: IntTerms, chart: Chart, exact: bool) -> Optional[Tuple[Dict[int, Fraction], Dict[int, Fraction]]]:
    """Multivariate division of ``a`` by ``b`` under grlex.

    With ``exact`` the quotient is returned as integers and ``None`` signals
    that ``b`` does not divide ``a``; ``b`` must then be primitive.  Without
    ``exact`` this is the normal-form division (rational quotient and
    remainder, remainder free of multiples of LT(b)).
    """
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    lb = max(b)
    cb = b[lb]
    guard = chart.guard
    tail = [(k, c) for k, c in b.items() if k != lb]
    rem = dict(a)
    heap = [-k for k in rem]
    heapify(heap)
    quo: dict = {}
    remainder: dict = {}
    while heap:
        m = -heappop(heap)
        c = rem.pop(m, 0)
        if not c:
            continue
        if m < lb or ((m | guard) - lb) & guard != guard:
            if exact:
                return None
            remainder[m] = c
            continue
        if exact:
            qc, r = divmod(c, cb)
            if r:
                return None
        else:
            qc = Fraction(c) / cb
        d = m - lb
        quo[d] = qc
        for kt, ct in tail:
            k = d + kt
            old = rem.get(k)
            v = (old or 0) - qc * ct
            if v:
                if old is None:
                    heappush(heap, -k)
                rem[k] = v
            elif old is not None:
                del rem[k]
    return quo, remainder


# ---------------------------------------------------------------------------


class Poly:
    """Immutable sparse polynomial ``scale * sum(c_m * m)`` over a chart."""

    __slots__ = ("chart", "scale", "terms", "_hash")

    def __init__(self, chart: Chart, scale: Fraction, terms: IntTerms):
        # trusted constructor: terms primitive with positive LC, or empty with scale 0
        self.chart = chart
        self.scale = scale
        self.terms = terms
        self._hash = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_int_terms(cls, chart: Chart, terms: IntTerms, scale=ONE) -> "Poly":
        terms = {k: c for k, c in terms.items() if c}
        if not terms or not scale:
            return cls.zero(chart)
        g, prim = primitive(terms)
        return cls(chart, as_rat(scale) * g, prim)

    @classmethod
    def from_terms(cls, chart: Chart, terms: Mapping[int, object]) -> "Poly":
        """Build from ``{packed monomial: rational coefficient}``."""
        coeffs = {k: as_rat(c) for k, c in terms.items() if c}
        if not coeffs:
            return cls.zero(chart)
        den = 1
        for c in coeffs.values():
            den = den * c.denominator // gcd(den, c.denominator)
        ints = {k: c.numerator * (den // c.denominator) for k, c in coeffs.items()}
        return cls.from_int_terms(chart, ints, Fraction(1, den))

    @classmethod
    def from_exponents(cls, chart: Chart, terms: Mapping[Tuple[int, ...], object]) -> "Poly":
        return cls.from_terms(chart, {chart.pack(e): c for e, c in terms.items()})

    @classmethod
    def zero(cls, chart: Chart) -> "Poly":
        return cls(chart, ZERO, {})

    @classmethod
    def const(cls, chart: Chart, value) -> "Poly":
        value = as_rat(value)
        if not value:
            return cls.zero(chart)
        return cls(chart, value, {0: 1})

    @classmethod
    def symbol(cls, chart: Chart, name: str) -> "Poly":
        return cls(chart, ONE, {chart.unit(chart.position(name)): 1})

    # -- basic queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.scale if self.terms else ZERO

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __len__(self) -> int:
        return len(self.terms)

    def items(self) -> Iterator[Tuple[int, Fraction]]:
        s = self.scale
        for k, c in self.terms.items():
            yield k, s * c

    def coefficient(self, exps) -> Fraction:
        return self.scale * self.terms.get(self.chart.pack(exps), 0)

    def lead_key(self) -> int:
        return max(self.terms)

    def lead_coeff(self) -> Fraction:
        return self.scale * self.terms[max(self.terms)]

    def used_positions(self) -> Tuple[int, ...]:
        acc = 0
        for k in self.terms:
            acc |= k
        ch = self.chart
        return tuple(i for i, sh in enumerate(ch.shifts) if (acc >> sh) & ch.field_mask)

    def used_symbols(self) -> Tuple[str, ...]:
        syms = self.chart.symbols
        return tuple(syms[i] for i in self.used_positions())

    def degree(self, name: Optional[str] = None) -> int:
        if not self.terms:
            return -1
        if name is None:
            return max(self.terms) >> self.chart.degree_shift
        i = self.chart.position(name)
        return max(self.chart.exponent(k, i) for k in self.terms)

    def degree_over(self, positions) -> int:
        """Maximal total degree counting only the symbols at ``positions``."""
        if not self.terms:
            return -1
        ch = self.chart
        return max(sum(ch.exponent(k, i) for i in positions) for k in self.terms)

    def state_degree(self) -> int:
        return self.degree_over(range(self.chart.dim))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.chart != self.chart:
                raise ChartError(f"chart mismatch: {self.chart.name} vs {other.chart.name}")
            return other
        return Poly.const(self.chart, other)

    def __add__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        s1, s2 = self.scale, other.scale
        n = gcd(s1.numerator, s2.numerator)
        d = s1.denominator * s2.denominator // gcd(s1.denominator, s2.denominator)
        common = Fraction(n, d)
        m1 = s1 / common
        m2 = s2 / common
        terms = add_terms(self.terms, other.terms, m1.numerator, m2.numerator)
        return Poly.from_int_terms(self.chart, terms, common)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.chart, -self.scale, self.terms)

    def __sub__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other or not self.terms:
                return Poly.zero(self.chart)
            return Poly(self.chart, self.scale * other, self.terms)
        if not isinstance(other, Poly):
            return NotImplemented
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.chart)
        return Poly(self.chart, self.scale * other.scale, mul_terms(self.terms, other.terms))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers need a nonnegative integer exponent")
        if n == 0:
            return Poly.const(self.chart, 1)
        return Poly(self.chart, self.scale ** n, pow_terms(self.terms, n))

    def divexact(self, other: "Poly") -> Optional["Poly"]:
        """Exact quotient ``self / other``, or ``None`` if not divisible."""
        other = self._coerce(other)
        if not other.terms:
            raise ZeroDivisionError("polynomial division by zero")
        if not self.terms:
            return self
        if other.is_constant():
            return Poly(self.chart, self.scale / other.scale, self.terms)
        res = divmod_terms(self.terms, other.terms, self.chart, exact=True)
        if res is None:
            return None
        return Poly(self.chart, self.scale / other.scale, res[0])

    def divmod(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        """Normal-form division: ``self = q * other + r`` with r reduced mod LT(other)."""
        other = self._coerce(other)
        q, r = divmod_terms(self.terms, other.terms, self.chart, exact=False)
        f = self.scale / other.scale
        return (Poly.from_terms(self.chart, {k: c * f for k, c in q.items()}),
                Poly.from_terms(self.chart, {k: c * self.scale for k, c in r.items()}))

    # -- calculus and evaluation -------------------------------------------

    def diff(self, name: str) -> "Poly":
        ch = self.chart
        i = ch.position(name)
        unit = ch.unit(i)
        out = {}
        for k, c in self.terms.items():
            e = ch.exponent(k, i)
            if e:
                out[k - unit] = c * e
        return Poly.from_int_terms(ch, out, self.scale)

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        """Exact value at rational ``values`` (every used symbol required)."""
        ch = self.chart
        pos = self.used_positions()
        vals = {}
        for i in pos:
            name = ch.symbols[i]
            if name not in values:
                raise ChartError(f"no value supplied for {name!r}")
            vals[i] = as_rat(values[name])
        total = ZERO
        cache: dict = {}
        for k, c in self.terms.items():
            term = Fraction(c)
            for i in pos:
                e = ch.exponent(k, i)
                if e:
                    key = (i, e)
                    p = cache.get(key)
                    if p is None:
                        p = cache[key] = vals[i] ** e
                    term *= p
            total += term
        return total * self.scale

    def monomial_content(self) -> int:
        """Packed key of the largest monomial dividing every term."""
        if not self.terms:
            return 0
        ch = self.chart
        mins = None
        for k in self.terms:
            e = ch.unpack(k)
            mins = list(e) if mins is None else [min(a, b) for a, b in zip(mins, e)]
        return ch.pack(mins)

    def coefficients_in(self, name: str) -> Dict[int, "Poly"]:
        """Write ``self`` as ``sum_e C_e * name**e``; returns ``{e: C_e}``."""
        ch = self.chart
        i = ch.position(name)
        groups: Dict[int, IntTerms] = {}
        for k, c in self.terms.items():
            e = ch.exponent(k, i)
            groups.setdefault(e, {})[k - ch.unit(i, e) if e else k] = c
        return {e: Poly.from_int_terms(ch, t, self.scale) for e, t in groups.items()}

    def rechart(self, chart: Chart, rename: Optional[Mapping[str, str]] = None) -> "Poly":
        """Re-express over ``chart``, matching symbols by name (after ``rename``)."""
        if chart == self.chart and not rename:
            return self
        src = self.chart
        rename = rename or {}
        mapping = []
        for i in self.used_positions():
            name = rename.get(src.symbols[i], src.symbols[i])
            mapping.append((i, chart.position(name)))
        out = {}
        for k, c in self.terms.items():
            key = 0
            for i, j in mapping:
                e = src.exponent(k, i)
                if e:
                    key += chart.unit(j, e)
            out[key] = out.get(key, 0) + c
        return Poly.from_int_terms(chart, out, self.scale)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, Poly):
            return NotImplemented
        return (self.chart == other.chart and self.scale == other.scale
                and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart.name, self.scale, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        from .parse import format_poly
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        from .parse import format_poly
        return format_poly(self)

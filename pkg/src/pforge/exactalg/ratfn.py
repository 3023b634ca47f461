"""Canonical rational functions over a chart.

A :class:`RatFn` is ``num / den`` with ``gcd(num, den) = 1`` and ``den`` a
primitive integer polynomial with positive leading coefficient, so equal
rational functions are structurally equal.  Alongside ``den`` each value
keeps a factored form ``den = prod(b ** e)`` (the *basis*).  The factors are
not irreducible in general, only coprime to the numerator; they make
addition, differentiation and substitution far cheaper than working with the
expanded denominator.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .chart import Chart, ChartError
from .gcd import gcd_terms
from .poly import ONE, Poly, as_rat

Basis = Tuple[Tuple[Poly, int], ...]


def _monic_part(p: Poly) -> Poly:
    return Poly(p.chart, ONE, p.terms)


def _prepare(chart: Chart, factors: Iterable[Tuple[Poly, int]]) -> Dict[Poly, int]:
    """Split monomial content into single-symbol bases and merge repeats."""
    acc: Dict[Poly, int] = {}
    for b, e in factors:
        if e == 0 or b.is_constant():
            continue
        if e < 0:
            raise ValueError("negative exponent in denominator basis")
        mc = b.monomial_content()
        if mc:
            for i, k in enumerate(chart.unpack(mc)):
                if k:
                    xi = Poly(chart, ONE, {chart.unit(i): 1})
                    acc[xi] = acc.get(xi, 0) + k * e
            b = Poly(chart, ONE, {m - mc: c for m, c in b.terms.items()})
            if b.is_constant():
                continue
        else:
            b = _monic_part(b)
        acc[b] = acc.get(b, 0) + e
    return acc


def _reduce(num: Poly, factors: Dict[Poly, int]) -> Tuple[Poly, Dict[Poly, int]]:
    """Cancel common factors of ``num`` against ``prod(b ** e)``."""
    if num.is_zero():
        return num, {}
    chart = num.chart
    work = list(factors.items())
    out: Dict[Poly, int] = {}
    while work:
        b, e = work.pop()
        while e:
            q = num.divexact(b)
            if q is None:
                break
            num = q
            e -= 1
        if not e:
            continue
        if len(b.terms) > 1 and not num.is_constant():
            g = gcd_terms(num.terms, b.terms, chart)
            if not (len(g) == 1 and 0 in g):
                gp = Poly(chart, ONE, g)
                h = b.divexact(gp)
                work.append((gp, e))
                if not h.is_constant():
                    work.append((_monic_part(h), e))
                continue
        out[b] = out.get(b, 0) + e
    return num, out


def _expand(chart: Chart, basis: Mapping[Poly, int]) -> Poly:
    den = Poly.const(chart, 1)
    for b, e in basis.items():
        den = den * (b ** e)
    return den


def _sorted_basis(basis: Mapping[Poly, int]) -> Basis:
    return tuple(sorted(((b, e) for b, e in basis.items() if e),
                        key=lambda be: (len(be[0].terms), max(be[0].terms), be[1])))


class RatFn:
    """Immutable canonical quotient of two polynomials over one chart."""

    __slots__ = ("num", "den", "basis", "_hash")

    def __init__(self, num: Poly, den: Poly, basis: Basis):
        # trusted constructor; use the classmethods for unnormalized input
        self.num = num
        self.den = den
        self.basis = basis
        self._hash = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def _build(cls, num: Poly, factors: Mapping[Poly, int], reduce: bool = True) -> "RatFn":
        chart = num.chart
        if num.is_zero():
            return cls(num, Poly.const(chart, 1), ())
        if reduce:
            num, factors = _reduce(num, dict(factors))
        basis = _sorted_basis(factors)
        return cls(num, _expand(chart, dict(basis)), basis)

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFn":
        return cls(p, Poly.const(p.chart, 1), ())

    @classmethod
    def fraction(cls, num: Poly, den: Poly) -> "RatFn":
        """Normalize ``num / den``."""
        if den.chart != num.chart:
            raise ChartError("numerator and denominator live on different charts")
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        num = num * (1 / den.scale)
        return cls._build(num, _prepare(num.chart, [(den, 1)]))

    @classmethod
    def const(cls, chart: Chart, value) -> "RatFn":
        return cls.from_poly(Poly.const(chart, value))

    @classmethod
    def symbol(cls, chart: Chart, name: str) -> "RatFn":
        return cls.from_poly(Poly.symbol(chart, name))

    @classmethod
    def parse(cls, text: str, chart: Chart) -> "RatFn":
        from .parse import parse
        return parse(text, chart)

    # -- queries ------------------------------------------------------------

    @property
    def chart(self) -> Chart:
        return self.num.chart

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.basis

    def is_constant(self) -> bool:
        return not self.basis and self.num.is_constant()

    def constant_value(self) -> Fraction:
        if self.basis:
            raise ValueError("rational function is not constant")
        return self.num.constant_value()

    def as_poly(self) -> Poly:
        if self.basis:
            raise ValueError(f"not a polynomial: denominator {self.den}")
        return self.num

    def used_symbols(self) -> Tuple[str, ...]:
        used = set(self.num.used_symbols())
        for b, _ in self.basis:
            used.update(b.used_symbols())
        return tuple(s for s in self.chart.symbols if s in used)

    def is_polynomial_in(self, names: Optional[Sequence[str]] = None) -> bool:
        """True when the denominator is free of ``names`` (default: state variables)."""
        names = set(self.chart.vars if names is None else names)
        return not any(s in names for s in self.den.used_symbols())

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "RatFn":
        if isinstance(other, RatFn):
            if other.chart != self.chart:
                raise ChartError(f"chart mismatch: {self.chart.name} vs {other.chart.name}")
            return other
        if isinstance(other, Poly):
            if other.chart != self.chart:
                raise ChartError(f"chart mismatch: {self.chart.name} vs {other.chart.name}")
            return RatFn.from_poly(other)
        if isinstance(other, (int, Fraction)):
            return RatFn.const(self.chart, other)
        raise TypeError(f"cannot combine RatFn with {type(other).__name__}")

    def __add__(self, other):
        if not isinstance(other, (RatFn, Poly, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if not self.basis and not other.basis:
            return RatFn.from_poly(self.num + other.num)
        fa, fb = dict(self.basis), dict(other.basis)
        if fa == fb:
            return RatFn._build(self.num + other.num, fa)
        common = {b: min(e, fb[b]) for b, e in fa.items() if b in fb}
        ra = {b: e - common.get(b, 0) for b, e in fa.items() if e > common.get(b, 0)}
        rb = {b: e - common.get(b, 0) for b, e in fb.items() if e > common.get(b, 0)}
        num = self.num * _expand(self.chart, rb) + other.num * _expand(self.chart, ra)
        factors = dict(common)
        for part in (ra, rb):
            for b, e in part.items():
                factors[b] = factors.get(b, 0) + e
        return RatFn._build(num, factors)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den, self.basis)

    def __sub__(self, other):
        if not isinstance(other, (RatFn, Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RatFn.const(self.chart, 0)
            return RatFn(self.num * other, self.den, self.basis)
        if not isinstance(other, (RatFn, Poly)):
            return NotImplemented
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RatFn.const(self.chart, 0)
        n1, b2 = _reduce(self.num, dict(other.basis)) if other.basis else (self.num, {})
        n2, b1 = _reduce(other.num, dict(self.basis)) if self.basis else (other.num, {})
        factors = dict(b1)
        for b, e in b2.items():
            factors[b] = factors.get(b, 0) + e
        return RatFn._build(n1 * n2, factors, reduce=False)

    __rmul__ = __mul__

    def inverse(self) -> "RatFn":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        num = self.den * (1 / self.num.scale)
        factors = _prepare(self.chart, [(self.num, 1)])
        return RatFn._build(num, factors, reduce=False)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return RatFn(self.num * (1 / as_rat(other)), self.den, self.basis)
        if not isinstance(other, (RatFn, Poly)):
            return NotImplemented
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("rational function powers need an integer exponent")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return RatFn.const(self.chart, 1)
        basis = tuple((b, e * n) for b, e in self.basis)
        return RatFn(self.num ** n, self.den ** n, basis)

    # -- calculus -----------------------------------------------------------

    def diff(self, name: str) -> "RatFn":
        chart = self.chart
        chart.position(name)
        dn = self.num.diff(name)
        if not self.basis:
            return RatFn.from_poly(dn)
        moving = [(b, e, b.diff(name)) for b, e in self.basis]
        moving = [(b, e, db) for b, e, db in moving if not db.is_zero()]
        factors = dict(self.basis)
        if not moving:
            return RatFn._build(dn, factors)
        rad = Poly.const(chart, 1)
        for b, _, _ in moving:
            rad = rad * b
        acc = Poly.zero(chart)
        for b, e, db in moving:
            acc = acc + db * rad.divexact(b) * e
        num = dn * rad - self.num * acc
        for b, _, _ in moving:
            factors[b] += 1
        return RatFn._build(num, factors)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        d = self.den.evaluate(values) if self.basis else ONE
        if not d:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(values) / d

    def probably_equal(self, other: "RatFn", points: int = 3, seed: int = 0) -> bool:
        """Screen equality by exact evaluation at random rational points."""
        other = self._coerce(other)
        rng = random.Random(seed)
        syms = self.chart.symbols
        done = tries = 0
        while done < points:
            tries += 1
            if tries > 50 * points:
                raise ArithmeticError("could not find evaluation points avoiding the denominators")
            vals = {s: Fraction(rng.randint(-97, 97), rng.randint(1, 31)) for s in syms}
            try:
                a = self.evaluate(vals)
                b = other.evaluate(vals)
            except ZeroDivisionError:
                continue
            if a != b:
                return False
            done += 1
        return True

    # -- substitution -------------------------------------------------------

    def substitute(self, bindings: Mapping[str, "RatFn"], target: Optional[Chart] = None) -> "RatFn":
        """Compose with ``bindings`` (symbol -> RatFn over ``target``).

        Unbound symbols are carried over to ``target`` by name.
        """
        return Substitution(self.chart, bindings, target).apply(self)

    def rechart(self, chart: Chart, rename: Optional[Mapping[str, str]] = None) -> "RatFn":
        if chart == self.chart and not rename:
            return self
        num = self.num.rechart(chart, rename)
        factors = _prepare(chart, [(b.rechart(chart, rename), e) for b, e in self.basis])
        return RatFn._build(num, factors, reduce=False)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Poly)):
            try:
                other = self._coerce(other)
            except ChartError:
                return False
        if not isinstance(other, RatFn):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self):
        from .parse import format_ratfn
        return f"RatFn({format_ratfn(self)!r})"

    def __str__(self):
        from .parse import format_ratfn
        return format_ratfn(self)


class Substitution:
    """Reusable composition ``f -> f(bindings)`` from ``source`` into ``target``."""

    def __init__(self, source: Chart, bindings: Mapping[str, RatFn], target: Optional[Chart] = None):
        if target is None:
            charts = {v.chart for v in bindings.values()}
            if len(charts) != 1:
                raise ChartError("bindings must share one target chart")
            target = charts.pop()
        self.source = source
        self.target = target
        self.bindings: Dict[int, RatFn] = {}
        for name, value in bindings.items():
            i = source.position(name)
            if isinstance(value, Poly):
                value = RatFn.from_poly(value)
            elif isinstance(value, (int, Fraction)):
                value = RatFn.const(target, value)
            if value.chart != target:
                raise ChartError(f"binding for {name!r} is not over chart {target.name!r}")
            self.bindings[i] = value
        self._poly_cache: Dict[Poly, RatFn] = {}
        self._pow_cache: Dict[Tuple[int, int], Poly] = {}

    def _target_position(self, i: int) -> int:
        name = self.source.symbols[i]
        try:
            return self.target.position(name)
        except ChartError:
            raise ChartError(f"symbol {name!r} is neither bound nor present in chart {self.target.name!r}") from None

    def apply_poly(self, p: Poly) -> RatFn:
        cached = self._poly_cache.get(p)
        if cached is not None:
            return cached
        out = self._apply_poly(p)
        self._poly_cache[p] = out
        return out

    def _apply_poly(self, p: Poly) -> RatFn:
        src, tgt = self.source, self.target
        if p.is_zero():
            return RatFn.const(tgt, 0)
        used = p.used_positions()
        bound = [i for i in used if i in self.bindings]
        free = [(i, self._target_position(i)) for i in used if i not in self.bindings]
        # group terms by their bound exponent vector
        groups: Dict[Tuple[int, ...], Dict[int, int]] = {}
        for k, c in p.terms.items():
            m = tuple(src.exponent(k, i) for i in bound)
            key = 0
            for i, j in free:
                e = src.exponent(k, i)
                if e:
                    key += tgt.unit(j, e)
            g = groups.setdefault(m, {})
            g[key] = g.get(key, 0) + c
        if not bound:
            (terms,) = groups.values()
            return RatFn.from_poly(Poly.from_int_terms(tgt, terms, p.scale))
        vals = [self.bindings[i] for i in bound]
        lcm: Dict[Poly, int] = {}
        for v in vals:
            for b, e in v.basis:
                lcm[b] = max(lcm.get(b, 0), e)
        nums = []
        for v in vals:
            have = dict(v.basis)
            cof = _expand(tgt, {b: e - have.get(b, 0) for b, e in lcm.items()})
            nums.append(v.num * cof)
        L = _expand(tgt, lcm)
        d = max(sum(m) for m in groups)
        pows: Dict[Tuple[int, int], Poly] = {}

        def power(j: int, e: int) -> Poly:
            key = (j, e)
            r = pows.get(key)
            if r is None:
                base = nums[j] if j >= 0 else L
                r = pows[key] = base ** e
            return r

        acc = Poly.zero(tgt)
        for m, terms in groups.items():
            term = Poly.from_int_terms(tgt, terms, p.scale)
            for j, e in enumerate(m):
                if e:
                    term = term * power(j, e)
            if lcm and d - sum(m):
                term = term * power(-1, d - sum(m))
            acc = acc + term
        return RatFn._build(acc, {b: e * d for b, e in lcm.items()})

    def apply(self, f: RatFn) -> RatFn:
        if f.chart != self.source:
            raise ChartError(f"expression over {f.chart.name!r}, substitution expects {self.source.name!r}")
        return self._apply_fraction(f.num, list(f.basis))

    def _apply_fraction(self, num: Poly, basis: List[Tuple[Poly, int]]) -> RatFn:
        if not basis:
            return self.apply_poly(num)
        # expand num in powers of one base so every piece stays small
        b, e = basis[0]
        rest = basis[1:]
        sb = self.apply_poly(b)
        if sb.is_zero():
            raise ZeroDivisionError(f"substitution sends denominator factor {b} to zero")
        acc = RatFn.const(self.target, 0)
        k = 0
        rem = num
        while not rem.is_zero():
            rem, piece = rem.divmod(b)
            if not piece.is_zero():
                acc = acc + self._apply_fraction(piece, rest) * (sb ** (k - e))
            k += 1
        return acc

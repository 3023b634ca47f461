"""Text form of polynomials and rational functions.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom (('^' | '**') INT)?
    atom   := INT | IDENT | '(' expr ')'

Exponents are nonnegative integer literals.  ``-x^2`` parses as ``-(x^2)``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Tuple

from .chart import Chart, ChartError
from .poly import Poly
from .ratfn import RatFn


class ParseError(ValueError):
    """Syntax or name error, with the character offset where it occurred."""

    def __init__(self, message: str, text: str, pos: int):
        self.pos = pos
        self.text = text
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {text}\n  {pointer}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("int", m.group(1), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        else:
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self) -> RatFn:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return value

    def expr(self) -> RatFn:
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RatFn:
        value = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            tok = self.take()
            rhs = self.unary()
            if tok[1] == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    self.fail("division by zero", tok)
                value = value / rhs
        return value

    def unary(self) -> RatFn:
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if tok[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> RatFn:
        base = self.atom()
        if self.peek()[:2] in (("op", "^"), ("op", "**")):
            self.take()
            tok = self.peek()
            if tok[0] != "int":
                self.fail("exponent must be a nonnegative integer literal")
            self.take()
            return base ** int(tok[1])
        return base

    def atom(self) -> RatFn:
        tok = self.take()
        kind, val, _ = tok
        if kind == "int":
            return RatFn.const(self.chart, int(val))
        if kind == "name":
            try:
                return RatFn.symbol(self.chart, val)
            except ChartError:
                self.fail(f"unknown identifier {val!r} (chart symbols: {', '.join(self.chart.symbols)})", tok)
        if tok[:2] == ("op", "("):
            value = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.take()
            return value
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected {val!r}", tok)


def parse(text: str, chart: Chart) -> RatFn:
    """Parse ``text`` into a canonical :class:`RatFn` over ``chart``."""
    return _Parser(text, chart).parse()


def parse_poly(text: str, chart: Chart) -> Poly:
    f = parse(text, chart)
    if not f.is_polynomial():
        raise ValueError(f"expected a polynomial, got {f}")
    return f.num


# -- formatting -------------------------------------------------------------


def _format_monomial(chart: Chart, key: int) -> str:
    parts = []
    for name, e in zip(chart.symbols, chart.unpack(key)):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    chunks = []
    for key in sorted(p.terms, reverse=True):
        c = p.scale * p.terms[key]
        mono = _format_monomial(p.chart, key)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coeff(a)}*{mono}"
        chunks.append((sign, body))
    first_sign, first = chunks[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in chunks[1:]:
        out += f" {sign} {body}"
    return out


def _wrap(s: str) -> str:
    return s if re.fullmatch(r"[A-Za-z_0-9^]+", s) else f"({s})"


def format_ratfn(f: RatFn) -> str:
    if f.is_polynomial():
        return format_poly(f.num)
    factors = []
    for b, e in f.basis:
        s = _wrap(format_poly(b))
        factors.append(s if e == 1 else f"{s}^{e}")
    den = "*".join(factors)
    if len(factors) > 1:
        den = f"({den})"
    return f"{_wrap(format_poly(f.num))}/{den}"

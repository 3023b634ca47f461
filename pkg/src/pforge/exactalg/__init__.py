"""Exact rational arithmetic: charts, polynomials, rational functions, parsing."""

from fractions import Fraction as Rat

from .chart import Chart, ChartError
from .gcd import gcd_terms
from .parse import ParseError, format_poly, format_ratfn, parse, parse_poly
from .poly import Poly
from .ratfn import RatFn, Substitution


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd of two polynomials (positive leading coefficient)."""
    if a.chart != b.chart:
        raise ChartError("gcd of polynomials on different charts")
    g = gcd_terms(a.terms, b.terms, a.chart)
    return Poly.from_int_terms(a.chart, g) if g else Poly.zero(a.chart)


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    if a.chart != b.chart:
        raise ChartError(f"chart mismatch: {a.chart.name} vs {b.chart.name}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def diff(f: RatFn, v: str) -> RatFn:
    return f.diff(v)


def substitute(f: RatFn, bindings, target: Chart | None = None) -> RatFn:
    return f.substitute(bindings, target)


format = format_ratfn

__all__ = [
    "Rat", "Chart", "ChartError", "Poly", "RatFn", "Substitution", "ParseError",
    "parse", "parse_poly", "format", "format_poly", "format_ratfn", "poly_gcd",
    "poly_arith", "diff", "substitute",
]

from __future__ import annotations

import sys
from fractions import Fraction

import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pforge.exactalg import Chart, Poly, RatFn

settings.register_profile("pforge", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pforge")

# at least this many randomized cases per algebra property
CASES = 500

XYZ = Chart("xyz", ("x", "y", "z"))
QP = Chart("qp", ("q", "p", "r", "s"), pairs=((0, 1), (2, 3)))
SYM = {c.name: sympy.symbols(" ".join(c.symbols)) for c in (XYZ, QP)}

coeffs = st.fractions(min_value=-9, max_value=9, max_denominator=4)


def term_dicts(nvars: int, max_terms: int = 4, max_exp: int = 3):
    exps = st.tuples(*[st.integers(0, max_exp)] * nvars)
    return st.dictionaries(exps, coeffs, max_size=max_terms)


def polys(chart: Chart = XYZ, max_terms: int = 4, max_exp: int = 3):
    return term_dicts(chart.dim, max_terms, max_exp).map(lambda d: Poly.from_exponents(chart, d))


def nonzero_polys(chart: Chart = XYZ, max_terms: int = 3, max_exp: int = 2):
    return polys(chart, max_terms, max_exp).filter(lambda p: not p.is_zero())


def to_sympy(p) -> sympy.Expr:
    """Independent conversion: walks the term table, never the formatter."""
    if isinstance(p, RatFn):
        return to_sympy(p.num) / to_sympy(p.den)
    syms = SYM[p.chart.name]
    out = sympy.Integer(0)
    for key, c in p.items():
        mono = sympy.Integer(1)
        for s, e in zip(syms, p.chart.unpack(key)):
            mono *= s ** e
        out += sympy.Rational(c.numerator, c.denominator) * mono
    return out


def sym_equal(a, b) -> bool:
    return sympy.cancel(sympy.together(a - b)) == 0


def sym_poly(p: Poly) -> sympy.Poly:
    return sympy.Poly(to_sympy(p), *SYM[p.chart.name], domain="QQ")


def frac_equal(f: RatFn, num: sympy.Poly, den: sympy.Poly) -> bool:
    """``f == num/den`` by cross-multiplication over QQ."""
    return (sym_poly(f.num) * den - num * sym_poly(f.den)).is_zero


@pytest.fixture(scope="session")
def eq1_pipeline():
    from pforge.singularity import load_script, run_script

    return run_script(load_script("eq1"))


@pytest.fixture(scope="session")
def pii_pipeline():
    from pforge.singularity import load_script, run_script

    return run_script(load_script("PII"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if not mod or not getattr(mod, "OUTCOMES", None):
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, why) in mod.OUTCOMES.items():
        terminalreporter.write_line(mod.line(key, ok, why))

from __future__ import annotations

import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from pforge.exactalg import Chart, RatFn, parse
from pforge.singularity import (ALL_POSITIVE, MIXED, NON_INTEGER, DivisorChart, SingularityError,
                                alpha_test, charpoly, classify_ratios, find_accessible_singularities,
                                is_divisor_form, load_script, local_index, rational_roots, ratios,
                                run_pipeline, solve_row_pair, split_over_q)
from pforge.systems import VectorField
from pforge.systems import registry as R

F = Fraction


def field(chart, exprs):
    return VectorField(chart, tuple(parse(e, chart) for e in exprs))


# -- roots and characteristic polynomials ------------------------------------------


def test_rational_roots_with_multiplicity():
    # (x-1)^2 (2x+3)
    coeffs = [F(2), F(-1), F(-4), F(3)]
    assert sorted(rational_roots(coeffs)) == [(F(-3, 2), 1), (F(1), 2)]
    roots, rest = split_over_q([F(1), F(0), F(-2)])  # x^2 - 2
    assert roots == [] and len(rest) == 3


@settings(max_examples=200)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=3), min_size=1, max_size=4))
def test_roots_of_products_are_recovered(rs):
    x = sympy.Symbol("x")
    p = sympy.Poly(sympy.prod([x - sympy.Rational(r.numerator, r.denominator) for r in rs]), x)
    coeffs = [F(int(c.p), int(c.q)) for c in p.all_coeffs()]
    got = sorted(r for r, m in rational_roots(coeffs) for _ in range(m))
    assert got == sorted(rs)


@settings(max_examples=100)
@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=3, max_size=3))
def test_charpoly_matches_sympy(rows):
    C = Chart("m", ("x",))
    A = tuple(tuple(RatFn.const(C, v) for v in row) for row in rows)
    ours = [c.constant_value() for c in charpoly(A)]
    lam = sympy.Symbol("lam")
    ref = sympy.Matrix(rows).charpoly(lam).all_coeffs()
    assert ours == [F(int(c)) for c in ref]


# -- divisor form and accessible points ----------------------------------------------


def test_divisor_form_detection():
    C = Chart("c", ("x", "y"), "t")
    assert is_divisor_form(field(C, ("1", "(y^2-1)/x")), "x")
    assert not is_divisor_form(field(C, ("1", "y/x^2")), "x")
    with pytest.raises(SingularityError):
        DivisorChart(field(C, ("1", "y")), "z")


def test_no_accessible_points_when_g2_is_one():
    C = Chart("c", ("x", "y"), "t")
    D = DivisorChart(field(C, ("1", "1/x")), "x")
    assert find_accessible_singularities(D) == []


def test_pii_first_chart(pii_pipeline):
    rec = pii_pipeline.record("Step 1")
    pts = sorted(tuple(p.values()) for p in rec.singularities)
    assert pts == [(0, -1), (0, 1)]
    li = local_index(rec.divisor, (0, 1))
    assert li.eigenvalues == (-1, -4)


def test_eq1_first_chart_points(eq1_pipeline):
    rec = eq1_pipeline.record("Step 1")
    pts = {tuple(p.values()) for p in rec.singularities}
    assert pts == {(0, -1, 2, -6), (0, F(1, 2), F(1, 2), F(3, 4)), (0, F(1, 3), F(2, 9), F(2, 9)),
                   (0, F(-1, 4), F(1, 8), F(-3, 32))}


def test_loci_are_parametrised_as_printed(eq1_pipeline):
    assert [str(p) for p in eq1_pipeline.record("Step 4").singularities] == ["(0, y4, -2*y4, 8*y4)"]
    assert [str(p) for p in eq1_pipeline.record("Step 5").singularities] == ["(0, y5, z5, -2*z5)"]


@settings(max_examples=24, deadline=None)
@given(st.permutations(["y1", "z1", "w1"]))
def test_points_commute_with_relabeling(perm):
    # reorder the non-divisor variables of the first chart of the eq1 pipeline
    res = _eq1_step1()
    V = res.field
    order = ["x1", *perm]
    C = Chart("perm", tuple(order), V.chart.time_var, V.chart.params)
    comps = tuple(V[v].rechart(C) for v in order)
    D = DivisorChart(VectorField(C, comps), "x1")
    got = {tuple(dict(zip(order, p.values()))[v] for v in V.chart.vars) for p in find_accessible_singularities(D)}
    ref = {tuple(p.values()) for p in res.singularities}
    assert got == ref


_CACHE = {}


def _eq1_step1():
    if "s1" not in _CACHE:
        from pforge.singularity import run_script

        _CACHE["s1"] = run_script(load_script("eq1")).record("Step 1")
    return _CACHE["s1"]


# -- local index --------------------------------------------------------------------


def test_default_order_is_divisor_first_then_ascending(eq1_pipeline):
    D = eq1_pipeline.record("Step 1").divisor
    li = local_index(D, (0, F(1, 3), F(2, 9), F(2, 9)))
    assert li.eigenvalues == (F(-1, 3), F(-7, 3), F(-2), F(2, 3))
    assert li.certificate is None


def test_certificate_fixes_printed_order(eq1_pipeline):
    D = eq1_pipeline.record("Step 1").divisor
    T = ((1, 0, 0, 0), (0, F(1, 4), F(3, 4), F(1, 2)), (0, F(1, 2), F(-1, 2), F(-1, 2)), (0, 1, 1, 1))
    li = local_index(D, (0, F(1, 3), F(2, 9), F(2, 9)), certificate=T)
    assert li.eigenvalues == (F(-1, 3), F(2, 3), F(-2), F(-7, 3))
    assert li.ratios == (-2, 6, 7) and li.classification == MIXED


def test_bad_certificate_is_rejected(eq1_pipeline):
    D = eq1_pipeline.record("Step 1").divisor
    with pytest.raises(SingularityError):
        local_index(D, (0, F(1, 3), F(2, 9), F(2, 9)), certificate=[[1, 0, 0, 0], [0, 1, 0, 0],
                                                                  [0, 0, 1, 0], [0, 0, 0, 1]])


def test_non_accessible_point_is_rejected(eq1_pipeline):
    D = eq1_pipeline.record("Step 1").divisor
    with pytest.raises(SingularityError, match="not accessible"):
        local_index(D, (0, 1, 1, 1))


def test_non_splitting_charpoly_is_an_error():
    C = Chart("c", ("x", "y", "z"))
    # linear part with eigenvalues 1 and +-sqrt(2) on the non-divisor block
    D = DivisorChart(field(C, ("1", "(z)/x", "(2*y)/x")), "x")
    with pytest.raises(SingularityError, match="split"):
        local_index(D, (0, 0, 0))


def test_step7_linear_part(eq1_pipeline):
    rec = eq1_pipeline.record("Step 7")
    li = local_index(rec.divisor, (0, 0, 0, 0))
    assert li.eigenvalues == (1, 0, 0, 2)
    lp = li.linear_part_values()
    C = rec.field.chart
    assert lp[2][0] == parse("-t/2", C) and lp[3][0] == parse("alpha + 1/2", C)


@pytest.mark.parametrize("eig,rat,cls", [
    ((1, 2, 3, 6), (2, 3, 6), ALL_POSITIVE),
    ((F(1, 4), 3, F(-7, 4), F(3, 2)), (12, -7, 6), MIXED),
    ((F(-1, 2), -1, F(-3, 2), -3), (2, 3, 6), ALL_POSITIVE),
    ((1, 0, 0, 2), (0, 0, 2), MIXED),
    ((2, 1, 3), (F(1, 2), F(3, 2)), NON_INTEGER),
])
def test_classify(eig, rat, cls):
    assert ratios(eig) == tuple(F(r) for r in rat)
    assert classify_ratios(eig) == cls


def test_zero_divisor_eigenvalue():
    with pytest.raises(SingularityError):
        ratios((0, 1))


# -- alpha test ------------------------------------------------------------------------


def test_row_pair_generic_closed_form():
    r = solve_row_pair(1, F(1, 2), 2)
    assert not r.logarithmic and r.exponent == 2 and r.single_valued
    # check the ODE dX2/dT = a22 X2/X1 + a21 numerically
    T, C1, C2, h = 0.7, 0.3, 1.1, 1e-5
    d = (r.evaluate(T + h, C1, C2) - r.evaluate(T - h, C1, C2)) / (2 * h)
    X1 = T + C1
    assert math.isclose(d, 2 * r.evaluate(T, C1, C2) / X1 + 0.5, rel_tol=1e-8)
    assert not solve_row_pair(2, 0, 1).single_valued


def test_row_pair_resonant_case_needs_a21_zero():
    r = solve_row_pair(1, 3, 1)
    assert r.logarithmic and not r.single_valued and "Log" in r.formula
    assert solve_row_pair(1, 0, 1).single_valued
    T, C1, C2, h = 0.4, 0.5, 0.2, 1e-5
    d = (r.evaluate(T + h, C1, C2) - r.evaluate(T - h, C1, C2)) / (2 * h)
    assert math.isclose(d, r.evaluate(T, C1, C2) / (T + C1) + 3, rel_tol=1e-8)
    with pytest.raises(SingularityError):
        solve_row_pair(0, 1, 1)


def test_alpha_test_on_first_point(eq1_pipeline):
    D = eq1_pipeline.record("Step 1").divisor
    T = ((1, 0, 0, 0), (0, 1, 1, 1), (0, -2, -1, 2), (0, 8, 6, 12))
    res = alpha_test(D, (0, -1, 2, -6), certificate=T)
    assert res.matrix[0][0] == 1
    assert all(r.exponent is not None and r.exponent.denominator == 1 for r in res.rows)


# -- pipelines --------------------------------------------------------------------------


def test_empty_script_leaves_field_unchanged():
    V = R.get("sys3")
    res = run_pipeline(V, [])
    assert res.final_field is V and res.records == []


def test_each_divisor_step_keeps_numerators_polynomial(eq1_pipeline):
    for rec in eq1_pipeline.records:
        if rec.divisor is not None:
            assert all(n.is_polynomial_in() for n in rec.divisor.numerators)


def test_script_files_are_data():
    doc = load_script("eq1")
    assert doc["system"] == "eq1.firstorder" and len(doc["steps"]) == 9
    assert len(load_script("PII")["steps"]) == 6


def test_undefined_step_reports_label():
    C = Chart("c", ("x", "y"), "t")
    V = field(C, ("1", "y"))
    with pytest.raises(SingularityError, match="bad"):
        run_pipeline(V, [{"label": "bad", "type": "change", "vars": ["a", "b"], "forward": {"a": "x"}}])

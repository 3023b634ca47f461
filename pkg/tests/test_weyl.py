from __future__ import annotations

from fractions import Fraction

import pytest

from pforge.exactalg import Chart, RatFn, parse
from pforge.systems import registry as R
from pforge.weyl import (SeriesError, check_involution, compare_maps, first_integral_preserved,
                         generate_backlund_from_series, infinite_order_witness, invariant_divisor_check,
                         lie_series, make_backlund, param_matrix, split_run_together, tau_action,
                         verify_holomorphy, verify_symmetry)

F = Fraction

SIX = [("s0.sys3", "sys3", False), ("s1.sys3", "sys3", False),
       ("s0.sys11", "sys11", True), ("s1.sys11", "sys11", True)]


@pytest.mark.parametrize("m,v,rel", SIX)
def test_symmetry_and_involution(m, v, rel):
    S = R.get(m)
    assert verify_symmetry(S, R.get(v), use_relation=rel).equal
    assert check_involution(S, use_relation=rel)


@pytest.mark.parametrize("m", ["s0.A1", "s1.A1"])
def test_two_time_symmetries(m):
    A = R.get("A1")
    S = R.get(m)
    assert verify_symmetry(S, A.field_t, use_relation=True).equal
    assert verify_symmetry(S, A.field_s, use_relation=True).equal


def test_ignoring_the_parameter_action_breaks_symmetry():
    assert not verify_symmetry(R.get("s0.sys3"), R.get("sys3"), apply_params=False).equal


def test_two_time_s1_needs_the_relation():
    A = R.get("A1")
    assert not verify_symmetry(R.get("s1.A1"), A.field_t, use_relation=False).equal
    # the five-dimensional maps hold for free parameters as well
    assert verify_symmetry(R.get("s1.sys11"), R.get("sys11"), use_relation=False).equal


def test_printed_sys11_constant_is_not_invariant():
    assert not verify_symmetry(R.get("s0.sys11"), R.get("sys11.printed"), use_relation=True).equal


def test_lattices_are_preserved():
    for m in ("s0.sys11", "s1.sys11", "s0.A1", "s1.A1"):
        S = R.get(m)
        assert S.lattice.preserved_by(S.action)


def test_tau_is_a_translation_of_infinite_order():
    tau = tau_action(R.get("s1.sys11"), R.get("s0.sys11"))
    assert param_matrix(tau, ("a0", "a1")) == ((-1, -1, 0), (4, 3, 0))
    ok, shifts = infinite_order_witness(tau, R.SYM5_LATTICE)
    assert ok and shifts == ((F(-1), F(2)),)
    # a reflection composed with itself is the identity
    assert not infinite_order_witness(tau_action(R.get("s0.sys11"), R.get("s0.sys11")))[0]


def test_lie_series_terminates_and_reports_runaway():
    c = R.CANON
    q1, p1 = RatFn.symbol(c, "q1"), RatFn.symbol(c, "p1")
    alpha = RatFn.parse("alpha + 1/2", c)
    # one bracket with p1 then zero
    assert lie_series(p1, alpha, q1) == q1 + alpha / p1
    with pytest.raises(SeriesError):
        lie_series(q1 * p1, alpha, q1, max_terms=5)


def test_series_regenerates_printed_s0():
    c = R.CANON
    d = generate_backlund_from_series(R.f0_sys3(), RatFn.parse("alpha+1/2", c), c, {"alpha": "-1-alpha"})
    assert compare_maps(R.get("s0.sys3"), d) == []


def test_series_regenerates_s1_and_locates_the_typesetting_defect():
    c = R.CANON
    d = generate_backlund_from_series(R.f1_sys3(), RatFn.parse("2-2*alpha", c), c, {"alpha": "2-alpha"})
    assert compare_maps(R.get("s1.sys3"), d) == []
    split = split_run_together(R.S1_SYS3_TYPESET["q2 p2"], c, (d.forward["q2"], d.forward["p2"]),
                               {"f1": R.f1_sys3()})
    assert split is not None and split[1].startswith("p2")


def test_compare_maps_reports_component_differences():
    c = R.CANON
    bad = make_backlund(c, {"q1": "q1 + (alpha+1)/p1"}, {"alpha": "-1-alpha"}, name="bad", check=False)
    errs = compare_maps(bad, R.get("s0.sys3"))
    assert [e.component for e in errs] == ["q1"]


def test_holomorphy_charts_of_sys3():
    H = R.get("H4")
    assert verify_holomorphy(H, R.get("r0")).polynomial
    corr = parse("3/2*q1", H.chart)
    assert verify_holomorphy(H, R.get("r1"), corr).polynomial
    res = verify_holomorphy(H, R.get("r1"), 0)
    assert not res.polynomial and res.offending[0][0] == "hamiltonian"


def test_holomorphy_charts_of_two_time_system_need_relation():
    for k in ("K1", "K2"):
        assert verify_holomorphy(R.get(k), R.get("R0"), relation=R.TWO_TIME_LATTICE).polynomial
        assert verify_holomorphy(R.get(k), R.get("R1"), relation=R.TWO_TIME_LATTICE).polynomial
        assert not verify_holomorphy(R.get(k), R.get("R1")).polynomial


def test_invariant_divisors():
    S = R.get("sys11")
    assert invariant_divisor_check(S, "x", {"a0": 0})
    assert invariant_divisor_check(S, "y", {"a1": 0})
    assert not invariant_divisor_check(S, "x")
    V = R.get("sys3")
    # p1 = f0 is invariant exactly when alpha = -1/2
    assert invariant_divisor_check(V, "p1", {"alpha": F(-1, 2)})
    assert not invariant_divisor_check(V, "p1")


def test_first_integral_is_preserved_by_both_maps():
    FI = R.get("sys11.FI")
    assert first_integral_preserved(R.get("s0.sys11"), FI)
    assert first_integral_preserved(R.get("s1.sys11"), FI)

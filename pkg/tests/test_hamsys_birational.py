from __future__ import annotations

from fractions import Fraction

import pytest
import sympy

from pforge.birational import (BirationalMap, MapError, compose, jacobian_determinant, pushforward,
                               verify_conjugation)
from pforge.exactalg import Chart, RatFn, parse
from pforge.hamsys import (check_quasi_homogeneous, first_integral_residual, hamiltonian_field,
                           hamiltonian_from_field, poisson_bracket, total_t_derivative)
from pforge.systems import VectorField
from pforge.systems import registry as R

C = R.CANON


def test_bracket_sign_convention():
    q1, p1 = RatFn.symbol(C, "q1"), RatFn.symbol(C, "p1")
    assert poisson_bracket(p1, q1) == 1
    assert poisson_bracket(q1, p1) == -1
    assert poisson_bracket(q1, RatFn.symbol(C, "p2")).is_zero()


def test_hamiltonian_field_of_H4_is_sys3():
    assert hamiltonian_field(R.get("H4")).components == R.get("sys3").components


def test_hamiltonian_from_field_recovers_H4_up_to_time_terms():
    H = hamiltonian_from_field(R.get("sys3"))
    assert hamiltonian_field(H, "t").components == R.get("sys3").components
    assert (H - R.get("H4").hamiltonian).is_constant() or \
        all(s in ("t", "alpha") for s in (H - R.get("H4").hamiltonian).used_symbols())


def test_non_hamiltonian_field_is_rejected():
    V = VectorField(C, tuple(parse(e, C) for e in ("q1", "q1", "0", "0")))
    with pytest.raises(ValueError):
        hamiltonian_from_field(V)


def test_time_dependence_residual():
    # dH/dt along the flow equals the explicit time derivative p2/2
    r = first_integral_residual(R.get("sys3"), R.get("H4").hamiltonian)
    assert r == parse("p2/2", C)


def test_K_is_its_own_first_integral():
    K = R.get("eq5.K")
    assert first_integral_residual(K.field(), K.hamiltonian).is_zero()


def test_quasi_homogeneity():
    J = R.JET
    weights = {"u": 1, "u_t": 2, "u_tt": 3, "u_ttt": 4, "u_tttt": 5, "u_ttttt": 6, "a0": 5}
    res = check_quasi_homogeneous(R.get("A5")["u_s"], weights)
    assert res.homogeneous and res.degree == 8
    bad = check_quasi_homogeneous(parse("u + u_t", J), weights)
    assert not bad and len(bad.mismatches) == 2
    assert check_quasi_homogeneous(parse("0", J), weights).degree == "any"
    with pytest.raises(KeyError):
        check_quasi_homogeneous(parse("u", J), {})


def test_total_t_derivative():
    J = R.JET
    assert total_t_derivative(parse("u^2", J), R.JET_SYMBOLS) == parse("2*u*u_t", J)
    with pytest.raises(ValueError):
        total_t_derivative(parse("u_ttttt", J), R.JET_SYMBOLS)


def test_map2_inverse_against_sympy():
    # independent inversion of the printed forward map
    M = R.get("map2")
    x, y, z, w, t, al = sympy.symbols("x y z w t alpha")
    q1, p1, q2, p2 = sympy.symbols("q1 p1 q2 p2")
    eqs = [q1 + x, p2 + (y + x ** 2), q2 + (z + 2 * x * y),
           p1 + (w - x ** 4 / 2 - x ** 2 * y + sympy.Rational(3, 2) * y ** 2 + 2 * x * z + t / 2)]
    sol = sympy.solve(eqs, [x, y, z, w], dict=True)[0]
    inv = M.inverse_map
    names = {"x": x, "y": y, "z": z, "w": w}
    for k, s in names.items():
        ours = sympy.sympify(str(inv[k]).replace("^", "**"))
        assert sympy.expand(ours - sol[s]) == 0


def test_conjugation_theorem_and_negative_control():
    res = verify_conjugation(R.get("eq1.firstorder"), R.get("map2"), R.get("sys3"))
    assert res.equal
    wrong = R.get("sys3").substitute_params({"alpha": parse("alpha + 1", C)})
    bad = verify_conjugation(R.get("eq1.firstorder"), R.get("map2"), wrong, pullback=False)
    assert not bad.equal and any(not d.is_zero() for d in bad.difference)


def test_compose_and_identity():
    M = R.get("map2")
    I = BirationalMap.identity(M.source)
    assert compose(I, M).forward_map == M.forward_map
    assert jacobian_determinant(I) == 1


def test_forward_inverse_mismatch_raises():
    A = Chart("a", ("u", "v"))
    B = Chart("b", ("s", "r"))
    with pytest.raises(MapError):
        BirationalMap(A, B, (("s", parse("u", A)), ("r", parse("v", A))),
                      (("u", parse("s", B)), ("v", parse("r + 1", B))))


def test_jacobian_determinant_of_map2():
    # map2 is volume-preserving up to sign
    d = jacobian_determinant(R.get("map2"))
    assert d.is_constant() and abs(d.constant_value()) == 1


def test_pushforward_of_a_blowup():
    A = Chart("a", ("x", "y"), "t")
    V = VectorField(A, (parse("x^2", A), parse("y", A)))
    B = Chart("b", ("X", "Y"), "t")
    M = BirationalMap.from_forward(A, B, {"X": parse("1/x", A), "Y": parse("y", A)})
    W = pushforward(V, M)
    assert W["X"] == parse("-1", B) and W["Y"] == parse("Y", B)

from __future__ import annotations

import json

import pytest

from pforge.exactalg import RatFn, parse
from pforge.systems import HamiltonianSystem, TwoTimeSystem, VectorField
from pforge.systems import registry as R

# second, independent entry of the printed formulas as plain text
SYS3_TEXT = ("q1^2 + p2", "-2*q1*p1 - alpha - 1/2", "-1/2*p2^2 + p1 + t/2", "q2")
H4_TEXT = "q1^2*p1 + (1/2 + alpha)*q1 - 1/6*p2^3 + t/2*p2 - q2^2/2 + p1*p2"
SYS11_TEXT = {"x": "-2*x*z - 3*a0", "y": "y*z + 3/2*a1", "z": "z^2 + q", "w": "-z*w + 2/3*x + 1/3*y", "q": "w"}
K1_TEXT = "q1^2*p1 + 3*a0*q1 - q2^2/2 - p2^3/6 + p1*p2"
K2_TEXT = ("p1^3/9 - 3*a0/2*q2*p2^2 + 3*a0^2*p2 + a0*p1*q2 + 3*a0*q1*q2^2 - 1/3*p1^2*p2^2"
           " + 2/3*q1*p1^2*q2 + 1/4*p1*p2^4 + q1^2*p1*q2^2 - q1*p1*q2*p2^2")
MAP2_TEXT = {"q1": "-x", "p1": "-(w - 1/2*x^4 - x^2*y + 3/2*y^2 + 2*x*z + t/2)",
             "q2": "-(z + 2*x*y)", "p2": "-(y + x^2)"}
EQ1_TEXT = ("y", "z", "w", "-5*y*z + 5*x^2*z + 5*x*y^2 - x^5 + t*x + alpha")


def test_sys3_matches_text_entry():
    V = R.get("sys3")
    assert V.components == tuple(parse(e, V.chart) for e in SYS3_TEXT)


def test_eq1_first_order_form():
    V = R.get("eq1.firstorder")
    assert V.components == tuple(parse(e, V.chart) for e in EQ1_TEXT)


def test_H4_matches_text_entry_and_building_blocks():
    H = R.get("H4")
    assert H.hamiltonian == parse(H4_TEXT, H.chart)
    K = R.get("eq5.K").hamiltonian
    HI = R.get("eq5.HI").hamiltonian
    assert K == parse("x^2*y + (1/2 + alpha)*x", K.chart)
    assert HI == parse("-w^3/6 + t/2*w - z^2/2", HI.chart)


def test_sys11_corrected_constant_and_printed_variant():
    V = R.get("sys11")
    assert V.components == tuple(parse(SYS11_TEXT[v], V.chart) for v in V.chart.vars)
    P = R.get("sys11.printed")
    assert P["x"] == parse("-2*x*z - 3/2*a0", P.chart)
    assert [P[v] for v in "yzwq"] == [V[v] for v in "yzwq"]


def test_K1_K2_text_entry():
    assert R.get("K1").hamiltonian == parse(K1_TEXT, R.TWO_TIME)
    K2 = R.get("K2").hamiltonian
    assert K2 == parse(K2_TEXT, R.TWO_TIME)
    assert len(K2.num) == 10


def test_map2_text_entry_and_inverse():
    M = R.get("map2")
    for k, e in MAP2_TEXT.items():
        assert M.forward_map[k] == parse(e, M.source)
    assert M.identity_defects() == []


def test_A1_is_two_time_with_hamiltonians():
    A = R.get("A1")
    assert isinstance(A, TwoTimeSystem)
    assert A.field_t.time == "t" and A.field_s.time == "s"
    assert len(A.hamiltonians) == 2


def test_every_entry_builds():
    for n in R.names():
        e = R.entry(n)
        assert e.name == n
        assert e.summary().startswith(n + " (")


@pytest.mark.parametrize("name,text", [
    ("sys11", "sys11 (dim 5, relation 2*a0+a1=1)"),
    ("A1", "A1 (two-time, relation 2*a0+a1=0)"),
    ("H4", "H4 (hamiltonian, dim 4)"),
    ("sys3", "sys3 (dim 4)"),
])
def test_summaries(name, text):
    assert R.entry(name).summary() == text


def test_unknown_name_suggests_close_matches():
    with pytest.raises(R.RegistryError, match="sys11"):
        R.get("sys1l")
    with pytest.raises(R.RegistryError):
        R.get_chart("nowhere")


def test_export_json_round_trips_expressions():
    data = json.loads(R.export_json(["sys3", "H4", "map2"]))
    assert set(data) == {"sys3", "H4", "map2"}
    c = R.CANON
    assert parse(data["H4"]["H"], c) == R.get("H4").hamiltonian
    comps = data["sys3"]["components"]
    assert [parse(comps[f"d{v}/dt"], c) for v in c.vars] == list(R.get("sys3").components)


def test_parse_system_text(tmp_path):
    text = """
    # harmonic oscillator
    vars: q, p
    time: t
    params: k
    pairs: q:p
    dq/dt = p
    dp/dt = -k*q
    """
    V = R.parse_system_text(text, "osc")
    assert V.dim == 2 and V.chart.pairs == ((0, 1),)
    assert V["p"] == parse("-k*q", V.chart)
    f = tmp_path / "osc.sys"
    f.write_text(text)
    assert R.load_system_file(str(f)).components == V.components
    with pytest.raises(ValueError, match="no equation"):
        R.parse_system_text("vars: a, b\ntime: t\nda/dt = b\n")


def test_vector_field_lie_derivative():
    V = R.get("sys3")
    f = parse("q1", V.chart)
    assert V.lie_derivative(f) == V["q1"]
    # the explicit time dependence enters through d/dt
    assert V.lie_derivative(parse("t", V.chart)) == 1

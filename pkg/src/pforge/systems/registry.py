"""Named systems, Hamiltonians, maps and charts.

Entries are built lazily from Python expressions (see ``_builders``) and
cached; the test-suite cross-checks them against independently typed string
forms.  ``get(name)`` returns the value; ``entry(name)`` also returns the
metadata used by the command line (dimension, parameter relation, declared
invariants).
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Callable, Dict, List, Optional, Tuple

from ..birational import BirationalMap, pushforward
from ..exactalg import Chart, RatFn, format_ratfn
from ..hamsys import hamiltonian_field
from ..weyl import BacklundMap, ParameterLattice, make_backlund
from .fields import HamiltonianSystem, TwoTimeSystem, VectorField


class RegistryError(KeyError):
    """Unknown registry name."""

    def __str__(self):
        return self.args[0]


# -- charts ------------------------------------------------------------------

CANON_PAIRS = ((0, 1), (2, 3))

EQ1 = Chart("eq1", ("x", "y", "z", "w"), "t", ("alpha",))
CANON = Chart("canon", ("q1", "p1", "q2", "p2"), "t", ("alpha",), pairs=CANON_PAIRS)
PII_JET = Chart("PII.jet", ("x", "y"), "t", ("alpha",))
PII_CANON = Chart("PII.canon", ("q", "p"), "t", ("alpha",), pairs=((0, 1),))
K_CHART = Chart("eq5.K", ("x", "y"), None, ("alpha",), pairs=((0, 1),))
HI_CHART = Chart("eq5.HI", ("z", "w"), "t", (), pairs=((0, 1),))
# the five-dimensional form; (z, x) and (w, q) are canonical pairs, y is defined
SYM5 = Chart("sym5", ("x", "y", "z", "w", "q"), "t", ("a0", "a1"), pairs=((2, 0), (3, 4)))
TWO_TIME = Chart("A1", ("q1", "p1", "q2", "p2"), "t", ("a0", "a1"), second_time="s", pairs=CANON_PAIRS)
A4_CHART = Chart("A4", ("x", "y", "z", "w"), "t", ("a0", "a1"), second_time="s")
JET = Chart("jet", ("u", "u_t", "u_tt", "u_ttt", "u_tttt", "u_ttttt"), None, ("a0",))
JET_SYMBOLS = JET.vars
R0_CHART = Chart("r0", ("x0", "y0", "z0", "w0"), "t", ("alpha",), pairs=CANON_PAIRS)
R1_CHART = Chart("r1", ("x1", "y1", "z1", "w1"), "t", ("alpha",), pairs=CANON_PAIRS)
RR0_CHART = Chart("R0", ("x0", "y0", "z0", "w0"), "t", ("a0", "a1"), second_time="s", pairs=CANON_PAIRS)
RR1_CHART = Chart("R1", ("x1", "y1", "z1", "w1"), "t", ("a0", "a1"), second_time="s", pairs=CANON_PAIRS)
C70_CHART = Chart("chart7.0", ("x0", "y0", "z0", "w0", "q0"), "t", ("a0", "a1"))
C71_CHART = Chart("chart7.1", ("x1", "y1", "z1", "w1", "q1"), "t", ("a0", "a1"))

SYM5_LATTICE = ParameterLattice(("a0", "a1"), (2, 1), F(1))
TWO_TIME_LATTICE = ParameterLattice(("a0", "a1"), (2, 1), F(0))
FREE_ALPHA = ParameterLattice(("alpha",))


def symbols(chart: Chart) -> Tuple[RatFn, ...]:
    """Every chart symbol as a :class:`RatFn`, in chart order."""
    return tuple(RatFn.symbol(chart, s) for s in chart.symbols)


half = F(1, 2)


# -- metadata ----------------------------------------------------------------


@dataclass(frozen=True)
class Entry:
    name: str
    kind: str
    value: object
    description: str = ""
    relation: Optional[ParameterLattice] = None
    invariants: Tuple[str, ...] = ()

    @property
    def dim(self) -> Optional[int]:
        v = self.value
        if isinstance(v, (VectorField, HamiltonianSystem, TwoTimeSystem)):
            return v.chart.dim
        if isinstance(v, Chart):
            return v.dim
        if isinstance(v, BacklundMap):
            return v.chart.dim
        if isinstance(v, BirationalMap):
            return v.source.dim
        return None

    def summary(self) -> str:
        rel = self.relation.text() if self.relation and self.relation.constrained else None
        if self.kind == "two-time":
            head = "two-time"
        elif self.dim is not None:
            head = f"dim {self.dim}"
        else:
            head = self.kind
        bits = [head]
        if self.kind not in ("two-time", "field") and self.dim is not None:
            bits.insert(0, self.kind)
        if rel:
            bits.append(f"relation {rel}")
        return f"{self.name} ({', '.join(bits)})"


# -- builders ----------------------------------------------------------------

_builders: Dict[str, Tuple[str, str, Callable[[], object]]] = {}
_meta: Dict[str, dict] = {}


def _register(name: str, kind: str, description: str, relation=None, invariants=()):
    def deco(fn):
        _builders[name] = (kind, description, fn)
        _meta[name] = {"relation": relation, "invariants": tuple(invariants)}
        return fn
    return deco


@_register("eq1.firstorder", "field", "fourth-order equation as a first-order system in (u, u', u'', u''')")
def _eq1():
    x, y, z, w, t, alpha = symbols(EQ1)
    rhs = -5 * y * z + 5 * x ** 2 * z + 5 * x * y ** 2 - x ** 5 + t * x + alpha
    return VectorField(EQ1, (y, z, w, rhs), name="eq1.firstorder")


@_register("sys3", "field", "polynomial Hamiltonian system in (q1, p1, q2, p2)", FREE_ALPHA, ("H4:explicit-time",))
def _sys3():
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    return VectorField(CANON, (
        q1 ** 2 + p2,
        -2 * q1 * p1 - alpha - half,
        -half * p2 ** 2 + p1 + t / 2,
        q2,
    ), name="sys3")


def _H4_expr():
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    return q1 ** 2 * p1 + (half + alpha) * q1 - F(1, 6) * p2 ** 3 + t / 2 * p2 - q2 ** 2 / 2 + p1 * p2


@_register("H4", "hamiltonian", "Hamiltonian generating sys3", FREE_ALPHA)
def _H4():
    return HamiltonianSystem(CANON, _H4_expr(), name="H4")


@_register("eq5.K", "hamiltonian", "building block K(x, y; alpha)", FREE_ALPHA)
def _K():
    x, y, alpha = symbols(K_CHART)
    return HamiltonianSystem(K_CHART, x ** 2 * y + (half + alpha) * x, name="eq5.K")


@_register("eq5.HI", "hamiltonian", "first Painleve Hamiltonian H_I(z, w, t)")
def _HI():
    z, w, t = symbols(HI_CHART)
    return HamiltonianSystem(HI_CHART, -F(1, 6) * w ** 3 + t / 2 * w - z ** 2 / 2, name="eq5.HI")


@_register("PII.firstorder", "field", "second Painleve equation as a first-order system in (u, u')", FREE_ALPHA)
def _pii_first():
    x, y, t, alpha = symbols(PII_JET)
    return VectorField(PII_JET, (y, 2 * x ** 3 + t * x + alpha), name="PII.firstorder")


@_register("PII", "hamiltonian", "second Painleve Hamiltonian H_II", FREE_ALPHA)
def _pii():
    q, p, t, alpha = symbols(PII_CANON)
    H = q ** 2 * p + half * p ** 2 + t / 2 * p - (alpha - half) * q
    return HamiltonianSystem(PII_CANON, H, name="PII")


@_register("PII.system", "field", "canonical second Painleve system as printed", FREE_ALPHA)
def _pii_sys():
    q, p, t, alpha = symbols(PII_CANON)
    return VectorField(PII_CANON, (q ** 2 + p + t / 2, -2 * q * p + alpha - half), name="PII.system")


def _sym5_field(dx_const):
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    return (
        -2 * x * z + dx_const * a0,
        y * z + F(3, 2) * a1,
        z ** 2 + q,
        -z * w + F(2, 3) * x + F(1, 3) * y,
        w,
    )


@_register("sys11", "field", "five-dimensional symmetric form (constant term of dx/dt is -3*a0)",
           SYM5_LATTICE, ("sys11.FI",))
def _sys11():
    return VectorField(SYM5, _sym5_field(-3), name="sys11")


@_register("sys11.printed", "field", "five-dimensional symmetric form exactly as typeset (dx/dt constant -3/2*a0)",
           SYM5_LATTICE, ("sys11.FI",))
def _sys11_printed():
    return VectorField(SYM5, _sym5_field(-F(3, 2)), name="sys11.printed")


def sys11_defined_y() -> RatFn:
    """``y`` solved from the first integral of the five-dimensional form."""
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    return x + 3 * z * w - F(3, 2) * q ** 2 + F(3, 2) * t


@_register("sys11.FI", "function", "first integral y - x - 3zw + 3/2 q^2 - 3/2 t", SYM5_LATTICE)
def _sys11_fi():
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    return y - x - 3 * z * w + F(3, 2) * q ** 2 - F(3, 2) * t


def _K1_expr():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    return q1 ** 2 * p1 + 3 * a0 * q1 - q2 ** 2 / 2 - p2 ** 3 / 6 + p1 * p2


def _K2_expr():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    return (p1 ** 3 / 9 - F(3, 2) * a0 * q2 * p2 ** 2 + 3 * a0 ** 2 * p2 + a0 * p1 * q2
            + 3 * a0 * q1 * q2 ** 2 - F(1, 3) * p1 ** 2 * p2 ** 2 + F(2, 3) * q1 * p1 ** 2 * q2
            + F(1, 4) * p1 * p2 ** 4 + q1 ** 2 * p1 * q2 ** 2 - q1 * p1 * q2 * p2 ** 2)


@_register("K1", "hamiltonian", "autonomous Hamiltonian of the t-flow", TWO_TIME_LATTICE)
def _K1():
    return HamiltonianSystem(TWO_TIME, _K1_expr(), "t", name="K1")


@_register("K2", "hamiltonian", "Hamiltonian of the s-flow", TWO_TIME_LATTICE)
def _K2():
    return HamiltonianSystem(TWO_TIME, _K2_expr(), "s", name="K2")


@_register("A1", "two-time", "two-time Hamiltonian system generated by K1 (t) and K2 (s)",
           TWO_TIME_LATTICE, ("K1", "K2"))
def _A1():
    K1, K2 = _K1_expr(), _K2_expr()
    ft = hamiltonian_field(K1, "t").with_name("A1.t")
    fs = hamiltonian_field(K2, "s").with_name("A1.s")
    return TwoTimeSystem(TWO_TIME, ft, fs, "A1", (K1, K2))


@_register("A4.printed", "function-set", "printed dx/ds and dw/dt components of the pushed-forward pair",
           TWO_TIME_LATTICE)
def _A4_printed():
    x, y, z, w, t, s, a0, a1 = symbols(A4_CHART)
    dx_ds = (-w ** 2 / 3 - x ** 4 * w / 3 + 3 * a0 * x * y + 2 * x ** 2 * y * w + F(2, 3) * x ** 6 * y
             - F(5, 3) * y ** 2 * w - F(10, 3) * x ** 4 * y ** 2 + F(14, 3) * x ** 2 * y ** 3 - 2 * y ** 4
             + a0 * z - x ** 5 * z / 3 + F(2, 3) * x ** 3 * y * z - x * y ** 2 * z / 3 + x ** 2 * z ** 2 / 3)
    return {"dx/dt": y, "dy/dt": z, "dz/dt": w,
            "dw/dt": 5 * x ** 2 * z - x ** 5 + 5 * x * y ** 2 - 5 * y * z + 3 * a0,
            "dx/ds": dx_ds}


@_register("A5", "function-set", "jet form: first equation (u_tttt) and second equation (u_s) as printed")
def _A5():
    u, ut, utt, uttt, utttt, uttttt, a0 = symbols(JET)
    first = 5 * u ** 2 * utt - u ** 5 + 5 * u * ut ** 2 - 5 * ut * utt + 3 * a0
    return {"u_tttt": first, "u_s": _A5_second()}


def _A5_second():
    u, ut, utt, uttt, utttt, uttttt, a0 = symbols(JET)
    return (-F(1, 3) * uttt ** 2 - F(1, 3) * u ** 4 * uttt + 3 * a0 * u * ut + 2 * u ** 2 * ut * uttt
            + F(2, 3) * u ** 6 * ut - F(5, 3) * ut ** 2 * uttt - F(10, 3) * u ** 4 * ut ** 2
            + F(14, 3) * u ** 2 * ut ** 3 - 2 * ut ** 4 + a0 * utt - F(1, 3) * u ** 5 * utt
            + F(2, 3) * u ** 3 * ut * utt - F(1, 3) * u * ut ** 2 * utt + F(1, 3) * u ** 2 * utt ** 2)


@_register("A6", "function-set", "jet form: first equation (u_ttttt) and second equation (u_s) as printed")
def _A6():
    u, ut, utt, uttt, utttt, uttttt, a0 = symbols(JET)
    first = (-5 * (ut - u ** 2) * uttt - 5 * utt ** 2 + 20 * u * ut * utt + 5 * ut ** 3
             - 5 * u ** 4 * ut)
    return {"u_ttttt": first, "u_s": _A5_second()}


# -- maps ----------------------------------------------------------------------


@_register("map2", "map", "jet coordinates (u, u', u'', u''') to canonical (q1, p1, q2, p2)", FREE_ALPHA)
def _map2():
    x, y, z, w, t, alpha = symbols(EQ1)
    fwd = {
        "q1": -x,
        "p1": -(w - half * x ** 4 - x ** 2 * y + F(3, 2) * y ** 2 + 2 * x * z + t / 2),
        "q2": -(z + 2 * x * y),
        "p2": -(y + x ** 2),
    }
    return BirationalMap.from_forward(EQ1, CANON, fwd, name="map2")


@_register("mapA3", "map", "two-time canonical coordinates to jet coordinates (x, y, z, w)", TWO_TIME_LATTICE)
def _mapA3():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    fwd = {
        "x": -q1,
        "y": -p2 - q1 ** 2,
        "z": -q2 - 2 * q1 * p2 - 2 * q1 ** 3,
        "w": -p1 - 2 * q1 * q2 - F(3, 2) * p2 ** 2 - 8 * q1 ** 2 * p2 - 6 * q1 ** 4,
    }
    return BirationalMap.from_forward(TWO_TIME, A4_CHART, fwd, name="mapA3")


def f0_sys3() -> RatFn:
    return RatFn.symbol(CANON, "p1")


def f1_sys3() -> RatFn:
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    return p1 + 3 * q1 * q2 - F(3, 2) * (p2 ** 2 - t)


def f0_A1() -> RatFn:
    return RatFn.symbol(TWO_TIME, "p1")


def f1_A1() -> RatFn:
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    return p1 - F(3, 2) * p2 ** 2 + 3 * q1 * q2


@_register("r0", "map", "holomorphy chart r0 (second coordinate uses f0*q1)", FREE_ALPHA)
def _r0():
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    fwd = {"x0": 1 / q1, "y0": -(f0_sys3() * q1 + (alpha + half)) * q1, "z0": q2, "w0": p2}
    return BirationalMap.from_forward(CANON, R0_CHART, fwd, name="r0")


@_register("r1", "map", "holomorphy chart r1", FREE_ALPHA)
def _r1():
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    fwd = {"x1": 1 / q1, "y1": -(f1_sys3() * q1 - 2 * (alpha - 1)) * q1,
           "z1": q2 + 3 * q1 ** 3 + 3 * q1 * p2, "w1": p2 + F(3, 2) * q1 ** 2}
    return BirationalMap.from_forward(CANON, R1_CHART, fwd, name="r1")


@_register("R0", "map", "holomorphy chart R0 of the two-time system", TWO_TIME_LATTICE)
def _R0():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    fwd = {"x0": 1 / q1, "y0": -(q1 * f0_A1() + 3 * a0) * q1, "z0": q2, "w0": p2}
    return BirationalMap.from_forward(TWO_TIME, RR0_CHART, fwd, name="R0")


@_register("R1", "map", "holomorphy chart R1 of the two-time system", TWO_TIME_LATTICE)
def _R1():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    fwd = {"x1": 1 / q1, "y1": -(q1 * f1_A1() + 3 * a1) * q1,
           "z1": q2 + 3 * q1 * p2 + 3 * q1 ** 3, "w1": p2 + F(3, 2) * q1 ** 2}
    return BirationalMap.from_forward(TWO_TIME, RR1_CHART, fwd, name="R1")


@_register("chart7.0", "map", "holomorphy chart 0) of the five-dimensional form", SYM5_LATTICE)
def _c70():
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    fwd = {"x0": -(x * z + 3 * a0) * z, "y0": y / z, "z0": 1 / z, "w0": (w - y / (3 * z)) * z, "q0": q}
    return BirationalMap.from_forward(SYM5, C70_CHART, fwd, name="chart7.0")


@_register("chart7.1", "map", "holomorphy chart 1) of the five-dimensional form", SYM5_LATTICE)
def _c71():
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    fwd = {"x1": x + 3 * z * w + F(9, 2) * z ** 2 * q + F(27, 8) * z ** 4,
           "y1": -(y * z + 3 * a1) * z, "z1": 1 / z,
           "w1": w + 3 * z * q + 3 * z ** 3, "q1": q + F(3, 2) * z ** 2}
    return BirationalMap.from_forward(SYM5, C71_CHART, fwd, name="chart7.1")


# -- Bäcklund maps as printed ---------------------------------------------------


@_register("s0.sys3", "backlund", "s0 on sys3, alpha -> -1-alpha", FREE_ALPHA)
def _s0_sys3():
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    return make_backlund(CANON, {"q1": q1 + (alpha + half) / f0_sys3()}, {"alpha": -1 - alpha},
                         "s0.sys3", f0_sys3(), alpha + half, FREE_ALPHA)


@_register("s1.sys3", "backlund", "s1 on sys3, alpha -> 2-alpha (q2/p2 images split as derived)", FREE_ALPHA)
def _s1_sys3():
    q1, p1, q2, p2, t, alpha = symbols(CANON)
    f1 = f1_sys3()
    a = alpha - 1
    fwd = {
        "q1": q1 + (2 - 2 * alpha) / f1,
        "p1": p1 + 6 * q2 * a / f1 + 18 * p2 * a ** 2 / f1 ** 2 + 36 * q1 * a ** 3 / f1 ** 3 - 18 * a ** 4 / f1 ** 4,
        "q2": q2 + 6 * p2 * a / f1 + 18 * q1 * a ** 2 / f1 ** 2 - 12 * a ** 3 / f1 ** 3,
        "p2": p2 + 6 * q1 * a / f1 - 6 * a ** 2 / f1 ** 2,
    }
    return make_backlund(CANON, fwd, {"alpha": 2 - alpha}, "s1.sys3", f1, 2 - 2 * alpha, FREE_ALPHA)


@_register("s0.sys11", "backlund", "s0 on the five-dimensional form", SYM5_LATTICE)
def _s0_sys11():
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    return make_backlund(SYM5, {"y": y + 9 * a0 * w / x, "z": z + 3 * a0 / x},
                         {"a0": -a0, "a1": a1 + 4 * a0}, "s0.sys11", x, 3 * a0, SYM5_LATTICE)


@_register("s1.sys11", "backlund", "s1 on the five-dimensional form", SYM5_LATTICE)
def _s1_sys11():
    x, y, z, w, q, t, a0, a1 = symbols(SYM5)
    fwd = {
        "x": x - 9 * a1 * w / y + F(162, 4) * a1 ** 2 * q / y ** 2 - F(243, 2) * a1 ** 3 * z / y ** 3
             - F(729, 8) * a1 ** 4 / y ** 4,
        "z": z + 3 * a1 / y,
        "w": w - 9 * a1 * q / y + F(81, 2) * a1 ** 2 * z / y ** 2 + F(81, 2) * a1 ** 3 / y ** 3,
        "q": q - 9 * a1 * z / y - F(27, 2) * a1 ** 2 / y ** 2,
    }
    return make_backlund(SYM5, fwd, {"a0": a0 + a1, "a1": -a1}, "s1.sys11", y, 3 * a1, SYM5_LATTICE)


@_register("s0.A1", "backlund", "s0 on the two-time system", TWO_TIME_LATTICE)
def _s0_A1():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    return make_backlund(TWO_TIME, {"q1": q1 + 3 * a0 / p1}, {"a0": -a0, "a1": a1 + 4 * a0},
                         "s0.A1", f0_A1(), 3 * a0, TWO_TIME_LATTICE)


@_register("s1.A1", "backlund", "s1 on the two-time system", TWO_TIME_LATTICE)
def _s1_A1():
    q1, p1, q2, p2, t, s, a0, a1 = symbols(TWO_TIME)
    D = 3 * p2 ** 2 - 2 * p1 - 6 * q1 * q2
    fwd = {
        "q1": q1 - 6 * a1 / D,
        "p1": p1 + 18 * a1 * q2 / D + 162 * a1 ** 2 * p2 / D ** 2 + 972 * a1 ** 3 * q1 / D ** 3
              - 1458 * a1 ** 4 / D ** 4,
        "q2": q2 + 18 * a1 * p2 / D + 162 * a1 ** 2 * q1 / D ** 2 - 324 * a1 ** 3 / D ** 3,
        "p2": p2 + 18 * a1 * q1 / D - 54 * a1 ** 2 / D ** 2,
    }
    return make_backlund(TWO_TIME, fwd, {"a0": a0 + a1, "a1": -a1}, "s1.A1", f1_A1(), 3 * a1,
                         TWO_TIME_LATTICE)


# -- public API ----------------------------------------------------------------

_cache: Dict[str, Entry] = {}


def names() -> List[str]:
    return list(_builders)


def entry(name: str) -> Entry:
    if name in _cache:
        return _cache[name]
    if name not in _builders:
        close = difflib.get_close_matches(name, _builders, n=5, cutoff=0.5)
        hint = f"; did you mean: {', '.join(close)}" if close else ""
        raise RegistryError(f"unknown registry name {name!r}{hint}")
    kind, desc, fn = _builders[name]
    e = Entry(name, kind, fn(), desc, _meta[name]["relation"], _meta[name]["invariants"])
    _cache[name] = e
    return e


def get(name: str):
    """Registry value by name (fields, Hamiltonians, maps, charts...)."""
    return entry(name).value


CHARTS = {c.name: c for c in (EQ1, CANON, PII_JET, PII_CANON, K_CHART, HI_CHART, SYM5, TWO_TIME,
                              A4_CHART, JET, R0_CHART, R1_CHART, RR0_CHART, RR1_CHART,
                              C70_CHART, C71_CHART)}


def get_chart(name: str) -> Chart:
    try:
        return CHARTS[name]
    except KeyError:
        close = difflib.get_close_matches(name, CHARTS, n=5, cutoff=0.5)
        raise RegistryError(f"unknown chart {name!r}" + (f"; did you mean: {', '.join(close)}" if close else "")) from None


def _export_value(v):
    if isinstance(v, VectorField):
        return {"type": "field", "chart": str(v.chart), "components": v.as_dict()}
    if isinstance(v, HamiltonianSystem):
        return {"type": "hamiltonian", "chart": str(v.chart), "H": format_ratfn(v.hamiltonian)}
    if isinstance(v, TwoTimeSystem):
        return {"type": "two-time", "chart": str(v.chart), "t": v.field_t.as_dict(), "s": v.field_s.as_dict()}
    if isinstance(v, BacklundMap):
        d = v.underlying.as_dict()
        d["type"] = "backlund"
        return d
    if isinstance(v, BirationalMap):
        d = v.as_dict()
        d["type"] = "map"
        return d
    if isinstance(v, RatFn):
        return {"type": "function", "chart": str(v.chart), "expr": format_ratfn(v)}
    if isinstance(v, dict):
        return {"type": "functions", "exprs": {k: format_ratfn(e) for k, e in v.items()}}
    return {"type": type(v).__name__, "repr": str(v)}


def export_json(selected: Optional[List[str]] = None) -> str:
    """Registry as JSON (name -> formatted expressions)."""
    out = {n: _export_value(get(n)) for n in (selected or names())}
    return json.dumps(out, indent=2, sort_keys=True)


# -- derived systems -------------------------------------------------------------


def derive_A4() -> TwoTimeSystem:
    """Push both flows of ``A1`` through ``mapA3`` into jet coordinates."""
    A1, M = get("A1"), get("mapA3")
    ft = pushforward(A1.field_t, M).with_name("A4.t")
    fs = pushforward(A1.field_s, M).with_name("A4.s")
    return TwoTimeSystem(A4_CHART, ft, fs, "A4")


@_register("A4", "two-time", "both flows of A1 pushed through mapA3 (derived)", TWO_TIME_LATTICE)
def _A4():
    return derive_A4()


# the q2 row of s1 on sys3 exactly as typeset: the q2 and p2 images run together
S1_SYS3_TYPESET = {
    "q1": "q1 + (2-2*alpha)/f1",
    "p1": "p1 + 6*q2*(alpha-1)/f1 + 18*p2*(alpha-1)^2/f1^2 + 36*q1*(alpha-1)^3/f1^3 - 18*(alpha-1)^4/f1^4",
    "q2 p2": "q2 + 6*p2*(alpha-1)/f1 + 18*q1*(alpha-1)^2/f1^2 - 12*(alpha-1)^3/f1^3 "
             "p2 + 6*q1*(alpha-1)/f1 - 6*(alpha-1)^2/f1^2",
}


# -- user-supplied systems -------------------------------------------------------


def parse_system_text(text: str, name: str = "user") -> VectorField:
    """Field from a small text format.

    Header lines ``vars:``, ``time:``, ``params:`` and optional ``pairs:``
    (``q:p`` items) followed by one ``d<var>/d<time> = <expr>`` line per
    variable.  ``#`` starts a comment.
    """
    header: Dict[str, str] = {}
    rhs: Dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line and line.startswith("d"):
            lhs, expr = line.split("=", 1)
            var = lhs.strip()[1:].split("/", 1)[0].strip()
            rhs[var] = expr.strip()
        elif ":" in line:
            key, val = line.split(":", 1)
            header[key.strip().lower()] = val.strip()
        else:
            raise ValueError(f"cannot read line {raw!r}")
    split = lambda s: tuple(x.strip() for x in s.replace(",", " ").split() if x.strip())
    if "vars" not in header:
        raise ValueError("missing 'vars:' line")
    vars_ = split(header["vars"])
    pairs = ()
    if header.get("pairs"):
        pairs = tuple((vars_.index(a), vars_.index(b)) for a, b in (p.split(":") for p in split(header["pairs"])))
    chart = Chart(header.get("chart", name), vars_, header.get("time") or None,
                  split(header.get("params", "")), pairs=pairs)
    missing = [v for v in vars_ if v not in rhs]
    if missing:
        raise ValueError(f"no equation for {', '.join(missing)}")
    return VectorField.from_strings(chart, [rhs[v] for v in vars_], name=name)


def load_system_file(path: str) -> VectorField:
    with open(path) as fh:
        return parse_system_text(fh.read(), name=path.rsplit("/", 1)[-1].rsplit(".", 1)[0])

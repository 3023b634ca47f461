"""Bäcklund transformations, Lie-series generation and holomorphy checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .birational import (BirationalMap, ConjugationResult, MapError, compose, pushforward,
                         verify_conjugation)
from .exactalg import Chart, ChartError, Poly, RatFn, Substitution, format_ratfn
from .hamsys import poisson_bracket
from .systems.fields import HamiltonianSystem, VectorField


class SeriesError(ArithmeticError):
    """Lie series did not terminate within the allowed number of terms."""


@dataclass(frozen=True)
class ParameterLattice:
    """Affine relation ``sum(coeffs[i] * params[i]) = const`` on the parameters."""

    params: Tuple[str, ...]
    coeffs: Tuple[int, ...] = ()
    const: Fraction = Fraction(0)

    @property
    def constrained(self) -> bool:
        return any(self.coeffs)

    def text(self) -> str:
        if not self.constrained:
            return "none"
        parts = []
        for c, p in zip(self.coeffs, self.params):
            if not c:
                continue
            term = p if abs(c) == 1 else f"{abs(c)}*{p}"
            parts.append(("-" if c < 0 else "+") + term)
        lhs = "".join(parts).lstrip("+")
        return f"{lhs}={self.const}"

    def binding(self, chart: Chart) -> Dict[str, RatFn]:
        """Solve the relation for its last parameter with nonzero coefficient."""
        if not self.constrained:
            return {}
        k = max(i for i, c in enumerate(self.coeffs) if c)
        expr = RatFn.const(chart, self.const)
        for i, (c, p) in enumerate(zip(self.coeffs, self.params)):
            if i != k and c:
                expr = expr - RatFn.symbol(chart, p) * c
        return {self.params[k]: expr / self.coeffs[k]}

    def value(self, values: Mapping[str, object]) -> Fraction:
        return sum((Fraction(values[p]) * c for p, c in zip(self.params, self.coeffs)), Fraction(0))

    def preserved_by(self, action: Mapping[str, RatFn]) -> bool:
        """True if ``action`` keeps the relation's left-hand side invariant."""
        if not self.constrained:
            return True
        chart = next(iter(action.values())).chart
        before = sum((RatFn.symbol(chart, p) * c for p, c in zip(self.params, self.coeffs)),
                     RatFn.const(chart, 0))
        after = sum((action.get(p, RatFn.symbol(chart, p)) * c for p, c in zip(self.params, self.coeffs)),
                    RatFn.const(chart, 0))
        return before == after


@dataclass(frozen=True)
class BacklundMap:
    """Birational symmetry plus the divisor and coefficient generating it."""

    underlying: BirationalMap
    generator: Optional[RatFn] = None
    coefficient: Optional[RatFn] = None
    lattice: Optional[ParameterLattice] = None
    name: str = ""

    def __post_init__(self):
        m = self.underlying
        if m.source != m.target:
            raise MapError("a Bäcklund map acts on a single chart")

    @property
    def chart(self) -> Chart:
        return self.underlying.source

    @property
    def forward(self) -> Dict[str, RatFn]:
        return dict(self.underlying.forward)

    @property
    def action(self) -> Dict[str, RatFn]:
        return self.underlying.action


def involutive_inverse(chart: Chart, forward: Mapping[str, RatFn], action: Mapping[str, RatFn]) -> Dict[str, RatFn]:
    """Inverse of a map that squares to the identity: the map at the acted parameters."""
    if not action:
        return dict(forward)
    sub = Substitution(chart, dict(action), chart)
    return {k: sub.apply(v) for k, v in forward.items()}


def make_backlund(chart: Chart, forward: Mapping[str, object], action: Mapping[str, object],
                  name: str = "", generator=None, coefficient=None,
                  lattice: Optional[ParameterLattice] = None, check: bool = True) -> BacklundMap:
    """Bäcklund map from its forward formulas (identity on omitted variables)."""
    fwd = {}
    for v in chart.vars:
        val = forward.get(v, v)
        fwd[v] = val if isinstance(val, RatFn) else RatFn.parse(str(val), chart) if isinstance(val, str) else RatFn.const(chart, val)
    act = {k: (v if isinstance(v, RatFn) else RatFn.parse(str(v), chart)) for k, v in action.items()}
    inv = involutive_inverse(chart, fwd, act)
    m = BirationalMap(chart, chart, tuple(fwd.items()), tuple(inv.items()), tuple(act.items()), name, check)
    if generator is not None and not isinstance(generator, RatFn):
        generator = RatFn.from_poly(generator) if isinstance(generator, Poly) else RatFn.parse(generator, chart)
    if coefficient is not None and not isinstance(coefficient, RatFn):
        coefficient = RatFn.parse(str(coefficient), chart)
    return BacklundMap(m, generator, coefficient, lattice, name)


# -- restriction to a parameter relation -------------------------------------


def _restrict_field(V: VectorField, binding: Mapping[str, RatFn]) -> VectorField:
    return V.substitute_params(dict(binding)) if binding else V


def _restrict_map(S: BacklundMap, binding: Mapping[str, RatFn]) -> BirationalMap:
    m = S.underlying
    if not binding:
        return m
    chart = m.source
    sub = Substitution(chart, dict(binding), chart)
    fwd = tuple((k, sub.apply(v)) for k, v in m.forward)
    inv = tuple((k, sub.apply(v)) for k, v in m.inverse)
    act = tuple((k, sub.apply(v)) for k, v in m.action.items() if k not in binding)
    return BirationalMap(chart, chart, fwd, inv, act, m.name, check=False)


def verify_symmetry(S: BacklundMap, V: VectorField, use_relation: bool = False,
                    apply_params: bool = True) -> ConjugationResult:
    """Check that ``S`` maps ``V`` to itself with parameters moved by the action.

    ``use_relation`` first eliminates one parameter through the map's
    lattice relation; ``apply_params=False`` ignores the parameter action
    (a negative control).
    """
    if V.chart != S.chart:
        return ConjugationResult(False, (), f"field chart {V.chart.name!r} differs from map chart {S.chart.name!r}")
    binding = S.lattice.binding(V.chart) if (use_relation and S.lattice) else {}
    m = _restrict_map(S, binding)
    W = _restrict_field(V, binding)
    if not apply_params:
        m = BirationalMap(m.source, m.target, m.forward, m.inverse, (), m.name, check=False)
    if binding:
        # parameters are tied by the relation; act only on the free ones
        act = dict(m.param_action)
        m = BirationalMap(m.source, m.target, m.forward, m.inverse,
                          tuple((k, v) for k, v in act.items() if k not in binding), m.name, check=False)
    return verify_conjugation(W, m, W)


def check_involution(S: BacklundMap, use_relation: bool = False) -> bool:
    """``S∘S`` is the identity on variables and parameters."""
    binding = S.lattice.binding(S.chart) if (use_relation and S.lattice) else {}
    m = _restrict_map(S, binding)
    sq = compose(m, m)
    chart = S.chart
    if any(f != RatFn.symbol(chart, v) for v, f in sq.forward):
        return False
    return all(e == RatFn.symbol(chart, p) for p, e in sq.action.items())


def param_matrix(action: Mapping[str, RatFn], params: Sequence[str]) -> Tuple[Tuple[Fraction, ...], ...]:
    """Affine action as rows ``(linear coefficients..., constant)``."""
    rows = []
    origin = {p: 0 for p in params}
    for p in params:
        poly = action[p].as_poly()
        row = [poly.diff(q).evaluate(origin) for q in params]
        row.append(poly.evaluate(origin))
        rows.append(tuple(row))
    return tuple(rows)


def compose_actions(first: Mapping[str, RatFn], then: Mapping[str, RatFn]) -> Dict[str, RatFn]:
    """Parameter action of ``then`` after ``first``."""
    chart = next(iter(first.values())).chart
    sub = Substitution(chart, dict(first), chart)
    return {p: sub.apply(e) for p, e in then.items()}


# -- Lie series ---------------------------------------------------------------


def lie_series(f: RatFn, coeff: RatFn, g: RatFn, pairing=None, max_terms: int = 30,
               divisor_symbol: Optional[str] = None) -> RatFn:
    """``sum_k (coeff/f)^k / k! * ad_f^k(g)`` with ``ad_f(g) = {f, g}``.

    With ``divisor_symbol`` the powers of ``1/f`` are written with that
    chart symbol instead of the expression ``f``.
    """
    if isinstance(f, Poly):
        f = RatFn.from_poly(f)
    chart = g.chart
    inv = RatFn.symbol(chart, divisor_symbol).inverse() if divisor_symbol else f.inverse()
    scale = coeff * inv
    total = g
    term = g
    for k in range(1, max_terms + 1):
        term = poisson_bracket(f, term, pairing)
        if term.is_zero():
            return total
        total = total + term * (scale ** k) / factorial(k)
    raise SeriesError(f"Lie series did not terminate within {max_terms} terms")


def generate_backlund_from_series(f: RatFn, coeff: RatFn, chart: Chart, action: Mapping[str, object],
                                  defined: Optional[Mapping[str, RatFn]] = None,
                                  divisor_symbol: Optional[str] = None, name: str = "",
                                  lattice: Optional[ParameterLattice] = None, max_terms: int = 30,
                                  check: bool = True) -> BacklundMap:
    """Map ``g -> s(g)`` on every chart variable from the Lie series.

    ``defined`` lists variables that are functions of the paired ones (such
    as a variable equal to the divisor); for those ``s(v) = v + s(d) - d``.
    """
    defined = dict(defined or {})
    fwd: Dict[str, RatFn] = {}
    for v in chart.vars:
        if v in defined:
            if divisor_symbol == v:
                fwd[v] = RatFn.symbol(chart, v)
                continue
            d = defined[v]
            fwd[v] = RatFn.symbol(chart, v) + lie_series(f, coeff, d, None, max_terms, divisor_symbol) - d
        else:
            fwd[v] = lie_series(f, coeff, RatFn.symbol(chart, v), None, max_terms, divisor_symbol)
    return make_backlund(chart, fwd, action, name, f, coeff, lattice, check)


@dataclass(frozen=True)
class Erratum:
    """A printed component that disagrees with the derived one."""

    map_name: str
    component: str
    printed: str
    derived: str
    note: str = ""

    def as_dict(self) -> Dict[str, str]:
        return {"map": self.map_name, "component": self.component, "printed": self.printed,
                "derived": self.derived, "note": self.note}


def compare_maps(printed: BacklundMap, derived: BacklundMap) -> List[Erratum]:
    out = []
    pf, df = printed.forward, derived.forward
    for v in printed.chart.vars:
        if pf[v] != df[v]:
            out.append(Erratum(printed.name, v, format_ratfn(pf[v]), format_ratfn(df[v])))
    pa, da = printed.action, derived.action
    for p in pa:
        if pa[p] != da.get(p):
            out.append(Erratum(printed.name, f"param {p}", format_ratfn(pa[p]), format_ratfn(da[p])))
    return out


# -- holomorphy and invariant divisors -----------------------------------------


@dataclass(frozen=True)
class HolomorphyResult:
    polynomial: bool
    hamiltonian: Optional[RatFn] = None
    field: Optional[VectorField] = None
    offending: Tuple[Tuple[str, str], ...] = ()

    def __bool__(self):
        return self.polynomial


def verify_holomorphy(H: HamiltonianSystem, chart_map: BirationalMap, correction=0,
                      transform_field: bool = True,
                      relation: Optional[ParameterLattice] = None) -> HolomorphyResult:
    """Transform ``H - correction`` (and the flow) and test polynomiality.

    With ``relation`` one parameter is first eliminated through the lattice
    relation, on both sides of the map.
    """
    if H.chart != chart_map.source:
        raise ChartError("Hamiltonian and chart map disagree on the source chart")
    corr = correction if isinstance(correction, RatFn) else RatFn.const(H.chart, correction)
    field_ = H.field()
    if relation is not None and relation.constrained:
        src = relation.binding(chart_map.source)
        dst = relation.binding(chart_map.target)
        fsub = Substitution(chart_map.source, dict(src), chart_map.source)
        isub = Substitution(chart_map.target, dict(dst), chart_map.target)
        chart_map = BirationalMap(chart_map.source, chart_map.target,
                                  tuple((k, fsub.apply(v)) for k, v in chart_map.forward),
                                  tuple((k, isub.apply(v)) for k, v in chart_map.inverse),
                                  (), chart_map.name, check=False)
        field_ = field_.substitute_params(dict(src))
        corr = fsub.apply(corr)
        H = HamiltonianSystem(H.chart, fsub.apply(H.hamiltonian), H.time, H.name)
    sub = chart_map.inverse_substitution()
    K = sub.apply(H.hamiltonian - corr)
    bad = []
    if not K.is_polynomial_in():
        bad.append(("hamiltonian", format_ratfn(K)))
    W = None
    if transform_field:
        W = pushforward(field_, chart_map)
        for v, c in W.items():
            if not c.is_polynomial_in():
                bad.append((v, format_ratfn(c)))
    return HolomorphyResult(not bad, K, W, tuple(bad))


def invariant_divisor_check(V: VectorField, divisor, binding: Optional[Mapping[str, object]] = None) -> bool:
    """Under ``binding``, is ``L_V(divisor)`` divisible by ``divisor``?"""
    W = V.substitute_params(binding or {})
    d = divisor if isinstance(divisor, RatFn) else (
        RatFn.from_poly(divisor) if isinstance(divisor, Poly) else RatFn.parse(str(divisor), V.chart))
    if binding:
        d = d.substitute({k: (v if isinstance(v, RatFn) else RatFn.const(V.chart, v)) for k, v in binding.items()}, V.chart)
    q = W.lie_derivative(d) / d
    return q.is_polynomial_in()


def first_integral_preserved(S: BacklundMap, integral: RatFn) -> bool:
    """``S^*(I) - I`` (parameters moved by the action) is divisible by ``I``.

    With the map's relation imposed the statement is that ``S`` keeps the
    zero set of the first integral.
    """
    chart = S.chart
    pull = S.underlying.forward_substitution(with_params=True)
    moved = pull.apply(integral)
    diff = moved - integral
    if diff.is_zero():
        return True
    q = diff / integral
    return q.is_polynomial_in()


# -- group structure ------------------------------------------------------------


def action_power(action: Mapping[str, RatFn], n: int) -> Dict[str, RatFn]:
    """``n``-fold composite of a parameter action."""
    chart = next(iter(action.values())).chart
    acc = {p: RatFn.symbol(chart, p) for p in action}
    for _ in range(n):
        acc = compose_actions(acc, action)
    return acc


def tau_action(first: BacklundMap, second: BacklundMap) -> Dict[str, RatFn]:
    """Parameter action of ``first`` followed by ``second``."""
    return compose_actions(first.action, second.action)


def infinite_order_witness(action: Mapping[str, RatFn], lattice: Optional[ParameterLattice] = None,
                           n: int = 6) -> Tuple[bool, Tuple[Tuple[Fraction, ...], ...]]:
    """Check ``action^k != id`` for ``k = 1..n`` and that it translates the relation line.

    Returns ``(ok, translation)`` where ``translation`` holds the constant
    shift of each parameter per application once the relation is imposed
    (the last parameter is solved from the relation).
    """
    chart = next(iter(action.values())).chart
    for k in range(1, n + 1):
        pk = action_power(action, k)
        if all(e == RatFn.symbol(chart, p) for p, e in pk.items()):
            return False, ()
    if lattice is None or not lattice.constrained:
        return True, ()
    binding = lattice.binding(chart)
    shifts = []
    for p, e in action.items():
        moved = e.substitute(binding, chart) if binding else e
        base = RatFn.symbol(chart, p).substitute(binding, chart)
        d = moved - base
        if not d.is_constant():
            return False, ()
        shifts.append(d.constant_value())
    return any(shifts), (tuple(shifts),)


# -- typesetting defects ----------------------------------------------------------


def _top_level_gaps(text: str) -> List[int]:
    """Whitespace positions at depth 0 that separate two operands."""
    gaps, depth = [], 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == " " and depth == 0:
            left = text[:i].rstrip()
            right = text[i:].lstrip()
            if left and right and (left[-1].isalnum() or left[-1] == ")") and (right[0].isalnum() or right[0] == "("):
                gaps.append(i)
    return gaps


def split_run_together(text: str, chart: Chart, expected: Sequence[RatFn],
                       abbreviations: Optional[Mapping[str, RatFn]] = None) -> Optional[Tuple[str, str]]:
    """Find where a missing separator splits ``text`` into the two expected expressions.

    ``abbreviations`` maps extra names (such as ``f1``) to expressions over
    ``chart``.  Returns the two halves, or ``None`` if no split reproduces
    ``expected``.
    """
    from .exactalg import ParseError, parse

    abbreviations = dict(abbreviations or {})
    ext = chart.with_symbols(chart.name + "+abbr", tuple(abbreviations)) if abbreviations else chart
    for gap in _top_level_gaps(text):
        left, right = text[:gap].strip(), text[gap:].strip()
        try:
            parts = [parse(h, ext) for h in (left, right)]
        except (ParseError, ZeroDivisionError):
            continue
        if abbreviations:
            sub = {k: v.rechart(ext) for k, v in abbreviations.items()}
            parts = [p.substitute(sub, ext).rechart(chart) for p in parts]
        if parts[0] == expected[0] and parts[1] == expected[1]:
            return left, right
    return None

"""Birational coordinate changes and conjugation of vector fields.

A :class:`BirationalMap` stores both directions.  ``forward`` expresses each
target variable over the source chart; ``inverse`` expresses each source
variable over the target chart.  Both directions are written in the
*source* parameters; ``param_action`` gives the target parameters as affine
functions of the source ones.  Time symbols pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .exactalg import Chart, ChartError, Poly, RatFn, Substitution, format_ratfn, parse
from .systems.fields import VectorField


class MapError(ValueError):
    """Malformed or non-invertible coordinate change."""


def _to_ratfn(value, chart: Chart) -> RatFn:
    if isinstance(value, RatFn):
        if value.chart != chart:
            raise ChartError(f"expression over {value.chart.name!r}, expected {chart.name!r}")
        return value
    if isinstance(value, Poly):
        return RatFn.from_poly(value)
    if isinstance(value, str):
        return parse(value, chart)
    return RatFn.const(chart, value)


@dataclass(frozen=True)
class BirationalMap:
    """Two-sided rational change of variables with an affine parameter action."""

    source: Chart
    target: Chart
    forward: Tuple[Tuple[str, RatFn], ...]
    inverse: Tuple[Tuple[str, RatFn], ...]
    param_action: Tuple[Tuple[str, RatFn], ...] = ()
    name: str = ""
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        fwd = self.forward.items() if isinstance(self.forward, Mapping) else self.forward
        inv = self.inverse.items() if isinstance(self.inverse, Mapping) else self.inverse
        act = self.param_action.items() if isinstance(self.param_action, Mapping) else self.param_action
        fwd = tuple((k, _to_ratfn(v, self.source)) for k, v in fwd)
        inv = tuple((k, _to_ratfn(v, self.target)) for k, v in inv)
        act = tuple((k, _to_ratfn(v, self.source)) for k, v in act)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "param_action", act)
        if {k for k, _ in fwd} != set(self.target.vars) or len(fwd) != self.target.dim:
            raise MapError(f"forward must bind exactly {self.target.vars}")
        if {k for k, _ in inv} != set(self.source.vars) or len(inv) != self.source.dim:
            raise MapError(f"inverse must bind exactly {self.source.vars}")
        if self.source.times != self.target.times:
            raise MapError("source and target must share time symbols")
        for k, v in act:
            if k not in self.target.params:
                raise MapError(f"param_action binds unknown parameter {k!r}")
            for s in v.used_symbols():
                if s not in self.source.params:
                    raise MapError(f"param_action for {k!r} uses non-parameter {s!r}")
            if not v.is_polynomial() or v.num.degree() > 1:
                raise MapError(f"param_action for {k!r} is not affine")
        for p in self.target.params:
            if p not in dict(act) and p not in self.source.params:
                raise MapError(f"target parameter {p!r} has no source counterpart")
        if self.check:
            bad = self.identity_defects()
            if bad:
                raise MapError(f"{self.name or 'map'}: forward and inverse are not mutually inverse on {bad}")

    # -- construction helpers ----------------------------------------------

    @classmethod
    def from_forward(cls, source: Chart, target: Chart, forward: Mapping[str, object],
                     param_action: Optional[Mapping[str, object]] = None, name: str = "") -> "BirationalMap":
        """Build a map whose inverse is found by :func:`triangular_invert`."""
        fwd = {k: _to_ratfn(v, source) for k, v in forward.items()}
        inv = triangular_invert(fwd, source, target)
        return cls(source, target, tuple(fwd.items()), tuple(inv.items()),
                   tuple((param_action or {}).items()), name)

    @classmethod
    def identity(cls, chart: Chart, name: str = "id") -> "BirationalMap":
        ids = tuple((v, RatFn.symbol(chart, v)) for v in chart.vars)
        return cls(chart, chart, ids, ids, (), name)

    # -- accessors ----------------------------------------------------------

    @property
    def forward_map(self) -> Dict[str, RatFn]:
        return dict(self.forward)

    @property
    def inverse_map(self) -> Dict[str, RatFn]:
        return dict(self.inverse)

    @property
    def action(self) -> Dict[str, RatFn]:
        """Every target parameter as an expression in source parameters."""
        act = dict(self.param_action)
        for p in self.target.params:
            if p not in act:
                act[p] = RatFn.symbol(self.source, p)
        return act

    def forward_substitution(self, with_params: bool = True) -> Substitution:
        """Pull expressions over the target chart back to the source chart."""
        bind = dict(self.forward)
        if with_params:
            bind.update(self.action)
        return Substitution(self.target, bind, self.source)

    def inverse_substitution(self) -> Substitution:
        """Push expressions over the source chart to the target chart."""
        bind = dict(self.inverse)
        # source parameters pass through by name into the target chart
        return Substitution(self.source, bind, self.target)

    def identity_defects(self) -> List[str]:
        """Variables on which forward∘inverse or inverse∘forward is not the identity."""
        bad = []
        back = Substitution(self.source, dict(self.inverse), self.target)
        for y, f in self.forward:
            if back.apply(f) != RatFn.symbol(self.target, y):
                bad.append(y)
        fwd = Substitution(self.target, dict(self.forward), self.source)
        for x, g in self.inverse:
            if fwd.apply(g) != RatFn.symbol(self.source, x):
                bad.append(x)
        return bad

    def param_values(self, values: Mapping[str, object]) -> Dict[str, object]:
        """Numeric target parameters for numeric source parameters."""
        return {p: e.evaluate(values) for p, e in self.action.items()}

    def as_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "source": str(self.source),
            "target": str(self.target),
            "forward": {k: format_ratfn(v) for k, v in self.forward},
            "inverse": {k: format_ratfn(v) for k, v in self.inverse},
            "param_action": {k: format_ratfn(v) for k, v in self.param_action},
        }


# -- inversion ---------------------------------------------------------------


def _combined_chart(source: Chart, target: Chart) -> Tuple[Chart, Dict[str, str]]:
    """Chart holding both variable sets; target variables renamed if needed."""
    taken = set(source.symbols)
    rename = {}
    for v in target.vars:
        new = v
        while new in taken:
            new = new + "_"
        taken.add(new)
        rename[v] = new
    params = source.params + tuple(p for p in target.params if p not in source.params)
    chart = Chart(f"{source.name}+{target.name}", source.vars + tuple(rename[v] for v in target.vars),
                  source.time_var, params, source.second_time)
    return chart, rename


def _mobius(f: RatFn, var: str) -> Optional[Tuple[RatFn, RatFn, RatFn, RatFn]]:
    """Write ``f = (a*var + b)/(c*var + d)`` with a, b, c, d free of ``var``."""
    if f.num.degree(var) > 1 or f.den.degree(var) > 1:
        return None
    chart = f.chart
    zero = Poly.zero(chart)
    nc = f.num.coefficients_in(var)
    dc = f.den.coefficients_in(var)
    a, b = nc.get(1, zero), nc.get(0, zero)
    c, d = dc.get(1, zero), dc.get(0, zero)
    return tuple(RatFn.from_poly(p) for p in (a, b, c, d))


def triangular_invert(forward: Mapping[str, RatFn], source: Chart, target: Chart) -> Dict[str, RatFn]:
    """Invert a triangular change of variables.

    Repeatedly picks a target equation ``y_j = F_j`` which, after inserting
    the unknowns solved so far, involves one remaining unknown ``x_i`` in
    Möbius form, and solves for it.  Raises :class:`MapError` if no such
    ordering exists.
    """
    if len(forward) != len(source.vars):
        raise MapError("triangular inversion needs as many equations as unknowns")
    chart, rename = _combined_chart(source, target)
    eqs = {y: f.rechart(chart) for y, f in forward.items()}
    unknowns = list(source.vars)
    solved: Dict[str, RatFn] = {}
    while eqs:
        progress = False
        for y in list(eqs):
            f = eqs[y]
            if solved:
                f = f.substitute(solved, chart)
                eqs[y] = f
            free = [u for u in unknowns if u not in solved and u in f.used_symbols()]
            if len(free) != 1:
                if not free:
                    raise MapError(f"equation for {y!r} no longer involves an unknown; map is not invertible")
                continue
            x = free[0]
            parts = _mobius(f, x)
            if parts is None:
                continue
            a, b, c, d = parts
            if (a * d - b * c).is_zero():
                raise MapError(f"equation for {y!r} is degenerate in {x!r}")
            Y = RatFn.symbol(chart, rename[y])
            # earlier solutions involve target variables only
            solved[x] = (b - d * Y) / (c * Y - a)
            del eqs[y]
            progress = True
        if not progress:
            raise MapError(f"not triangular: cannot isolate an unknown in {sorted(eqs)}")
    back = {rename[v]: v for v in target.vars}
    out = {}
    for x in source.vars:
        g = solved[x]
        if any(s in source.vars for s in g.used_symbols()):
            raise MapError(f"solution for {x!r} still depends on source variables")
        out[x] = g.rechart(target, back)
    return out


# -- pushforward and conjugation --------------------------------------------


def transport_components(V: VectorField, M: BirationalMap) -> List[RatFn]:
    """Chain-rule derivatives of the forward map along ``V`` (over the source)."""
    if V.chart != M.source:
        raise ChartError(f"field over {V.chart.name!r}, map starts at {M.source.name!r}")
    return [V.lie_derivative(f) for _, f in M.forward]


def pushforward(V: VectorField, M: BirationalMap) -> VectorField:
    """Field on ``M.target`` conjugate to ``V`` (still in source parameters)."""
    comps = transport_components(V, M)
    sub = M.inverse_substitution()
    out = {y: sub.apply(c) for (y, _), c in zip(M.forward, comps)}
    return VectorField(M.target, tuple(out[y] for y in M.target.vars), V.time, V.name)


def compose(A: BirationalMap, B: BirationalMap, name: str = "") -> BirationalMap:
    """The map ``B after A`` from ``A.source`` to ``B.target``."""
    if A.target != B.source:
        raise ChartError(f"cannot compose: {A.target.name!r} is not {B.source.name!r}")
    pull = A.forward_substitution(with_params=True)
    fwd = tuple((y, pull.apply(f)) for y, f in B.forward)
    # inverse: x = A^-1(y_A), y_A = B^-1(y_B) in B's parameters = A's action
    b_inv = {k: v.substitute(_action_on(B.target, A), B.target) for k, v in B.inverse}
    sub = Substitution(A.target, b_inv, B.target)
    inv = tuple((x, sub.apply(g.rechart(A.target) if g.chart != A.target else g)) for x, g in A.inverse)
    act = {p: e.substitute(dict(A.action), A.source) if e.chart == B.source else e
           for p, e in B.action.items()}
    act = {p: e for p, e in act.items() if e != RatFn.symbol(A.source, p) or p not in A.source.params}
    return BirationalMap(A.source, B.target, fwd, inv, tuple(act.items()), name or f"{B.name}∘{A.name}")


def _action_on(chart: Chart, A: BirationalMap) -> Dict[str, RatFn]:
    """A's parameter action written over ``chart`` (which shares A's parameters)."""
    out = {}
    for p, e in A.param_action:
        out[p] = e.rechart(chart)
    return out


@dataclass(frozen=True)
class ConjugationResult:
    equal: bool
    difference: Tuple[RatFn, ...] = ()
    reason: str = ""

    def __bool__(self):
        return self.equal


def verify_conjugation(A: VectorField, M: BirationalMap, B: VectorField,
                       pullback: bool = True) -> ConjugationResult:
    """Check that ``M`` carries ``A`` to ``B`` (B in target parameters).

    The default check compares ``L_A(F_j)`` with ``B_j(F)`` over the source
    chart, which is equivalent for birational ``M`` and avoids composing with
    the inverse.  On failure the difference is reported in target coordinates.
    """
    if A.chart != M.source:
        return ConjugationResult(False, (), f"field chart {A.chart.name!r} is not the map source {M.source.name!r}")
    if B.chart != M.target:
        return ConjugationResult(False, (), f"field chart {B.chart.name!r} is not the map target {M.target.name!r}")
    if A.dim != B.dim:
        return ConjugationResult(False, (), f"dimension mismatch {A.dim} vs {B.dim}")
    if pullback:
        pull = M.forward_substitution(with_params=True)
        lhs = transport_components(A, M)
        ok = True
        for (y, _), l in zip(M.forward, lhs):
            if l != pull.apply(B[y]):
                ok = False
                break
        if ok:
            return ConjugationResult(True)
    pushed = pushforward(A, M)
    Bsub = B.substitute_params(_action_on(B.chart, M))
    diff = pushed.difference(Bsub)
    if all(d.is_zero() for d in diff):
        return ConjugationResult(True)
    return ConjugationResult(False, diff, "pushed-forward field differs")


def jacobian_matrix(M: BirationalMap) -> List[List[RatFn]]:
    return [[f.diff(x) for x in M.source.vars] for _, f in M.forward]


def determinant(rows: Sequence[Sequence[RatFn]]) -> RatFn:
    """Determinant by fraction-free-style elimination over rational functions."""
    m = [list(r) for r in rows]
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        raise ValueError("empty matrix")
    chart = m[0][0].chart
    det = RatFn.const(chart, 1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not m[r][col].is_zero():
                if piv is None or len(m[r][col].num) < len(m[piv][col].num):
                    piv = r
        if piv is None:
            return RatFn.const(chart, 0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        for r in range(col + 1, n):
            if m[r][col].is_zero():
                continue
            f = m[r][col] / p
            m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def jacobian_determinant(M: BirationalMap) -> RatFn:
    """``det(d forward / d source vars)`` as a rational function."""
    return determinant(jacobian_matrix(M))

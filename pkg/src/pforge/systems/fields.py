"""Vector fields, Hamiltonian systems and two-time systems over a chart."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from ..exactalg import Chart, ChartError, RatFn, format_ratfn, parse


def _as_ratfn(value, chart: Chart) -> RatFn:
    if isinstance(value, RatFn):
        if value.chart != chart:
            raise ChartError(f"component over {value.chart.name!r}, expected {chart.name!r}")
        return value
    if isinstance(value, str):
        return parse(value, chart)
    if isinstance(value, (int, Fraction)):
        return RatFn.const(chart, value)
    raise TypeError(f"cannot use {type(value).__name__} as a field component")


@dataclass(frozen=True)
class VectorField:
    """``d(var)/d(time) = component`` for every state variable of ``chart``.

    ``time`` names the independent variable (defaults to the chart's time
    variable); it may be ``None`` for autonomous fields on charts without time.
    """

    chart: Chart
    components: Tuple[RatFn, ...]
    time: Optional[str] = None
    name: str = ""

    def __post_init__(self):
        comps = tuple(_as_ratfn(c, self.chart) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.chart.dim:
            raise ValueError(f"{len(comps)} components for {self.chart.dim} variables in {self.chart}")
        if self.time is None and self.chart.time_var is not None:
            object.__setattr__(self, "time", self.chart.time_var)
        if self.time is not None and self.time not in self.chart.times:
            raise ChartError(f"time symbol {self.time!r} is not a time of {self.chart}")

    @classmethod
    def from_strings(cls, chart: Chart, exprs: Sequence[str], time: Optional[str] = None, name: str = "") -> "VectorField":
        return cls(chart, tuple(parse(e, chart) for e in exprs), time, name)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __getitem__(self, var: str) -> RatFn:
        return self.components[self.chart.vars.index(var)]

    def items(self):
        return zip(self.chart.vars, self.components)

    def lie_derivative(self, f: RatFn) -> RatFn:
        """Total derivative of ``f`` along the flow."""
        acc = f.diff(self.time) if self.time else RatFn.const(self.chart, 0)
        for v, c in self.items():
            df = f.diff(v)
            if not df.is_zero():
                acc = acc + df * c
        return acc

    def substitute_params(self, bindings: Mapping[str, object]) -> "VectorField":
        """Replace parameters (or time) by constants or expressions."""
        if not bindings:
            return self
        sub = {k: _as_ratfn(v, self.chart) for k, v in bindings.items()}
        comps = tuple(c.substitute(sub, self.chart) for c in self.components)
        return VectorField(self.chart, comps, self.time, self.name)

    def difference(self, other: "VectorField") -> Tuple[RatFn, ...]:
        if other.chart != self.chart:
            raise ChartError("fields live on different charts")
        return tuple(a - b for a, b in zip(self.components, other.components))

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial_in() for c in self.components)

    def with_name(self, name: str) -> "VectorField":
        return VectorField(self.chart, self.components, self.time, name)

    def as_dict(self) -> Dict[str, str]:
        return {f"d{v}/d{self.time or 't'}": format_ratfn(c) for v, c in self.items()}

    def __str__(self):
        lines = [f"{self.name or 'field'} on {self.chart}"]
        lines += [f"  {k} = {v}" for k, v in self.as_dict().items()]
        return "\n".join(lines)


@dataclass(frozen=True)
class HamiltonianSystem:
    """Chart with a canonical pairing plus a Hamiltonian."""

    chart: Chart
    hamiltonian: RatFn
    time: Optional[str] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "hamiltonian", _as_ratfn(self.hamiltonian, self.chart))
        if not self.chart.pairs or 2 * len(self.chart.pairs) != self.chart.dim:
            raise ChartError(f"chart {self.chart.name!r} lacks a canonical pairing covering all variables")
        if self.time is None and self.chart.time_var is not None:
            object.__setattr__(self, "time", self.chart.time_var)

    def field(self) -> VectorField:
        from ..hamsys import hamiltonian_field
        return hamiltonian_field(self)


@dataclass(frozen=True)
class TwoTimeSystem:
    """Two commuting flows on one chart, along ``t`` and ``s``."""

    chart: Chart
    field_t: VectorField
    field_s: VectorField
    name: str = ""
    hamiltonians: Tuple[RatFn, ...] = field(default=())

    def __post_init__(self):
        if self.field_t.chart != self.chart or self.field_s.chart != self.chart:
            raise ChartError("both flows must live on the system's chart")
        if self.field_t.time == self.field_s.time:
            raise ValueError("the two flows need distinct time symbols")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def substitute_params(self, bindings) -> "TwoTimeSystem":
        hs = tuple(h.substitute({k: _as_ratfn(v, self.chart) for k, v in bindings.items()}, self.chart)
                   for h in self.hamiltonians)
        return TwoTimeSystem(self.chart, self.field_t.substitute_params(bindings),
                             self.field_s.substitute_params(bindings), self.name, hs)

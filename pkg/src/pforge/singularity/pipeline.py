"""Scripted chains of coordinate changes and blow-ups.

A script is a list of steps; each step names the new variables and one of

``change``
    ``forward``: new variable -> expression in the current chart.
``shift``
    ``by``: old variable -> expression ``e``; the new variable is ``old - e``.
``point_blowup``
    ``center``: the divisor variable ``x``; every other variable becomes ``v / x``.
``locus_blowup``
    ``center`` and ``locus``: old variable -> ``phi``; those become
    ``(v - phi) / x``, the rest are renamed.
``linear``
    ``matrix``: rational matrix ``M``; new = ``M @ old``.
``canonical``
    like ``change`` but the target chart gets canonical ``pairs``.

Steps may set ``divisor`` (a new variable) to record the accessible
singularities of the resulting field, and ``label`` for annotations.
Scripts are JSON documents; the shipped ones live in ``pforge/data``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Mapping, Optional, Sequence

from ..birational import BirationalMap, compose, pushforward
from ..exactalg import Chart, RatFn
from ..systems.fields import VectorField
from .core import DivisorChart, SingularPoint, SingularityError, find_accessible_singularities


@dataclass(frozen=True)
class Step:
    kind: str
    vars: tuple
    spec: Mapping[str, object]
    label: str = ""
    divisor: Optional[str] = None

    @classmethod
    def from_dict(cls, d: Mapping[str, object]) -> "Step":
        spec = {k: v for k, v in d.items() if k not in ("type", "vars", "label", "divisor")}
        return cls(d["type"], tuple(d["vars"]), spec, d.get("label", ""), d.get("divisor"))


@dataclass
class StepRecord:
    step: Step
    map: BirationalMap
    field: VectorField
    divisor: Optional[DivisorChart] = None
    singularities: List[SingularPoint] = field(default_factory=list)
    note: str = ""


@dataclass
class PipelineResult:
    initial: VectorField
    records: List[StepRecord]
    composite: BirationalMap

    @property
    def final_field(self) -> VectorField:
        return self.records[-1].field if self.records else self.initial

    @property
    def final(self) -> Optional[DivisorChart]:
        return self.records[-1].divisor if self.records else None

    def record(self, label: str) -> StepRecord:
        for r in self.records:
            if r.step.label == label:
                return r
        raise KeyError(label)


def _expr(value, chart: Chart) -> RatFn:
    if isinstance(value, RatFn):
        return value
    if isinstance(value, (int, Fraction)):
        return RatFn.const(chart, value)
    return RatFn.parse(str(value), chart)


def step_forward(step: Step, chart: Chart) -> Dict[str, RatFn]:
    """Forward substitution (new variable -> expression in ``chart``)."""
    if len(step.vars) != chart.dim:
        raise SingularityError(f"{step.label or step.kind}: {len(step.vars)} new names for {chart.dim} variables")
    olds = chart.vars
    sym = {v: RatFn.symbol(chart, v) for v in olds}
    s = step.spec
    if step.kind in ("change", "canonical"):
        fwd = {k: _expr(v, chart) for k, v in s["forward"].items()}
        if set(fwd) != set(step.vars):
            raise SingularityError(f"{step.label}: forward must define exactly {step.vars}")
        return fwd
    if step.kind == "shift":
        by = {k: _expr(v, chart) for k, v in s["by"].items()}
        return {new: sym[old] - by[old] if old in by else sym[old] for new, old in zip(step.vars, olds)}
    if step.kind in ("point_blowup", "locus_blowup"):
        x = s["center"]
        locus = {k: _expr(v, chart) for k, v in s.get("locus", {}).items()}
        out = {}
        for new, old in zip(step.vars, olds):
            if old == x:
                out[new] = sym[old]
            elif step.kind == "point_blowup":
                out[new] = sym[old] / sym[x]
            elif old in locus:
                out[new] = (sym[old] - locus[old]) / sym[x]
            else:
                out[new] = sym[old]
        return out
    if step.kind == "linear":
        M = [[Fraction(str(c)) for c in row] for row in s["matrix"]]
        return {new: sum((sym[o] * c for o, c in zip(olds, row) if c), RatFn.const(chart, 0))
                for new, row in zip(step.vars, M)}
    raise SingularityError(f"unknown step type {step.kind!r}")


def _target_chart(step: Step, chart: Chart, index: int) -> Chart:
    name = step.spec.get("chart") or f"{chart.name}>{index}"
    pairs = tuple(tuple(p) for p in step.spec.get("pairs", ())) if step.kind == "canonical" else ()
    return Chart(name, step.vars, chart.time_var, chart.params, chart.second_time, pairs)


def run_pipeline(V: VectorField, script: Sequence, find_points: bool = True) -> PipelineResult:
    """Execute ``script`` on ``V`` with exact algebra.

    Each step's map is inverted with :func:`triangular_invert` and the field
    is pushed forward.  For steps that declare a divisor, the field is checked
    to be of divisor form and its accessible singularities are recorded.
    """
    steps = [s if isinstance(s, Step) else Step.from_dict(s) for s in script]
    records: List[StepRecord] = []
    current = V
    composite = BirationalMap.identity(V.chart)
    for i, step in enumerate(steps, 1):
        chart = current.chart
        fwd = step_forward(step, chart)
        target = _target_chart(step, chart, i)
        try:
            M = BirationalMap.from_forward(chart, target, fwd, name=step.label or step.kind)
        except Exception as exc:
            raise SingularityError(f"{step.label or step.kind}: {exc}") from exc
        new_field = pushforward(current, M)
        rec = StepRecord(step, M, new_field)
        if step.divisor:
            try:
                rec.divisor = DivisorChart(new_field, step.divisor)
            except SingularityError as exc:
                raise SingularityError(f"{step.label or step.kind}: {exc}") from exc
            if find_points:
                try:
                    rec.singularities = find_accessible_singularities(rec.divisor)
                except SingularityError as exc:
                    rec.note = str(exc)
        records.append(rec)
        composite = compose(composite, M, name="composite")
        current = new_field
    return PipelineResult(V, records, composite)


def load_script(name_or_path: str) -> dict:
    """A shipped script by name (``"PII"``, ``"eq1"``) or a JSON file path."""
    if name_or_path.endswith(".json"):
        with open(name_or_path) as fh:
            return json.load(fh)
    text = resources.files("pforge.data").joinpath(f"pipeline_{name_or_path}.json").read_text()
    return json.loads(text)


def run_script(doc: Mapping[str, object], find_points: bool = True) -> PipelineResult:
    """Run a loaded script document on its registry system."""
    from ..systems import registry

    V = registry.get(doc["system"])
    return run_pipeline(V, doc["steps"], find_points)

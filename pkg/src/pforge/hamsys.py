"""Poisson brackets, Hamiltonian vector fields, first integrals, weights.

The bracket follows the convention ``{p_i, q_i} = 1``::

    {F, G} = sum_i dF/dp_i * dG/dq_i - dF/dq_i * dG/dp_i

and Hamiltonian flows are ``dq_i/dt = dH/dp_i``, ``dp_i/dt = -dH/dq_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .exactalg import Chart, ChartError, Poly, RatFn
from .systems.fields import HamiltonianSystem, VectorField

Pairing = Sequence[Tuple[int, int]]

# sign of {p_i, q_i}; the single place the bracket convention is fixed
BRACKET_SIGN = 1


def _pairs(chart: Chart, pairing: Optional[Pairing]) -> Pairing:
    pairs = chart.pairs if pairing is None else tuple(tuple(p) for p in pairing)
    if not pairs:
        raise ChartError(f"chart {chart.name!r} has no canonical pairing")
    seen = set()
    for q, p in pairs:
        if q in seen or p in seen or not (0 <= q < chart.dim and 0 <= p < chart.dim):
            raise ChartError(f"invalid pairing {pairs}")
        seen.update((q, p))
    return pairs


def poisson_bracket(F: RatFn, G: RatFn, pairing: Optional[Pairing] = None) -> RatFn:
    """``{F, G}`` with ``{p_i, q_i} = 1``."""
    if F.chart != G.chart:
        raise ChartError(f"bracket of expressions on {F.chart.name!r} and {G.chart.name!r}")
    chart = F.chart
    acc = RatFn.const(chart, 0)
    for qi, pi in _pairs(chart, pairing):
        q, p = chart.vars[qi], chart.vars[pi]
        fp, gq = F.diff(p), G.diff(q)
        if not fp.is_zero() and not gq.is_zero():
            acc = acc + fp * gq
        fq, gp = F.diff(q), G.diff(p)
        if not fq.is_zero() and not gp.is_zero():
            acc = acc - fq * gp
    return acc * BRACKET_SIGN


def hamiltonian_field(H: Union[HamiltonianSystem, RatFn], time: Optional[str] = None) -> VectorField:
    """Vector field generated by a Hamiltonian on a paired chart."""
    if isinstance(H, HamiltonianSystem):
        ham, time, name = H.hamiltonian, H.time, H.name
    else:
        ham, name = H, ""
    chart = ham.chart
    pairs = _pairs(chart, None)
    comps: List[Optional[RatFn]] = [None] * chart.dim
    for qi, pi in pairs:
        comps[qi] = ham.diff(chart.vars[pi]) * BRACKET_SIGN
        comps[pi] = -ham.diff(chart.vars[qi]) * BRACKET_SIGN
    if any(c is None for c in comps):
        raise ChartError("pairing does not cover every state variable")
    return VectorField(chart, tuple(comps), time, name)


def first_integral_residual(V: VectorField, F: RatFn) -> RatFn:
    """``dF/dt + sum_i dF/dx_i * V_i``; zero iff ``F`` is a first integral."""
    if F.chart != V.chart:
        raise ChartError("first integral and field on different charts")
    return V.lie_derivative(F)


def hamiltonian_from_field(V: VectorField) -> RatFn:
    """Recover a polynomial Hamiltonian from a polynomial Hamiltonian field.

    Integrates the 1-form ``dH`` along rays from the origin of the state
    variables (time and parameters held fixed), so the result has no
    state-independent part.  Raises ``ValueError`` if the field is not
    Hamiltonian for the chart's pairing.
    """
    chart = V.chart
    pairs = _pairs(chart, None)
    # dH/dz_k for every state variable
    grad: Dict[int, Poly] = {}
    for qi, pi in pairs:
        grad[pi] = V.components[qi].as_poly() * BRACKET_SIGN
        grad[qi] = -V.components[pi].as_poly() * BRACKET_SIGN
    state = range(chart.dim)
    terms: Dict[int, Fraction] = {}
    for k, g in grad.items():
        unit = chart.unit(k)
        for key, c in g.items():
            deg = sum(chart.exponent(key, i) for i in state)
            new = key + unit
            terms[new] = terms.get(new, Fraction(0)) + c / (deg + 1)
    H = RatFn.from_poly(Poly.from_terms(chart, terms))
    if hamiltonian_field(H, V.time).components != V.components:
        raise ValueError("field is not Hamiltonian for the chart's pairing")
    return H


# -- weighted homogeneity ------------------------------------------------


ANY_DEGREE = "any"


@dataclass(frozen=True)
class QuasiHomogeneity:
    """Outcome of a weighted-degree check."""

    homogeneous: bool
    degree: Union[int, Fraction, str, None]
    mismatches: Tuple[Tuple[str, object], ...] = ()

    def __bool__(self):
        return self.homogeneous


def check_quasi_homogeneous(P: Union[Poly, RatFn], weights: Mapping[str, object]) -> QuasiHomogeneity:
    """Common weighted degree of all monomials of ``P``.

    The zero polynomial is homogeneous of every degree (``degree == "any"``).
    Missing weights for a used symbol raise ``KeyError``.
    """
    if isinstance(P, RatFn):
        P = P.as_poly()
    if P.is_zero():
        return QuasiHomogeneity(True, ANY_DEGREE)
    chart = P.chart
    used = P.used_positions()
    missing = [chart.symbols[i] for i in used if chart.symbols[i] not in weights]
    if missing:
        raise KeyError(f"no weight for {', '.join(missing)}")
    from .exactalg.parse import _format_monomial

    degs: Dict[object, List[str]] = {}
    for key in sorted(P.terms, reverse=True):
        d = sum(chart.exponent(key, i) * weights[chart.symbols[i]] for i in used)
        degs.setdefault(d, []).append(_format_monomial(chart, key) or "1")
    if len(degs) == 1:
        return QuasiHomogeneity(True, next(iter(degs)))
    mism = tuple((m, d) for d, ms in degs.items() for m in ms)
    return QuasiHomogeneity(False, None, mism)


# -- jets -----------------------------------------------------------------


def total_t_derivative(f: RatFn, jets: Sequence[str]) -> RatFn:
    """Formal total derivative along jet symbols ``u, u_t, u_tt, ...``.

    Each jet symbol is shifted to the next one; the last symbol must not
    occur in ``f`` since its derivative is not representable.
    """
    jets = list(jets)
    chart = f.chart
    acc = RatFn.const(chart, 0)
    for k, name in enumerate(jets):
        d = f.diff(name)
        if d.is_zero():
            continue
        if k + 1 >= len(jets):
            raise ValueError(f"derivative of {name!r} falls outside the jet chart")
        acc = acc + d * RatFn.symbol(chart, jets[k + 1])
    return acc

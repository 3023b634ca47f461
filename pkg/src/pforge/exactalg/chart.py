"""Coordinate charts and packed monomial keys."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

# bits per exponent field; the top bit of each variable field is a guard bit
FIELD_BITS = 16
MAX_EXPONENT = (1 << (FIELD_BITS - 1)) - 1


class ChartError(ValueError):
    """Raised for malformed charts, unknown symbols, or mixing charts."""


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate context shared by every expression built on it.

    ``symbols`` lists state variables first, then the time variable(s), then
    parameters.  Monomials over a chart are packed into a single integer whose
    natural ordering is the graded lexicographic order on ``symbols``.
    """

    name: str
    vars: Tuple[str, ...]
    time_var: Optional[str] = None
    params: Tuple[str, ...] = ()
    second_time: Optional[str] = None
    # canonical pairing (q index, p index) into ``vars``; empty for plain charts
    pairs: Tuple[Tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if not self.vars:
            raise ChartError(f"chart {self.name!r} has no state variables")
        syms = self.symbols
        if len(set(syms)) != len(syms):
            raise ChartError(f"chart {self.name!r} has repeated symbols: {syms}")
        for s in syms:
            if not s or not (s[0].isalpha() or s[0] == "_") or not all(c.isalnum() or c == "_" for c in s):
                raise ChartError(f"invalid symbol name {s!r}")
        seen = set()
        for q, p in self.pairs:
            for i in (q, p):
                if not 0 <= i < len(self.vars) or i in seen:
                    raise ChartError(f"bad canonical pairing {self.pairs} for {self.vars}")
                seen.add(i)

    # -- symbol bookkeeping -------------------------------------------------

    @cached_property
    def times(self) -> Tuple[str, ...]:
        return tuple(s for s in (self.time_var, self.second_time) if s)

    @cached_property
    def symbols(self) -> Tuple[str, ...]:
        return self.vars + self.times + self.params

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.symbols)}

    def position(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise ChartError(f"unknown symbol {name!r} in chart {self.name!r} {self.symbols}") from None

    def is_state(self, name: str) -> bool:
        return name in self.vars

    @property
    def dim(self) -> int:
        return len(self.vars)

    # -- packing ------------------------------------------------------------

    @cached_property
    def nsym(self) -> int:
        return len(self.symbols)

    @cached_property
    def shifts(self) -> Tuple[int, ...]:
        n = self.nsym
        return tuple(FIELD_BITS * (n - 1 - i) for i in range(n))

    @cached_property
    def degree_shift(self) -> int:
        return FIELD_BITS * self.nsym

    @cached_property
    def guard(self) -> int:
        g = 0
        for s in self.shifts:
            g |= 1 << (s + FIELD_BITS - 1)
        return g

    @cached_property
    def field_mask(self) -> int:
        return (1 << FIELD_BITS) - 1

    @cached_property
    def state_mask(self) -> int:
        """Bits covering the exponent fields of the state variables."""
        m = 0
        for i in range(len(self.vars)):
            m |= self.field_mask << self.shifts[i]
        return m

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.nsym:
            raise ChartError(f"exponent vector of length {len(exps)} for chart with {self.nsym} symbols")
        key = sum(exps) << self.degree_shift
        for e, sh in zip(exps, self.shifts):
            if e < 0 or e > MAX_EXPONENT:
                raise ChartError(f"exponent {e} out of range")
            key |= e << sh
        return key

    def unpack(self, key: int) -> Tuple[int, ...]:
        mask = self.field_mask
        return tuple((key >> sh) & mask for sh in self.shifts)

    def unit(self, i: int, e: int = 1) -> int:
        """Packed key of ``symbols[i] ** e``."""
        return (e << self.degree_shift) | (e << self.shifts[i])

    def exponent(self, key: int, i: int) -> int:
        return (key >> self.shifts[i]) & self.field_mask

    def divides(self, a: int, b: int) -> bool:
        """True when monomial ``a`` divides monomial ``b``."""
        if b < a:
            return False
        return ((b | self.guard) - a) & self.guard == self.guard

    # -- derived charts -----------------------------------------------------

    def with_symbols(self, name: str, extra_params: Sequence[str]) -> "Chart":
        return Chart(name, self.vars, self.time_var, self.params + tuple(extra_params),
                     self.second_time, self.pairs)

    def renamed(self, name: str, vars: Sequence[str], pairs=None) -> "Chart":
        return Chart(name, tuple(vars), self.time_var, self.params, self.second_time,
                     self.pairs if pairs is None else pairs)

    def __str__(self):
        parts = [", ".join(self.vars)]
        if self.times:
            parts.append("time " + ", ".join(self.times))
        if self.params:
            parts.append("params " + ", ".join(self.params))
        return f"{self.name}({'; '.join(parts)})"

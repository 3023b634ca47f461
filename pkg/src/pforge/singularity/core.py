"""Accessible singularities on a divisor, local indices and the alpha-test.

A :class:`DivisorChart` is a field written near a divisor ``x1 = 0`` as::

    dx1/dt = g1,   dxi/dt = gi / x1   (i >= 2)

with ``g1`` and every ``gi`` polynomial in the state variables.  Multiplying
through by ``x1`` gives the *numerator system* ``N = x1 * V`` whose linear
part at an accessible point is the matrix whose eigenvalues form the local
index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..exactalg import Chart, Poly, RatFn
from ..systems.fields import VectorField

Matrix = Tuple[Tuple[RatFn, ...], ...]


class SingularityError(ArithmeticError):
    """Raised when a computation leaves the exactly solvable setting."""


# -- univariate helpers ------------------------------------------------------


def _divisors(n: int) -> List[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _synthetic(coeffs: List[Fraction], r: Fraction) -> Tuple[List[Fraction], Fraction]:
    """Divide a dense polynomial (highest degree first) by ``(v - r)``."""
    out = [coeffs[0]]
    for c in coeffs[1:]:
        out.append(c + out[-1] * r)
    return out[:-1], out[-1]


def rational_roots(coeffs: Sequence[Fraction]) -> List[Tuple[Fraction, int]]:
    """Rational roots with multiplicities of a dense polynomial.

    ``coeffs`` lists coefficients from the highest degree down.  Returns the
    roots in ascending order; the unsplit remainder is reported through
    :func:`split_over_q`.
    """
    return split_over_q(coeffs)[0]


def split_over_q(coeffs: Sequence[Fraction]) -> Tuple[List[Tuple[Fraction, int]], List[Fraction]]:
    """Rational roots (ascending, with multiplicity) and the cofactor left over."""
    c = [Fraction(x) for x in coeffs]
    while c and c[0] == 0:
        c.pop(0)
    if not c:
        raise ValueError("zero polynomial has no finite root set")
    roots: Dict[Fraction, int] = {}
    while len(c) > 1 and c[-1] == 0:
        c.pop()
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
    while len(c) > 1:
        den = 1
        for x in c:
            den = den * x.denominator // _gcd(den, x.denominator)
        ints = [int(x * den) for x in c]
        found = None
        for p in _divisors(ints[-1]):
            for q in _divisors(ints[0]):
                for r in (Fraction(p, q), Fraction(-p, q)):
                    if _synthetic(c, r)[1] == 0:
                        found = r
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        c = _synthetic(c, found)[0]
        roots[found] = roots.get(found, 0) + 1
    return sorted(roots.items()), c


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


# -- divisor charts --------------------------------------------------------


@dataclass(frozen=True)
class DivisorChart:
    """A field together with the state variable whose zero set is the divisor."""

    field: VectorField
    divisor_var: str

    def __post_init__(self):
        chart = self.field.chart
        if self.divisor_var not in chart.vars:
            raise SingularityError(f"{self.divisor_var!r} is not a state variable of {chart}")
        bad = [v for v, g in zip(chart.vars, self.numerators) if not g.is_polynomial_in()]
        if bad:
            raise SingularityError(
                f"field is not of divisor form along {self.divisor_var}=0 (components {', '.join(bad)})")

    @property
    def chart(self) -> Chart:
        return self.field.chart

    @property
    def index(self) -> int:
        return self.chart.vars.index(self.divisor_var)

    @property
    def g(self) -> Tuple[RatFn, ...]:
        """``(g1, g2, ...)`` in chart order, ``g`` of the divisor itself unscaled."""
        x1 = RatFn.symbol(self.chart, self.divisor_var)
        return tuple(c if v == self.divisor_var else c * x1 for v, c in self.field.items())

    @property
    def numerators(self) -> Tuple[RatFn, ...]:
        """The numerator system ``x1 * V``."""
        x1 = RatFn.symbol(self.chart, self.divisor_var)
        return tuple(c * x1 for c in self.field.components)

    @classmethod
    def try_build(cls, V: VectorField, divisor_var: str) -> Optional["DivisorChart"]:
        try:
            return cls(V, divisor_var)
        except SingularityError:
            return None


def is_divisor_form(V: VectorField, divisor_var: str) -> bool:
    """Whether multiplying by the divisor variable leaves every component polynomial."""
    return DivisorChart.try_build(V, divisor_var) is not None


# -- solving the singular-point equations ------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    """An accessible point or locus.

    ``coords`` gives one expression per state variable (chart order); the
    variables listed in ``free`` stay as symbols (their own coordinate is the
    symbol itself), so an empty ``free`` is an isolated point.
    """

    chart: Chart
    coords: Tuple[RatFn, ...]
    free: Tuple[str, ...] = ()

    @property
    def isolated(self) -> bool:
        return not self.free

    def values(self) -> Tuple[Fraction, ...]:
        """Coordinates as rational numbers (isolated, t-independent points only)."""
        if not all(c.is_constant() for c in self.coords):
            raise SingularityError("point depends on symbols")
        return tuple(c.constant_value() for c in self.coords)

    def as_dict(self) -> Dict[str, RatFn]:
        return dict(zip(self.chart.vars, self.coords))

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def _state_used(p: Poly, unknowns: Sequence[str]) -> List[str]:
    used = set(p.used_symbols())
    return [u for u in unknowns if u in used]


def _solve(eqs: List[RatFn], unknowns: List[str], chart: Chart) -> List[Dict[str, RatFn]]:
    """All solutions of ``eqs = 0`` as bindings; unbound unknowns stay free."""
    live = [e for e in eqs if not e.is_zero()]
    for e in live:
        if not _state_used(e.num, unknowns):
            # nonzero and free of unknowns: no solution identically in t
            return []
    if not live:
        return [{}]
    # linear step with a coefficient free of the unknowns
    best = None
    for i, e in enumerate(live):
        for u in _state_used(e.num, unknowns):
            parts = e.num.coefficients_in(u)
            if max(parts) != 1:
                continue
            coef = parts[1]
            if _state_used(coef, unknowns):
                continue
            # eliminate later variables first so loci are parametrized by earlier ones
            rank = (-unknowns.index(u), len(e.num))
            if best is None or rank < best[0]:
                best = (rank, i, u, coef, parts.get(0))
    if best is not None:
        _, i, u, coef, rest = best
        rest_f = RatFn.from_poly(rest) if rest is not None else RatFn.const(chart, 0)
        value = -rest_f / RatFn.from_poly(coef)
        return _branch(live, i, u, value, unknowns, chart)
    # univariate equation with constant coefficients: branch on rational roots
    for i, e in enumerate(live):
        used = _state_used(e.num, unknowns)
        if len(used) != 1:
            continue
        u = used[0]
        parts = e.num.coefficients_in(u)
        if not all(p.is_constant() for p in parts.values()):
            continue
        deg = max(parts)
        dense = [parts[k].constant_value() if k in parts else Fraction(0) for k in range(deg, -1, -1)]
        roots, rest = split_over_q(dense)
        if len(rest) > 1:
            raise SingularityError(f"equation in {u} has non-rational roots (cofactor degree {len(rest) - 1})")
        sols: List[Dict[str, RatFn]] = []
        for r, _ in roots:
            sols.extend(_branch(live, i, u, RatFn.const(chart, r), unknowns, chart))
        return sols
    raise SingularityError(
        "singular-point equations are neither triangular-linear nor univariate with rational coefficients")


def _branch(live, i, u, value, unknowns, chart):
    rest_eqs = [e.substitute({u: value}, chart) for j, e in enumerate(live) if j != i]
    rest_unknowns = [v for v in unknowns if v != u]
    out = []
    for sol in _solve(rest_eqs, rest_unknowns, chart):
        val = value.substitute(sol, chart) if sol else value
        full = dict(sol)
        full[u] = val
        out.append(full)
    return out


def find_accessible_singularities(D: DivisorChart, t0=None) -> List[SingularPoint]:
    """Points of ``x1 = 0`` where ``g2, ..., gn`` vanish.

    ``t0=None`` keeps ``t`` symbolic, so the returned points hold
    identically in ``t``; a number fixes ``t`` first.  Positive-dimensional
    solution sets are returned as loci with their free variables.
    """
    chart = D.chart
    zero = {D.divisor_var: RatFn.const(chart, 0)}
    if t0 is not None and chart.time_var is not None:
        zero[chart.time_var] = RatFn.const(chart, Fraction(t0))
    eqs = [g.substitute(zero, chart) for v, g in zip(chart.vars, D.g) if v != D.divisor_var]
    # only numerators matter; denominators are nonzero generically
    eqs = [RatFn.from_poly(e.num) if not e.is_zero() else e for e in eqs]
    unknowns = [v for v in chart.vars if v != D.divisor_var]
    points = []
    for sol in _solve(eqs, unknowns, chart):
        coords = []
        for v in chart.vars:
            if v == D.divisor_var:
                coords.append(RatFn.const(chart, 0))
            elif v in sol:
                coords.append(sol[v])
            else:
                coords.append(RatFn.symbol(chart, v))
        free = tuple(v for v in unknowns if v not in sol)
        points.append(SingularPoint(chart, tuple(coords), free))
    points.sort(key=_point_key)
    return points


def _point_key(p: SingularPoint):
    if p.isolated and all(c.is_constant() for c in p.coords):
        return (0, tuple(c.constant_value() for c in p.coords), "")
    return (1, (), str(p))


# -- local index -------------------------------------------------------------


ALL_POSITIVE = "all-positive-integers"
MIXED = "all-integers-mixed-sign"
NON_INTEGER = "non-integer"


@dataclass(frozen=True)
class LocalIndexResult:
    """Linear part and eigenvalues at an accessible point.

    ``eigenvalues`` starts with the divisor-direction eigenvalue ``a11``.
    Without a certificate the rest follow in ascending order; with a
    certificate matrix ``T`` (columns are eigenvectors, so ``T^-1 A T`` is
    diagonal) they follow the diagonal of ``T^-1 A T``.
    """

    point: Tuple[RatFn, ...]
    linear_part: Matrix
    charpoly: Tuple[Fraction, ...]
    eigenvalues: Tuple[Fraction, ...]
    certificate: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    diagonalized: Optional[Matrix] = None

    @property
    def ratios(self) -> Tuple[Fraction, ...]:
        return ratios(self.eigenvalues)

    @property
    def classification(self) -> str:
        return classify_ratios(self)

    def linear_part_values(self) -> Tuple[Tuple[object, ...], ...]:
        return tuple(tuple(c.constant_value() if c.is_constant() else c for c in row)
                     for row in self.linear_part)


def jacobian_at(exprs: Sequence[RatFn], vars: Sequence[str], point: Mapping[str, RatFn]) -> Matrix:
    chart = exprs[0].chart
    rows = []
    for e in exprs:
        rows.append(tuple(e.diff(v).substitute(point, chart) for v in vars))
    return tuple(rows)


def charpoly(A: Matrix) -> Tuple[RatFn, ...]:
    """Coefficients of ``det(l*I - A)`` from ``l^n`` down (Faddeev-LeVerrier)."""
    n = len(A)
    chart = A[0][0].chart
    zero, one = RatFn.const(chart, 0), RatFn.const(chart, 1)
    coeffs = [one]
    M = [[zero] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M <- A*M + c_{k-1} I
        AM = [[_dot(A[i], [M[r][j] for r in range(n)]) for j in range(n)] for i in range(n)]
        for i in range(n):
            AM[i][i] = AM[i][i] + coeffs[-1]
        M = AM
        tr = zero
        for i in range(n):
            tr = tr + _dot(A[i], [M[r][i] for r in range(n)])
        coeffs.append(-tr / k)
    return tuple(coeffs)


def _dot(row, col):
    acc = None
    for a, b in zip(row, col):
        if a.is_zero() or b.is_zero():
            continue
        acc = a * b if acc is None else acc + a * b
    return acc if acc is not None else RatFn.const(row[0].chart, 0)


def _matmul(A, B):
    n, m = len(A), len(B[0])
    return tuple(tuple(_dot(A[i], [B[r][j] for r in range(len(B))]) for j in range(m)) for i in range(n))


def _rat_inverse(T: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    n = len(T)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(T)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise SingularityError("certificate matrix is singular")
        M[c], M[piv] = M[piv], M[c]
        p = M[c][c]
        M[c] = [x / p for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def local_index(D: DivisorChart, p: Union[SingularPoint, Sequence], certificate=None) -> LocalIndexResult:
    """Local index at an accessible point of ``D``.

    The linear part is the Jacobian of the numerator system at ``p``; its
    characteristic polynomial must have constant coefficients that split over
    the rationals.  ``certificate`` optionally supplies a matrix ``T`` with
    ``T^-1 A T`` diagonal; it is checked and fixes the eigenvalue order.
    """
    chart = D.chart
    coords = _coords(chart, p)
    point = dict(zip(chart.vars, coords))
    g = D.g
    for v, gi in zip(chart.vars, g):
        if v != D.divisor_var and not gi.substitute(point, chart).is_zero():
            raise SingularityError(f"point {tuple(map(str, coords))} is not accessible (g for {v} nonzero)")
    # the divisor variable first, matching the normal form
    order = [D.divisor_var] + [v for v in chart.vars if v != D.divisor_var]
    num = dict(zip(chart.vars, D.numerators))
    A = jacobian_at([num[v] for v in order], order, point)
    cp = charpoly(A)
    if not all(c.is_constant() for c in cp):
        raise SingularityError("characteristic polynomial depends on time or parameters")
    dense = [c.constant_value() for c in cp]
    roots, rest = split_over_q(dense)
    if len(rest) > 1:
        raise SingularityError("characteristic polynomial does not split over the rationals")
    a11 = A[0][0]
    if not a11.is_constant():
        raise SingularityError("divisor-direction eigenvalue is not constant")
    a11 = a11.constant_value()
    pool: List[Fraction] = [r for r, m in roots for _ in range(m)]
    pool.remove(a11)
    eig = (a11,) + tuple(sorted(pool))
    diag = None
    cert = None
    if certificate is not None:
        cert = tuple(tuple(Fraction(x) for x in row) for row in certificate)
        Ti = _rat_inverse(cert)
        lift = lambda M: tuple(tuple(RatFn.const(chart, x) for x in row) for row in M)
        diag = _matmul(_matmul(lift(Ti), A), lift(cert))
        n = len(diag)
        off = [(i, j) for i in range(n) for j in range(n) if i != j and not diag[i][j].is_zero()]
        if off or not all(diag[i][i].is_constant() for i in range(n)):
            raise SingularityError(f"certificate does not diagonalize the linear part (entries {off})")
        d = tuple(diag[i][i].constant_value() for i in range(n))
        if sorted(d) != sorted(eig):
            raise SingularityError("certificate diagonal disagrees with the characteristic roots")
        eig = d
    return LocalIndexResult(coords, A, tuple(dense), eig, cert, diag)


def _coords(chart: Chart, p) -> Tuple[RatFn, ...]:
    if isinstance(p, SingularPoint):
        if not p.isolated:
            raise SingularityError("local index needs an isolated point (fix the free variables first)")
        return p.coords
    if len(p) != chart.dim:
        raise SingularityError(f"point has {len(p)} coordinates, chart has {chart.dim}")
    out = []
    for c in p:
        if isinstance(c, RatFn):
            out.append(c)
        elif isinstance(c, str):
            out.append(RatFn.parse(c, chart))
        else:
            out.append(RatFn.const(chart, Fraction(c)))
    return tuple(out)


def ratios(eigenvalues: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """``(a22/a11, ..., ann/a11)``."""
    a11 = Fraction(eigenvalues[0])
    if a11 == 0:
        raise SingularityError("divisor-direction eigenvalue is zero")
    return tuple(Fraction(a) / a11 for a in eigenvalues[1:])


def classify_ratios(r: Union[LocalIndexResult, Sequence[Fraction]]) -> str:
    """Integrality and sign pattern of the local-index ratios.

    A zero ratio counts as mixed sign (it is not a positive integer).
    """
    eig = r.eigenvalues if isinstance(r, LocalIndexResult) else tuple(r)
    rs = ratios(eig)
    if not all(x.denominator == 1 for x in rs):
        return NON_INTEGER
    if all(x > 0 for x in rs):
        return ALL_POSITIVE
    return MIXED


# -- alpha test ----------------------------------------------------------------


@dataclass(frozen=True)
class RowSolution:
    """Solution of ``dX2/dT = (a22 X2 / X1) + a21`` with ``X1 = a11 T + C1``."""

    a11: Fraction
    a21: Fraction
    a22: Fraction
    logarithmic: bool
    exponent: Optional[Fraction]
    formula: str
    single_valued: bool
    condition: str

    def evaluate(self, T: float, C1: float, C2: float) -> float:
        """Numeric value of the closed form (real branch, ``a11*T + C1 > 0``)."""
        import math
        s = float(self.a11) * T + C1
        if self.logarithmic:
            return C2 * s + float(self.a21) * s * math.log(s) / float(self.a11)
        return C2 * s ** float(self.exponent) + float(self.a21) * s / float(self.a11 - self.a22)


def solve_row_pair(a11, a21, a22) -> RowSolution:
    """Closed-form solution of the first two rows of the reduced system."""
    a11, a21, a22 = Fraction(a11), Fraction(a21), Fraction(a22)
    if a11 == 0:
        raise SingularityError("a11 = 0: degenerate divisor direction")
    if a11 != a22:
        e = a22 / a11
        formula = f"X2 = C2*({a11}*T+C1)^({e}) + ({a21})*({a11}*T+C1)/({a11 - a22})"
        return RowSolution(a11, a21, a22, False, e, formula, e.denominator == 1, "a22/a11 in Z")
    formula = f"X2 = C2*({a11}*T+C1) + ({a21})*({a11}*T+C1)*Log({a11}*T+C1)/({a11})"
    return RowSolution(a11, a21, a22, True, None, formula, a21 == 0, "a21 = 0")


@dataclass(frozen=True)
class AlphaTestResult:
    matrix: Tuple[Tuple[Fraction, ...], ...]
    x1_solution: str
    rows: Tuple[RowSolution, ...]

    @property
    def single_valued(self) -> bool:
        return all(r.single_valued for r in self.rows)


def alpha_test(D: DivisorChart, p, t0=0, certificate=None) -> AlphaTestResult:
    """Constant-coefficient reduced system at ``p`` with ``t`` fixed to ``t0``.

    The linear part (optionally diagonalized by ``certificate``) is
    evaluated at ``t = t0``; each row ``j >= 2`` whose only off-diagonal
    entry is in the first column is solved in closed form.
    """
    res = local_index(D, p, certificate)
    M = res.diagonalized if res.diagonalized is not None else res.linear_part
    chart = D.chart
    fix = {chart.time_var: RatFn.const(chart, Fraction(t0))} if chart.time_var else {}
    vals = []
    for row in M:
        out = []
        for c in row:
            c = c.substitute(fix, chart) if fix else c
            if not c.is_constant():
                raise SingularityError(f"entry {c} depends on parameters; bind them first")
            out.append(c.constant_value())
        vals.append(tuple(out))
    a11 = vals[0][0]
    if a11 == 0:
        raise SingularityError("a11 = 0: degenerate divisor direction")
    rows = []
    n = len(vals)
    for j in range(1, n):
        if any(vals[j][k] != 0 for k in range(1, n) if k != j):
            raise SingularityError(f"row {j + 1} couples to other non-divisor directions; supply a certificate")
        rows.append(solve_row_pair(a11, vals[j][0], vals[j][j]))
    return AlphaTestResult(tuple(vals), f"X1 = {a11}*T + C1", tuple(rows))

"""Floating-point integration with invariant and symmetry monitors.

Exact fields are compiled to plain Python functions (terms summed with
``math.fsum``) and integrated with an embedded Dormand-Prince 5(4) pair
under PI step-size control.  Accepted steps keep their stages, so the
trajectory has a continuous fourth-order dense output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .exactalg import Chart, Poly, RatFn
from .systems.fields import TwoTimeSystem, VectorField

REACHED_END = "reached_end"
POLE = "pole_detected"
UNDERFLOW = "step_underflow"

DEFAULTS = {"rtol": 1e-10, "atol": 1e-12, "max_norm": 1e8}


class IntegrationError(ArithmeticError):
    pass


# -- compilation ----------------------------------------------------------------


def _poly_source(p: Poly, names: Sequence[str]) -> str:
    chart = p.chart
    terms = []
    for key, c in p.items():
        factors = [repr(float(c))]
        for i, e in enumerate(chart.unpack(key)):
            if e:
                factors.append(names[i] if e == 1 else f"{names[i]}**{e}")
        terms.append("*".join(factors))
    if not terms:
        return "0.0"
    if len(terms) == 1:
        return terms[0]
    return "fsum((" + ", ".join(terms) + ",))"


def compile_ratfn(f: RatFn, args: Sequence[str], constants: Mapping[str, float]) -> Callable:
    """Python function of ``args`` evaluating ``f``; other symbols come from ``constants``."""
    chart = f.chart
    names = []
    for i, s in enumerate(chart.symbols):
        names.append(f"_a{args.index(s)}" if s in args else f"_c{i}")
    used = set(f.num.used_symbols()) | set(f.den.used_symbols())
    missing = [s for s in used if s not in args and s not in constants]
    if missing:
        raise IntegrationError(f"no value for {', '.join(sorted(missing))}")
    num = _poly_source(f.num, names)
    body = num if f.den.is_constant() and f.den.constant_value() == 1 else f"({num}) / ({_poly_source(f.den, names)})"
    params = ", ".join(f"_a{i}" for i in range(len(args)))
    consts = {f"_c{i}": float(constants[s]) for i, s in enumerate(chart.symbols) if s in constants and s not in args}
    env = {"fsum": math.fsum, **consts}
    exec(f"def _f({params}):\n    return {body}\n", env)
    return env["_f"]


@dataclass
class FloatField:
    """Compiled evaluator ``(time, state) -> derivative`` of a vector field.

    ``params`` binds parameters (and any other time symbol) to numbers.
    """

    field: VectorField
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        chart = self.field.chart
        self.time = self.field.time
        args = list(chart.vars) + ([self.time] if self.time else [])
        self._fns = [compile_ratfn(c, args, self.params) for c in self.field.components]
        self.dim = chart.dim
        self.names = chart.vars

    def __call__(self, t: float, y: Sequence[float]) -> List[float]:
        if self.time:
            return [f(*y, t) for f in self._fns]
        return [f(*y) for f in self._fns]


class FloatFunction:
    """Compiled scalar function of the state (and time) of a chart."""

    def __init__(self, f: RatFn, params: Mapping[str, float] = (), time: Optional[str] = None):
        chart = f.chart
        params = dict(params)
        self.time = time or chart.time_var
        args = list(chart.vars) + ([self.time] if self.time else [])
        consts = {k: v for k, v in params.items() if k not in args}
        # the other time symbol, when unused, needs no value
        self._fn = compile_ratfn(f, args, consts)

    def __call__(self, t: float, y: Sequence[float]) -> float:
        return self._fn(*y, t) if self.time else self._fn(*y)


# -- Dormand-Prince 5(4) ----------------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense output coefficients (Hairer & Wanner's continuous extension)
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799, -10690763975 / 1880347072,
      701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423)


@dataclass
class Segment:
    t: float
    h: float
    y0: List[float]
    y1: List[float]
    k: List[List[float]]

    def at(self, t: float) -> List[float]:
        th = (t - self.t) / self.h
        th1 = 1.0 - th
        h = self.h
        out = []
        for i in range(len(self.y0)):
            k = [kk[i] for kk in self.k]
            r1 = self.y1[i] - self.y0[i]
            r2 = h * k[0] - r1
            r3 = r1 - h * k[6] - r2
            r4 = h * sum(d * kj for d, kj in zip(_D, k))
            out.append(self.y0[i] + th * (r1 + th1 * (r2 + th * (r3 + th1 * r4))))
        return out


@dataclass
class Trajectory:
    names: Tuple[str, ...]
    times: List[float]
    states: List[List[float]]
    segments: List[Segment]
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0
    termination: str = REACHED_END
    t_star: Optional[float] = None
    time_name: str = "t"

    @property
    def step_stats(self) -> Dict[str, int]:
        return {"accepted": self.accepted, "rejected": self.rejected, "evaluations": self.evaluations}

    @property
    def end(self) -> List[float]:
        return self.states[-1]

    def at(self, t: float) -> List[float]:
        """Dense output at ``t`` (inside the integrated range)."""
        if not self.segments:
            if t == self.times[0]:
                return list(self.states[0])
            raise IntegrationError("empty trajectory")
        lo, hi = sorted((self.times[0], self.times[-1]))
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise IntegrationError(f"t={t} outside [{lo}, {hi}]")
        # segments are ordered by time along the direction of integration
        sgn = 1 if self.times[-1] >= self.times[0] else -1
        a, b = 0, len(self.segments) - 1
        while a < b:
            m = (a + b) // 2
            s = self.segments[m]
            if sgn * (t - (s.t + s.h)) > 0:
                a = m + 1
            else:
                b = m
        return self.segments[a].at(t)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.time_name, *self.names])
        for t, y in zip(self.times, self.states):
            w.writerow([repr(t), *map(repr, y)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "names": list(self.names), "time": self.time_name,
            "times": self.times, "states": self.states,
            "step_stats": self.step_stats, "termination": self.termination, "t_star": self.t_star,
        })


def _norm(y: Sequence[float]) -> float:
    return max(abs(v) for v in y)


def _finite(y: Sequence[float]) -> bool:
    return all(math.isfinite(v) for v in y)


def _safe(F, t, y, stats) -> Optional[List[float]]:
    stats[0] += 1
    try:
        out = F(t, y)
    except (OverflowError, ZeroDivisionError):
        return None
    return out if _finite(out) else None


def integrate(F, init: Sequence[float], t0: float, t1: float, rtol: float = DEFAULTS["rtol"],
              atol: float = DEFAULTS["atol"], max_norm: float = DEFAULTS["max_norm"],
              h0: Optional[float] = None, max_step: Optional[float] = None,
              names: Optional[Sequence[str]] = None) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration from ``t0`` to ``t1``.

    Terminates with ``pole_detected`` when the state norm exceeds
    ``max_norm`` (``t_star`` is the last accepted time inside the bound) and
    with ``step_underflow`` when the step falls below ``1e-13 |t1 - t0|``.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    y = [float(v) for v in init]
    n = len(y)
    names = tuple(names or getattr(F, "names", None) or [f"y{i}" for i in range(n)])
    time_name = getattr(F, "time", None) or "t"
    traj = Trajectory(names, [float(t0)], [list(y)], [], time_name=time_name)
    span = t1 - t0
    if span == 0:
        return traj
    direction = 1.0 if span > 0 else -1.0
    hmin = 1e-13 * abs(span)
    hmax = abs(max_step) if max_step else abs(span)
    stats = [0]
    t = float(t0)
    k1 = _safe(F, t, y, stats)
    if k1 is None:
        raise IntegrationError("field is not finite at the initial point")
    if h0 is None:
        d0 = math.sqrt(sum((v / (atol + rtol * abs(v))) ** 2 for v in y) / n)
        d1 = math.sqrt(sum((f / (atol + rtol * abs(v))) ** 2 for v, f in zip(y, k1)) / n)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, hmax, abs(span))
    else:
        h = min(abs(h0), hmax)
    err_prev = 1e-4
    safety, beta, alpha_exp = 0.9, 0.04, 0.2 - 0.75 * 0.04
    while True:
        remaining = t1 - t
        if direction * remaining <= 0:
            break
        # absorb round-off slivers into the final step
        if h >= abs(remaining) - 1e-12 * abs(span):
            h = abs(remaining)
            last = True
        else:
            last = False
        if h < hmin and not last:
            traj.termination = UNDERFLOW
            traj.t_star = t
            break
        hs = direction * h
        ks = [k1]
        bad = False
        for s in range(1, 7):
            yi = [y[i] + hs * sum(a * ks[j][i] for j, a in enumerate(_A[s])) for i in range(n)]
            ki = _safe(F, t + _C[s] * hs, yi, stats) if _finite(yi) else None
            if ki is None:
                bad = True
                break
            ks.append(ki)
        if bad:
            traj.rejected += 1
            h *= 0.25
            continue
        ynew = [y[i] + hs * sum(b * ks[j][i] for j, b in enumerate(_B) if b) for i in range(n)]
        errv = [hs * sum(e * ks[j][i] for j, e in enumerate(_E) if e) for i in range(n)]
        err = math.sqrt(sum((errv[i] / (atol + rtol * max(abs(y[i]), abs(ynew[i])))) ** 2 for i in range(n)) / n)
        if err <= 1.0 and _finite(ynew):
            traj.accepted += 1
            if _norm(ynew) > max_norm:
                traj.termination = POLE
                traj.t_star = t
                traj.evaluations = stats[0]
                return traj
            traj.segments.append(Segment(t, hs, list(y), list(ynew), ks))
            t = t1 if last else t + hs
            y = ynew
            k1 = ks[6]
            traj.times.append(t)
            traj.states.append(list(y))
            fac = safety * err ** (-alpha_exp) * err_prev ** beta if err > 0 else 5.0
            h = min(h * min(5.0, max(0.2, fac)), hmax)
            err_prev = max(err, 1e-4)
        else:
            traj.rejected += 1
            fac = safety * err ** (-0.2) if math.isfinite(err) and err > 0 else 0.1
            h *= min(1.0, max(0.1, fac))
    traj.evaluations = stats[0]
    return traj


# -- monitors ------------------------------------------------------------------


@dataclass(frozen=True)
class DriftReport:
    drifts: Dict[str, float]

    @property
    def max_drift(self) -> float:
        return max(self.drifts.values(), default=0.0)

    def ok(self, tol: float) -> bool:
        return all(d < tol for d in self.drifts.values())


def monitor_invariants(T: Trajectory, invariants, params: Mapping[str, float] = (),
                       time: Optional[str] = None) -> DriftReport:
    """Per-invariant ``max |I(t) - I(t0)|`` over the recorded states.

    ``invariants`` is a mapping name -> RatFn or a sequence of RatFn.
    """
    if not isinstance(invariants, Mapping):
        invariants = {str(f): f for f in invariants}
    out = {}
    for name, f in invariants.items():
        fn = FloatFunction(f, params, time or T.time_name)
        v0 = fn(T.times[0], T.states[0])
        out[name] = max((abs(fn(t, y) - v0) for t, y in zip(T.times, T.states)), default=0.0)
    return DriftReport(out)


@dataclass(frozen=True)
class CommutationResult:
    commutes: Optional[bool]
    deviation: float
    ts_end: Tuple[float, ...] = ()
    st_end: Tuple[float, ...] = ()
    note: str = ""


def _flow(V: VectorField, params, fixed, init, a, b, rtol, atol, max_norm):
    F = FloatField(V, {**params, **fixed})
    return integrate(F, init, a, b, rtol, atol, max_norm)


def check_flow_commutation(S: TwoTimeSystem, init: Sequence[float], dt: float, ds: float,
                           tol: float = 1e-6, params: Mapping[str, float] = (), t0: float = 0.0,
                           s0: float = 0.0, rtol: float = 1e-12, atol: float = 1e-14,
                           max_norm: float = DEFAULTS["max_norm"]) -> CommutationResult:
    """Compare (t-flow by ``dt``, then s-flow by ``ds``) with the opposite order."""
    params = dict(params)
    tn, sn = S.field_t.time, S.field_s.time
    runs = []
    for order in ("ts", "st"):
        y, tc, sc = list(init), t0, s0
        for leg in order:
            if leg == "t":
                tr = _flow(S.field_t, params, {sn: sc}, y, tc, tc + dt, rtol, atol, max_norm)
                tc += dt
            else:
                tr = _flow(S.field_s, params, {tn: tc}, y, sc, sc + ds, rtol, atol, max_norm)
                sc += ds
            if tr.termination != REACHED_END:
                return CommutationResult(None, math.inf, note=f"{tr.termination} during the {leg}-flow ({order})")
            y = tr.end
        runs.append(tuple(y))
    dev = max(abs(a - b) for a, b in zip(*runs))
    return CommutationResult(dev < tol, dev, runs[0], runs[1])


@dataclass(frozen=True)
class BacklundResidual:
    passed: bool
    max_residual: float
    samples: int
    h: float


def check_backlund_on_trajectory(T: Trajectory, V: VectorField, S, params: Mapping[str, float],
                                 tol: float = 1e-4, h: float = 1e-3, samples: int = 200,
                                 apply_params: bool = True) -> BacklundResidual:
    """Map the trajectory of ``V`` through ``S`` and test it against ``V``.

    The mapped path is differentiated with the fourth-order centered stencil
    on the dense output and compared with ``V`` at the acted parameters
    (``apply_params=False`` keeps the original ones, a negative control).
    ``S`` may be a :class:`BirationalMap` or anything with ``underlying``.
    """
    M = getattr(S, "underlying", S)
    if h > 1e-3:
        raise ValueError("stencil step must be at most 1e-3")
    params = dict(params)
    chart = V.chart
    fwd = M.forward_map
    comps = [FloatFunction(fwd[v], params, V.time) for v in M.target.vars]
    if apply_params:
        target_params = M.param_values({k: Fraction(v) for k, v in params.items()})
    else:
        target_params = params
    target_params = {k: float(v) for k, v in target_params.items()}
    W = FloatField(V, target_params)
    a, b = sorted((T.times[0], T.times[-1]))
    lo, hi = a + 2 * h, b - 2 * h
    if hi <= lo:
        raise ValueError("trajectory too short for the stencil")

    def phi(t):
        y = T.at(t)
        try:
            return [c(t, y) for c in comps]
        except ZeroDivisionError:
            raise IntegrationError(f"map denominator vanishes at t={t}") from None

    worst = 0.0
    for k in range(samples):
        t = lo + (hi - lo) * k / max(samples - 1, 1)
        pm2, pm1, pp1, pp2 = phi(t - 2 * h), phi(t - h), phi(t + h), phi(t + 2 * h)
        deriv = [(-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h) for p2, p1, m1, m2 in zip(pp2, pp1, pm1, pm2)]
        rhs = W(t, phi(t))
        res = max(abs(d - r) / max(1.0, abs(r)) for d, r in zip(deriv, rhs))
        worst = max(worst, res)
    return BacklundResidual(worst < tol, worst, samples, h)

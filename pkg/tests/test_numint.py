from __future__ import annotations

import json
import math
import random
from fractions import Fraction

import pytest

from pforge.exactalg import Chart, RatFn
from pforge.numint import (
    FloatField, FloatFunction, IntegrationError, check_backlund_on_trajectory, check_flow_commutation,
    integrate, monitor_invariants,
)
from pforge.systems import registry as R
from pforge.systems.fields import VectorField

SYS3_END = [0.169843132735011, 0.45177842896963005, 0.9644400884343679, 0.4939056854550375]
A1_INIT = [-1.0, -1 / 3, 2 / 9, 0.25]
A1_PARAMS = {"a0": 0.25, "a1": -0.5}


def sys3_rhs(t, y, alpha=0.0):
    # hand-written copy of the field, independent of the compiler
    q1, p1, q2, p2 = y
    return [q1 * q1 + p2, -2 * q1 * p1 - alpha - 0.5, -0.5 * p2 * p2 + p1 + t / 2, q2]


def rk4(f, y, t0, t1, h):
    n = round((t1 - t0) / h)
    h = (t1 - t0) / n
    t = t0
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
        k3 = f(t + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
        k4 = f(t + h, [a + h * b for a, b in zip(y, k3)])
        y = [a + h / 6 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]
        t += h
    return y


def exp_field():
    return FloatField(VectorField(Chart("e", ("x",), "t"), ("x",)))


# -- integrator ----------------------------------------------------------------


def test_sys3_endpoint_agrees_with_rk4_oracle():
    T = integrate(FloatField(R.get("sys3"), {"alpha": 0.0}), [0.0, 1.0, 0.0, 0.0], 0.0, 1.0)
    ref = rk4(sys3_rhs, [0.0, 1.0, 0.0, 0.0], 0.0, 1.0, 1e-4)
    assert T.termination == "reached_end"
    assert max(abs(a - b) for a, b in zip(T.end, ref)) < 1e-7
    assert max(abs(a - b) for a, b in zip(T.end, SYS3_END)) < 1e-7


def test_exponential_accuracy_and_stats():
    T = integrate(exp_field(), [1.0], 0.0, 1.0)
    assert abs(T.end[0] - math.e) / math.e < 1e-8
    assert T.accepted == len(T.times) - 1
    assert T.evaluations > 6 * T.accepted


def test_fixed_step_convergence_order_at_least_five():
    # huge tolerances accept every step, so max_step fixes the step size
    errs = []
    for h in (0.2, 0.1, 0.05):
        T = integrate(exp_field(), [1.0], 0.0, 1.0, rtol=1e3, atol=1e3, h0=h, max_step=h)
        assert T.accepted == round(1 / h)
        errs.append(abs(T.end[0] - math.e))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 4.7, orders


def test_backward_integration():
    T = integrate(exp_field(), [math.e], 1.0, 0.0)
    assert abs(T.end[0] - 1.0) < 1e-9
    assert abs(T.at(0.5)[0] - math.exp(0.5)) < 1e-8


def test_dense_output_matches_exact_solution():
    T = integrate(exp_field(), [1.0], 0.0, 2.0)
    for t in (0.013, 0.5, 1.234, 1.999):
        assert abs(T.at(t)[0] - math.exp(t)) / math.exp(t) < 1e-8
    with pytest.raises(IntegrationError):
        T.at(2.5)


def test_pole_detection_on_riccati():
    T = integrate(FloatField(VectorField(Chart("r", ("x",), "t"), ("x^2",))), [1.0], 0.0, 2.0)
    assert T.termination == "pole_detected"
    assert 0.99 < T.t_star <= 1.0


def test_step_underflow_at_square_root_branch_point():
    # x' = -1/x, x(0) = 1: x = sqrt(1 - 2t) stays bounded while x' blows up
    T = integrate(FloatField(VectorField(Chart("b", ("x",), "t"), ("-1/x",))), [1.0], 0.0, 1.0)
    assert T.termination != "reached_end"
    assert T.t_star is not None and abs(T.t_star - 0.5) < 1e-3


def test_non_finite_start_is_an_error():
    with pytest.raises(IntegrationError):
        integrate(FloatField(VectorField(Chart("b", ("x",), "t"), ("1/x",))), [0.0], 0.0, 1.0)


def test_zero_span_returns_initial_state():
    T = integrate(exp_field(), [2.0], 1.0, 1.0)
    assert T.times == [1.0] and T.end == [2.0]


# -- compiled evaluation ---------------------------------------------------------


@pytest.mark.parametrize("name,params,time", [
    ("sys3", {"alpha": Fraction(1, 3)}, "t"),
    ("sys11", {"a0": Fraction(1, 5), "a1": Fraction(3, 5)}, None),
    ("A1", {"a0": Fraction(1, 4), "a1": Fraction(-1, 2), "s": Fraction(2, 7)}, "t"),
    ("A1", {"a0": Fraction(1, 4), "a1": Fraction(-1, 2), "t": Fraction(-3, 5)}, "s"),
])
def test_float_field_matches_exact_evaluation(name, params, time):
    v = R.get(name)
    V = v.field_t if time == "t" and hasattr(v, "field_t") else v.field_s if time == "s" else v
    F = FloatField(V, {k: float(x) for k, x in params.items()})
    rng = random.Random(7)
    for _ in range(100):
        y = [Fraction(rng.randint(-40, 40), rng.randint(1, 9)) for _ in V.chart.vars]
        tv = Fraction(rng.randint(-20, 20), 7)
        point = dict(zip(V.chart.vars, y), **params)
        if V.time:
            point[V.time] = tv
        exact = [float(c.evaluate(point)) for c in V.components]
        got = F(float(tv), [float(x) for x in y])
        for a, b in zip(got, exact):
            assert abs(a - b) <= 1e-14 * max(1.0, abs(b))


def test_float_function_reports_missing_values():
    f = RatFn.parse("x + c", Chart("m", ("x",), params=("c",)))
    with pytest.raises(IntegrationError):
        FloatFunction(f)
    assert FloatFunction(f, {"c": 2.0})(0.0, [1.5]) == 3.5


# -- monitors ----------------------------------------------------------------------


def test_constant_invariant_has_zero_drift():
    V = R.get("sys3")
    T = integrate(FloatField(V, {"alpha": 0.0}), [0.0, 1.0, 0.0, 0.0], 0.0, 1.0)
    rep = monitor_invariants(T, {"one": RatFn.const(V.chart, 3)}, {"alpha": 0.0})
    assert rep.drifts == {"one": 0.0}
    assert rep.ok(1e-300)


def test_hamiltonian_drift_equals_explicit_time_integral():
    # dH/dt along the flow is the explicit t-derivative p2/2
    V = R.get("sys3")
    H = RatFn.parse(R.get("H4").hamiltonian.__str__(), V.chart)
    T = integrate(FloatField(V, {"alpha": 0.0}), [0.0, 1.0, 0.0, 0.0], 0.0, 1.0)
    Hf = FloatFunction(H, {"alpha": 0.0}, "t")
    change = Hf(1.0, T.end) - Hf(0.0, T.states[0])
    n = 2000
    xs = [k / n for k in range(n + 1)]
    vals = [T.at(x)[3] / 2 for x in xs]
    simpson = (vals[0] + vals[-1] + 4 * sum(vals[1:-1:2]) + 2 * sum(vals[2:-1:2])) / (3 * n)
    assert abs(change - simpson) < 1e-6


def test_two_time_hamiltonians_conserved_along_both_flows():
    A = R.get("A1")
    for V, fixed in ((A.field_t, {"s": 0.0}), (A.field_s, {"t": 0.0})):
        P = {**A1_PARAMS, **fixed}
        T = integrate(FloatField(V, P), A1_INIT, 0.0, 2.0)
        rep = monitor_invariants(T, {"K1": A.hamiltonians[0], "K2": A.hamiltonians[1]}, P, V.time)
        assert T.termination == "reached_end"
        assert rep.ok(1e-8), rep.drifts


def test_commutation_trivial_leg_and_nontrivial_flows():
    A = R.get("A1")
    zero = check_flow_commutation(A, A1_INIT, 0.3, 0.0, params=A1_PARAMS)
    assert zero.deviation == 0.0
    res = check_flow_commutation(A, A1_INIT, 0.3, 0.3, params=A1_PARAMS)
    assert res.commutes and res.deviation < 1e-8


def test_perturbed_second_flow_does_not_commute():
    from pforge.systems.fields import TwoTimeSystem

    A = R.get("A1")
    x = A.field_s.chart.vars[0]
    bumped = VectorField(A.field_s.chart, tuple(
        c + (RatFn.parse(f"1/10*{x}", A.field_s.chart) if i == 0 else 0) for i, c in enumerate(A.field_s.components)
    ), time=A.field_s.time)
    B = TwoTimeSystem(A.chart, A.field_t, bumped, "bumped")
    res = check_flow_commutation(B, A1_INIT, 0.3, 0.3, params=A1_PARAMS)
    assert not res.commutes and res.deviation > 1e-6


# -- Backlund residual along trajectories ---------------------------------------------


def _sys3_traj():
    V = R.get("sys3")
    return V, integrate(FloatField(V, {"alpha": 0.0}), [0.0, 1.0, 0.0, 0.0], 0.0, 1.0, max_step=0.05)


def test_identity_map_residual_is_stencil_error():
    from pforge.birational import BirationalMap

    V, T = _sys3_traj()
    ident = BirationalMap.identity(V.chart)
    res = check_backlund_on_trajectory(T, V, ident, {"alpha": 0.0})
    assert res.passed and res.max_residual < 1e-7


def test_s0_maps_solutions_to_solutions_with_negative_control():
    V, T = _sys3_traj()
    good = check_backlund_on_trajectory(T, V, R.get("s0.sys3"), {"alpha": 0.0})
    bad = check_backlund_on_trajectory(T, V, R.get("s0.sys3"), {"alpha": 0.0}, apply_params=False)
    assert good.passed and good.max_residual < 1e-6
    assert not bad.passed


def test_backlund_rejects_large_stencil():
    V, T = _sys3_traj()
    with pytest.raises(ValueError):
        check_backlund_on_trajectory(T, V, R.get("s0.sys3"), {"alpha": 0.0}, h=0.01)


# -- derived jet-coordinate flows --------------------------------------------------------


def test_derived_A4_flow_matches_finite_differences():
    A, M, D = R.get("A1"), R.get("mapA3"), R.derive_A4()
    P = {**A1_PARAMS, "t": 0.0}
    T = integrate(FloatField(A.field_s, P), A1_INIT, 0.0, 0.5, max_step=0.05)
    comps = [FloatFunction(M.forward_map[v], P, "s") for v in M.target.vars]
    W = FloatField(D.field_s, P)
    printed = FloatFunction(R.get("A4.printed")["dx/ds"], P, "s")
    h = 1e-3
    for s in (0.1, 0.25, 0.4):
        phi = {k: [c(s + k * h, T.at(s + k * h)) for c in comps] for k in (-2, -1, 1, 2)}
        fd = [(-phi[2][i] + 8 * phi[1][i] - 8 * phi[-1][i] + phi[-2][i]) / (12 * h) for i in range(len(comps))]
        here = [c(s, T.at(s)) for c in comps]
        rhs = W(s, here)
        assert max(abs(a - b) for a, b in zip(fd, rhs)) < 1e-6
        # the printed dx/ds differs from the finite difference at this parameter point
        assert abs(printed(s, here) - fd[0]) > 1e-3


def test_trajectory_exports():
    V, T = _sys3_traj()
    lines = T.to_csv().splitlines()
    assert lines[0] == "t,q1,p1,q2,p2"
    assert len(lines) == len(T.times) + 1
    assert [float(x) for x in lines[-1].split(",")] == [T.times[-1], *T.end]
    data = json.loads(T.to_json())
    assert data["names"] == ["q1", "p1", "q2", "p2"]
    assert data["termination"] == "reached_end"
    assert data["step_stats"]["accepted"] == T.accepted

import math

import numpy as np
import pytest

from sclg.hamilton_flow import (
    TILDE_ROUTES,
    FlowEscape,
    PhaseSpaceState,
    classify,
    closed_form_state,
    closed_form_states,
    flow_lines,
    integrate_arrays,
    integrate_flow,
    max_line_discrepancy,
    poincare_return_time,
    pole_times,
    stationary_points,
    symbol_p,
    tilde_flow,
    tilde_flow_arrays,
    tilde_stationary_points,
    tilde_symbol,
    vector_field,
)
from sclg.special_functions import PoleProximityError, elliptic_invariants

H, R2 = 0.1, 4.0
A = math.sqrt(R2 * H)


def _s(x, xi, h=H, r2=R2):
    return PhaseSpaceState(x, xi, h, r2)


def test_state_validation():
    with pytest.raises(ValueError):
        PhaseSpaceState(0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        PhaseSpaceState(float("nan"), 0.0, 1.0)
    with pytest.raises(ValueError):
        PhaseSpaceState(0.0, 0.0, 1.0, -1.0)


def test_symbol_and_field_examples():
    s = _s(1.0, 0.0)
    assert symbol_p(s) == pytest.approx(0.5 - 0.2)
    assert vector_field(s) == pytest.approx((0.0, -1.5 + 0.2))
    assert vector_field(_s(0.0, A)) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_field_is_hamiltonian():
    # x' = dp/dxi, xi' = -dp/dx by centered differences
    s = _s(0.37, -0.21)
    d = 1e-6
    dpdx = (symbol_p(s.moved(s.x + d, s.xi)) - symbol_p(s.moved(s.x - d, s.xi))) / (2 * d)
    dpdxi = (symbol_p(s.moved(s.x, s.xi + d)) - symbol_p(s.moved(s.x, s.xi - d))) / (2 * d)
    assert vector_field(s) == pytest.approx((dpdxi, -dpdx), abs=1e-9)


def test_stationary_points():
    fixed = stationary_points(H, R2)
    assert fixed["hyperbolic"] == [(0.0, A), (0.0, -A)]
    for x, xi in fixed["elliptic"] + fixed["hyperbolic"]:
        assert max(map(abs, vector_field(_s(x, xi)))) < 1e-15
    assert [classify(_s(*p)).kind for p in fixed["elliptic"]] == ["elliptic_fixed"] * 2
    assert [classify(_s(*p)).kind for p in fixed["hyperbolic"]] == ["hyperbolic_fixed"] * 2


@pytest.mark.parametrize("seed,kind", [
    ((0.0, 0.5 * A), "sep_tanh"),
    ((0.0, 1.5 * A), "sep_coth"),
    ((A, 0.0), "sep_sech_plus"),
    ((-A, 0.0), "sep_sech_minus"),
    ((0.3, 0.0), "generic_weierstrass"),
    ((0.9, 0.9), "generic_weierstrass"),
])
def test_classify_examples(seed, kind):
    assert classify(_s(*seed)).kind == kind


def test_classify_axis_without_pocket():
    cls = classify(PhaseSpaceState(0.0, 0.5, 0.1, 0.0))
    assert cls.kind == "axis_x_zero" and cls.t0 == pytest.approx(4.0)


def test_pocket_orbit_uses_shifted_line():
    assert classify(_s(0.3, 0.0)).branch == "half_period_shift"
    assert classify(_s(0.9, 0.9)).branch == "real_line"


@pytest.mark.parametrize("seed", [(0.3, 0.0), (0.9, 0.9), (-0.2, 0.15), (0.0, 0.5 * A), (A, 0.0), (0.5, -0.8)])
def test_closed_form_starts_at_seed(seed):
    s = _s(*seed)
    out = closed_form_state(classify(s), s, 0.0)
    assert (out.x, out.xi) == pytest.approx(seed, abs=1e-10)


@pytest.mark.parametrize("seed", [(0.3, 0.0), (0.9, 0.9), (-0.2, 0.15), (-0.6, 0.1)])
def test_closed_form_obeys_hamilton_equations(seed):
    s = _s(*seed)
    cls = classify(s)
    ts = np.linspace(0.05, 3.0, 50)
    poles = pole_times(cls, s, 0.0, 3.5)
    ts = np.array([t for t in ts if all(abs(t - p) > 0.2 for p in poles)])
    d = 1e-5
    xp, xip = closed_form_states(cls, s, ts + d)
    xm, xim = closed_form_states(cls, s, ts - d)
    x, xi = closed_form_states(cls, s, ts)
    fx, fxi = x * xi, -1.5 * x * x - 0.5 * xi * xi + 0.5 * R2 * H
    scale = np.maximum(1.0, np.abs(fx) + np.abs(fxi))
    assert np.max(np.abs((xp - xm) / (2 * d) - fx) / scale) < 1e-5
    assert np.max(np.abs((xip - xim) / (2 * d) - fxi) / scale) < 1e-5


def test_closed_form_conserves_energy():
    s = _s(0.3, 0.1)
    cls = classify(s)
    x, xi = closed_form_states(cls, s, np.linspace(0, 10, 101))
    C = 0.5 * x * (x * x + xi * xi) - 0.5 * R2 * H * x
    assert np.max(np.abs(C - cls.C)) < 1e-12


def test_separatrix_limit():
    s = _s(A, 0.0)
    t = 30.0 / A
    out = closed_form_state(classify(s), s, t)
    assert math.hypot(out.x, out.xi + A) < 1e-6
    tanh = closed_form_state(classify(_s(0.0, 0.2 * A)), _s(0.0, 0.2 * A), t)
    assert math.hypot(tanh.x, tanh.xi - A) < 1e-6


def test_coth_pole_proximity():
    s = _s(0.0, -1.5 * A)
    cls = classify(s)
    (tp,) = pole_times(cls, s, 0.0, 50.0)
    assert tp > 0
    with pytest.raises(PoleProximityError):
        closed_form_states(cls, s, [tp])


def test_integrator_matches_closed_form():
    s = _s(0.3, 0.1)
    out = integrate_flow(s, 5.0)
    ref = closed_form_state(classify(s), s, 5.0)
    assert math.hypot(out.x - ref.x, out.xi - ref.xi) < 1e-6


def test_integrator_second_order():
    s = _s(0.5, -0.3)
    ref = closed_form_state(classify(s), s, 2.0)
    errs = []
    for dt in (4e-3, 2e-3):
        out = integrate_flow(s, 2.0, dt)
        errs.append(math.hypot(out.x - ref.x, out.xi - ref.xi))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-2)


def test_energy_drift_is_second_order():
    s = _s(0.3, 0.0)
    C0 = symbol_p(s)
    drift = []
    for dt in (4e-3, 2e-3):
        out = integrate_arrays([s.x], [s.xi], H, R2, 5.0, dt)
        worst = [0.0]

        def obs(k, t, x, xi, worst=worst):
            worst[0] = max(worst[0], abs(0.5 * x[0] * (x[0] ** 2 + xi[0] ** 2) - 0.5 * R2 * H * x[0] - C0))

        integrate_arrays([s.x], [s.xi], H, R2, 5.0, dt, observer=obs)
        drift.append(worst[0])
        assert np.isfinite(out.x[0])
    assert drift[0] / drift[1] == pytest.approx(4.0, rel=0.05)


def test_reversibility():
    s = _s(0.4, 0.2)
    back = integrate_flow(integrate_flow(s, 3.0), -3.0)
    assert math.hypot(back.x - s.x, back.xi - s.xi) < 1e-9


def test_escape_raises():
    with pytest.raises(FlowEscape) as info:
        integrate_flow(_s(0.0, -3.0), 5.0)
    assert 0 < info.value.t < 5.0


def test_escaped_points_do_not_abort_batch():
    res = integrate_arrays([0.0, 0.3], [-3.0, 0.0], H, R2, 5.0, 1e-3)
    assert res.escaped.tolist() == [True, False]
    assert np.isnan(res.x[0]) and np.isfinite(res.x[1])


def test_monotone_xi_without_pocket():
    seeds = [PhaseSpaceState(x, xi, 0.1, 0.0) for x, xi in ((0.3, 0.2), (-0.5, 0.4), (0.2, -0.1))]
    for line in flow_lines(seeds, 5.0, 1e-3, 10):
        assert np.all(np.diff(line.xi) < 0)


def test_tilde_routes_agree():
    h = 0.1
    x = np.array([0.3, -0.5, 0.1, 0.0])
    xi = np.array([0.2, 0.1, -0.6, 0.4])
    out = {r: tilde_flow_arrays(x, xi, h, -1.0, 1e-3, r) for r in TILDE_ROUTES}
    for r in TILDE_ROUTES[1:]:
        assert np.max(np.abs(out[r].x - out["direct"].x)) < 1e-12
        assert np.max(np.abs(out[r].xi - out["direct"].xi)) < 1e-12
    with pytest.raises(ValueError):
        tilde_flow_arrays(x, xi, h, 1.0, route="other")


def test_tilde_flow_conserves_tilde_symbol():
    s = PhaseSpaceState(0.3, -0.2, 0.1)
    out = tilde_flow(s, 2.0, 1e-3)
    assert tilde_symbol(out.x, out.xi, 0.1) == pytest.approx(tilde_symbol(s.x, s.xi, 0.1), abs=1e-8)


def test_tilde_stationary_points_are_critical():
    h = 0.1
    d = 1e-6
    for x, xi in sum(tilde_stationary_points(h).values(), []):
        gx = (tilde_symbol(x + d, xi, h) - tilde_symbol(x - d, xi, h)) / (2 * d)
        gxi = (tilde_symbol(x, xi + d, h) - tilde_symbol(x, xi - d, h)) / (2 * d)
        assert abs(gx) < 1e-9 and abs(gxi) < 1e-9


def test_flow_lines_shapes_and_fixed_points():
    fixed = stationary_points(H, R2)["elliptic"][0]
    seeds = [_s(*fixed), _s(0.3, 0.0), _s(0.0, -1.5 * A)]
    lines = flow_lines(seeds, 2.0, 1e-3, 10)
    assert [ln.line_id for ln in lines] == [0, 1, 2]
    assert lines[0].t.size == 1 and lines[0].kind == "elliptic_fixed"
    assert lines[1].t.size == 201 and not lines[1].escaped
    with pytest.raises(ValueError):
        flow_lines(seeds, 0.0)
    with pytest.raises(ValueError):
        flow_lines(seeds, 1.0, method="rk4")


def test_closed_lines_match_midpoint():
    seeds = [_s(0.3, 0.0), _s(0.9, 0.9), _s(0.0, 1.5 * A), _s(A, 0.0)]
    mid = flow_lines(seeds, 5.0, 1e-3, 10)
    closed = flow_lines(seeds, 5.0, 1e-3, 10, method="closed")
    assert max_line_discrepancy(mid, closed) < 1e-6


def test_poincare_return_matches_period():
    s = _s(0.3, 0.0)
    (line,) = flow_lines([s], 25.0, 1e-3, 1)
    period = 2 * elliptic_invariants(symbol_p(s), H, R2).real_half_period()
    assert poincare_return_time(line) == pytest.approx(period, abs=1e-3)

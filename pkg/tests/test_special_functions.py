import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.special import ellipj, ellipk as scipy_ellipk

from sclg.special_functions import (
    PoleProximityError,
    elliptic_invariants,
    ellipk,
    hermite_function,
    hermite_functions,
    invariants_from_g,
    jacobi_sncndn,
    laguerre_polynomial,
    weierstrass_p,
    weierstrass_p_inverse,
)


# -- Hermite functions -------------------------------------------------------

def test_hermite_ground_state_at_origin():
    assert hermite_function(0, 0.0, 1.0) == pytest.approx(math.pi ** -0.25, rel=1e-15)


def test_hermite_odd_vanishes_at_origin():
    assert hermite_function(1, 0.0, 1.0) == 0.0


def test_hermite_matches_ladder_oracle():
    # a^dag = (2h)^(-1/2)(x - h d/dx) applied twice to h_0 by spectral differentiation
    h = 0.1
    x = np.linspace(-4, 4, 2048, endpoint=False)
    k = 2 * np.pi * np.fft.fftfreq(x.size, d=x[1] - x[0])
    f = hermite_function(0, x, h)
    for n in range(2):
        df = np.real(np.fft.ifft(1j * k * np.fft.fft(f)))
        f = (2 * h) ** -0.5 * (x * f - h * df) / math.sqrt(n + 1)
    target = np.interp(0.5, x, f)
    assert hermite_function(2, 0.5, h) == pytest.approx(target, abs=1e-10)
    assert np.max(np.abs(f - hermite_function(2, x, h))) < 1e-10


def test_hermite_orthonormality():
    h = 0.37
    L = 6 * math.sqrt(h) * math.sqrt(17)
    x = np.linspace(-L, L, 4001)
    w = np.full(x.size, x[1] - x[0])
    w[[0, -1]] *= 0.5
    H = hermite_functions(8, x, h)
    gram = (H * w) @ H.T
    assert np.max(np.abs(gram - np.eye(9))) < 1e-8


def test_hermite_rejects_bad_input():
    with pytest.raises(ValueError):
        hermite_function(0, 0.0, 0.0)
    with pytest.raises(ValueError):
        hermite_function(0, float("nan"), 1.0)
    with pytest.raises(ValueError):
        hermite_functions(-1, 0.0, 1.0)


# -- Laguerre polynomials ----------------------------------------------------

def test_laguerre_small_cases():
    assert laguerre_polynomial(0, 0, 7.3) == 1.0
    assert laguerre_polynomial(0, 1, 7.3) == 1.0
    assert laguerre_polynomial(1, 0, 2.0) == -1.0


def _rodrigues(n, alpha, x0):
    x = sympy.symbols("x")
    expr = x ** (-alpha) * sympy.exp(x) / sympy.factorial(n) * sympy.diff(sympy.exp(-x) * x ** (n + alpha), x, n)
    return float(sympy.simplify(expr).subs(x, x0))


@pytest.mark.parametrize("n,alpha,x0", [(3, 2, 1.5), (4, 0, 0.7), (2, 5, 3.25), (5, 1, 6.0)])
def test_laguerre_rodrigues_oracle(n, alpha, x0):
    assert laguerre_polynomial(n, alpha, x0) == pytest.approx(_rodrigues(n, alpha, x0), rel=1e-12)


def test_laguerre_recurrence_consistency():
    x = np.linspace(0, 20, 201)
    for alpha in range(6):
        L = [laguerre_polynomial(n, alpha, x) for n in range(22)]
        for n in range(1, 21):
            lhs = (n + 1) * L[n + 1]
            rhs = (2 * n + 1 + alpha - x) * L[n] - (n + alpha) * L[n - 1]
            scale = np.maximum(1.0, np.abs(lhs))
            assert np.max(np.abs(lhs - rhs) / scale) < 1e-12


def test_laguerre_rejects_negative():
    with pytest.raises(ValueError):
        laguerre_polynomial(-1, 0, 1.0)
    with pytest.raises(ValueError):
        laguerre_polynomial(1, -1, 1.0)


# -- Jacobi elliptic functions -----------------------------------------------

@given(st.floats(0.0, 0.999), st.floats(-30.0, 30.0))
@settings(max_examples=200, deadline=None)
def test_jacobi_matches_scipy(m, u):
    sn, cn, dn = jacobi_sncndn(u, m)
    ref = ellipj(u, m)
    assert abs(sn - ref[0]) < 1e-12 and abs(cn - ref[1]) < 1e-12 and abs(dn - ref[2]) < 1e-12


def test_ellipk_matches_scipy():
    for m in (0.0, 0.1, 0.5, 0.9, 0.999):
        assert ellipk(m) == pytest.approx(scipy_ellipk(m), rel=1e-14)


# -- Weierstrass P -----------------------------------------------------------

def test_invariant_examples():
    inv = elliptic_invariants(2.0, 1.0, 0.0)
    assert inv.g2 == 0.0 and inv.g3 == 1.0
    inv = elliptic_invariants(0.0, 0.1, 4.0)
    assert inv.g2 == pytest.approx(16 * 0.01 / 12, rel=1e-15)
    assert inv.g3 == pytest.approx(-64 * 0.001 / 216, rel=1e-15)


@pytest.mark.parametrize("C", [0.05, -0.02, 0.0, 0.3, 1e-4])
def test_roots_satisfy_cubic(C):
    inv = elliptic_invariants(C, 0.1, 4.0)
    roots = np.asarray(inv.roots)
    assert abs(roots.sum()) < 1e-14
    scale = max(1.0, abs(inv.g2), abs(inv.g3))
    assert np.max(np.abs(4 * roots ** 3 - inv.g2 * roots - inv.g3)) < 1e-12 * scale
    disc = inv.g2 ** 3 - 27 * inv.g3 ** 2
    expected = "positive" if disc > 0 else "negative" if disc < 0 else "zero"
    if abs(disc) > 1e-12 * max(abs(inv.g2) ** 3, 27 * inv.g3 ** 2):
        assert inv.discriminant_sign == expected


def _ode_residual(inv, t):
    p, dp = weierstrass_p(t, inv)
    return np.abs(dp ** 2 - (4 * p ** 3 - inv.g2 * p - inv.g3)) / np.maximum(1.0, np.abs(p) ** 3)


@pytest.mark.parametrize("C", [0.05, -0.05, 0.01, 0.5])
def test_p_satisfies_ode_on_real_line(C):
    inv = elliptic_invariants(C, 0.1, 4.0)
    period = 2 * inv.real_half_period()
    t = np.linspace(0.01, period - 0.01, 100)
    assert np.max(_ode_residual(inv, t)) < 1e-9


def test_p_satisfies_ode_on_shifted_line():
    inv = elliptic_invariants(0.02, 0.1, 4.0)
    assert inv.discriminant_sign == "positive"
    t = np.linspace(-5, 5, 100) + 1j * inv.imaginary_half_period()
    assert np.max(_ode_residual(inv, t)) < 1e-9


def test_p_laurent_leading_term():
    for C in (0.05, 0.5, 0.0):
        inv = elliptic_invariants(C, 0.1, 4.0)
        p, _ = weierstrass_p(1e-3, inv)
        assert p * 1e-6 == pytest.approx(1.0, rel=1e-4)


def test_p_even():
    inv = elliptic_invariants(0.05, 0.1, 4.0)
    t = np.linspace(0.05, 3.0, 40)
    p_pos, _ = weierstrass_p(t, inv)
    p_neg, _ = weierstrass_p(-t, inv)
    assert np.max(np.abs(p_pos - p_neg) / np.abs(p_pos)) < 1e-12


def test_degenerate_invariants():
    inv = invariants_from_g(0.0, 0.0)
    p, dp = weierstrass_p(0.5, inv)
    assert p == pytest.approx(4.0) and dp == pytest.approx(-16.0)


def _laurent(t, g2, g3, terms=40):
    # P = t^-2 + sum_k c_k t^(2k-2); c_2 = g2/20, c_3 = g3/28, then the standard recursion
    c = {2: g2 / 20.0, 3: g3 / 28.0}
    for k in range(4, terms):
        c[k] = 3.0 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m] for m in range(2, k - 1))
    p = t ** -2 + sum(ck * t ** (2 * k - 2) for k, ck in c.items())
    dp = -2 * t ** -3 + sum(ck * (2 * k - 2) * t ** (2 * k - 3) for k, ck in c.items())
    return p, dp


def test_p_matches_ode_integration():
    # independent oracle: integrate P'' = 6 P^2 - g2/2 from a Laurent-seeded start
    for C in (0.05, 0.01):
        inv = elliptic_invariants(C, 0.1, 4.0)
        t0 = 0.5
        p0, dp0 = _laurent(t0, inv.g2, inv.g3)
        ts = np.linspace(0.6, 3.0, 10)
        sol = solve_ivp(lambda t, y: [y[1], 6 * y[0] ** 2 - inv.g2 / 2], (t0, 3.0), [p0, dp0],
                        t_eval=ts, rtol=1e-13, atol=1e-15, method="DOP853")
        p, _ = weierstrass_p(ts, inv)
        assert np.max(np.abs(p - sol.y[0]) / np.abs(p)) < 1e-8


def test_pole_proximity_raises():
    inv = elliptic_invariants(0.05, 0.1, 4.0)
    with pytest.raises(PoleProximityError) as info:
        weierstrass_p(1e-8, inv)
    assert info.value.pole == 0.0
    period = 2 * inv.real_half_period()
    with pytest.raises(PoleProximityError):
        weierstrass_p(period + 1e-7, inv)


@pytest.mark.parametrize("C,shifted", [(0.05, False), (0.02, False), (0.02, True), (-0.3, False)])
def test_inverse_round_trip(C, shifted):
    inv = elliptic_invariants(C, 0.1, 4.0)
    for t in (0.3, 1.1, 2.0):
        arg = t + 1j * inv.imaginary_half_period() if shifted else t
        p, dp = weierstrass_p(arg, inv)
        u = weierstrass_p_inverse(p, dp, inv, shifted)
        arg2 = u + 1j * inv.imaginary_half_period() if shifted else u
        p2, dp2 = weierstrass_p(arg2, inv)
        assert p2 == pytest.approx(p, rel=1e-9)
        assert dp2 == pytest.approx(dp, rel=1e-7, abs=1e-12)

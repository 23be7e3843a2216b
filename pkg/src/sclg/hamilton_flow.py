"""Hamilton flow of p_r(x, xi; h) = x (x^2 + xi^2)/2 - r^2 h x / 2.

Closed-form trajectories (Weierstrass P, separatrices, fixed points), an
implicit-midpoint integrator, and the rescaled flow used for LG transport.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special_functions import (
    POLE_RADIUS,
    PoleProximityError,
    elliptic_invariants,
    weierstrass_p,
    weierstrass_p_inverse,
)

ESCAPE_RADIUS = 1e6
NEWTON_TOL = 1e-13
NEWTON_MAXITER = 40
EPS_C = 1e-12
FIXED_TOL = 1e-12

KINDS = (
    "generic_weierstrass", "sep_coth", "sep_tanh", "sep_sech_plus", "sep_sech_minus",
    "hyperbolic_fixed", "elliptic_fixed", "axis_x_zero",
)

SQRT2 = math.sqrt(2.0)


class FlowError(RuntimeError):
    """Base class for integration failures; ``t`` is the time reached."""

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t


class FlowEscape(FlowError):
    pass


class NewtonFailure(FlowError):
    pass


@dataclass(frozen=True)
class PhaseSpaceState:
    x: float
    xi: float
    h: float
    r2: float = 4.0

    def __post_init__(self):
        for name in ("x", "xi", "h", "r2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.r2 < 0:
            raise ValueError("r2 must be non-negative")

    @property
    def a(self):
        """Pocket radius sqrt(r^2 h)."""
        return math.sqrt(self.r2 * self.h)

    def moved(self, x, xi):
        return PhaseSpaceState(float(x), float(xi), self.h, self.r2)


@dataclass(frozen=True)
class TrajectoryClass:
    kind: str
    C: float
    t0: float = 0.0
    branch: str = "real_line"


# ---------------------------------------------------------------------------
# Symbol and vector field
# ---------------------------------------------------------------------------

def _p(x, xi, h, r2):
    return 0.5 * x * (x * x + xi * xi) - 0.5 * r2 * h * x


def _field(x, xi, h, r2, scale=1.0):
    return scale * x * xi, scale * (-1.5 * x * x - 0.5 * xi * xi + 0.5 * r2 * h)


def symbol_p(s):
    return float(_p(s.x, s.xi, s.h, s.r2))


def vector_field(s):
    dx, dxi = _field(s.x, s.xi, s.h, s.r2)
    return float(dx), float(dxi)


def tilde_symbol(x, xi, h):
    """p~(x, xi) = -(1/sqrt2) [x (x^2 + xi^2)/2 - 4 h x]."""
    return -(0.5 * x * (x * x + xi * xi) - 4.0 * h * x) / SQRT2


def stationary_points(h, r2):
    """``{"elliptic": [...], "hyperbolic": [...]}`` as (x, xi) pairs."""
    a = math.sqrt(r2 * h)
    e = a / math.sqrt(3.0)
    return {"elliptic": [(e, 0.0), (-e, 0.0)], "hyperbolic": [(0.0, a), (0.0, -a)]}


# ---------------------------------------------------------------------------
# Classification and closed forms
# ---------------------------------------------------------------------------

def classify(s):
    """Trajectory class of the orbit through ``s`` with its phase constant.

    Seeds with vanishing energy are matched to the separatrix formulas;
    otherwise the P-function argument t0 and the line it lives on are
    recovered from the initial condition.
    """
    a = s.a
    C = symbol_p(s)
    dx, dxi = vector_field(s)
    if math.hypot(dx, dxi) <= FIXED_TOL * (s.r2 * s.h):
        kind = "hyperbolic_fixed" if s.x == 0.0 or abs(s.xi) > abs(s.x) else "elliptic_fixed"
        return TrajectoryClass(kind, C)
    scale = max(1.0, abs(s.x) ** 3 + abs(s.xi) ** 3, a ** 3)
    if abs(C) <= EPS_C * scale:
        if a == 0.0:
            # x = 0 forced; xi' = -xi^2/2
            return TrajectoryClass("axis_x_zero", 0.0, 2.0 / s.xi)
        if s.x != 0.0 and abs(s.xi) < a:
            kind = "sep_sech_plus" if s.x > 0 else "sep_sech_minus"
            return TrajectoryClass(kind, 0.0, math.atanh(-s.xi / a) / a)
        if abs(s.xi) < a:
            return TrajectoryClass("sep_tanh", 0.0, 2.0 * math.atanh(s.xi / a) / a)
        return TrajectoryClass("sep_coth", 0.0, 2.0 * math.atanh(a / s.xi) / a)
    return _classify_generic(s, C)


def _classify_generic(s, C):
    inv = elliptic_invariants(C, s.h, s.r2)
    shift = s.r2 * s.h / 12.0
    target = C / (2.0 * s.x) + shift
    slope = -s.xi * (target - shift)
    shifted = False
    if inv.discriminant_sign != "negative" and not (inv.g2 == 0.0 and inv.g3 == 0.0):
        e1, e2, _ = (float(np.real(r)) for r in inv.roots)
        # bounded orbits live where P stays in [e3, e2]
        shifted = abs(target - e2) < abs(target - e1) and target < e1
    t0 = weierstrass_p_inverse(target, slope, inv, shifted)
    t0 = _polish_t0(t0, target, slope, inv, shifted)
    return TrajectoryClass("generic_weierstrass", C, t0, "half_period_shift" if shifted else "real_line")


def _polish_t0(t0, target, slope, inv, shifted, steps=3):
    # Gauss-Newton on P(t0) = target and P'(t0) = slope together; near a
    # turning point P' ~ 0 the first equation alone fixes t0 only to sqrt(eps)
    offset = 1j * inv.imaginary_half_period() if shifted else 0.0
    for _ in range(steps):
        try:
            p, dp = weierstrass_p(t0 + offset, inv)
        except PoleProximityError:
            return t0
        p, dp = float(np.real(p)), float(np.real(dp))
        ddp = 6.0 * p * p - 0.5 * inv.g2
        norm = dp * dp + ddp * ddp
        if norm == 0.0:
            break
        t0 += (dp * (target - p) + ddp * (slope - dp)) / norm
    return t0


def closed_form_states(cls, seed, times):
    """Closed-form (x(t), xi(t)) arrays for the orbit ``cls`` through ``seed``."""
    t = np.asarray(times, dtype=float)
    a = seed.a
    kind = cls.kind
    if kind in ("hyperbolic_fixed", "elliptic_fixed"):
        return np.full(t.shape, seed.x), np.full(t.shape, seed.xi)
    u = t + cls.t0
    if kind == "sep_tanh":
        return np.zeros(t.shape), a * np.tanh(0.5 * a * u)
    if kind in ("sep_coth", "axis_x_zero"):
        close = np.abs(u) < POLE_RADIUS
        if np.any(close):
            i = int(np.argmax(close))
            raise PoleProximityError(float(t.flat[i]), float(-cls.t0))
        if kind == "axis_x_zero":
            return np.zeros(t.shape), 2.0 / u
        return np.zeros(t.shape), a / np.tanh(0.5 * a * u)
    if kind in ("sep_sech_plus", "sep_sech_minus"):
        sign = 1.0 if kind == "sep_sech_plus" else -1.0
        return sign * a / np.cosh(a * u), -a * np.tanh(a * u)
    inv = elliptic_invariants(cls.C, seed.h, seed.r2)
    arg = u + 1j * inv.imaginary_half_period() if cls.branch == "half_period_shift" else u
    p, dp = weierstrass_p(arg, inv)
    denom = p - seed.r2 * seed.h / 12.0
    return 0.5 * cls.C / denom, -dp / denom


def closed_form_state(cls, seed, t):
    x, xi = closed_form_states(cls, seed, t)
    return seed.moved(x, xi)


def pole_times(cls, seed, t_lo, t_hi):
    """Times in [t_lo, t_hi] where the closed-form orbit runs off to infinity."""
    kind = cls.kind
    if kind in ("sep_coth", "axis_x_zero"):
        tp = -cls.t0
        return [tp] if t_lo <= tp <= t_hi else []
    if kind != "generic_weierstrass" or cls.branch != "real_line":
        return []
    inv = elliptic_invariants(cls.C, seed.h, seed.r2)
    period = 2.0 * inv.real_half_period()
    if math.isinf(period):
        tp = -cls.t0
        return [tp] if t_lo <= tp <= t_hi else []
    k_lo = math.ceil((t_lo + cls.t0) / period)
    k_hi = math.floor((t_hi + cls.t0) / period)
    return [k * period - cls.t0 for k in range(k_lo, k_hi + 1)]


# ---------------------------------------------------------------------------
# Implicit midpoint integration
# ---------------------------------------------------------------------------

@dataclass
class FlowResult:
    """Vectorized integration outcome; escaped points hold NaN."""

    x: np.ndarray
    xi: np.ndarray
    escaped: np.ndarray
    escape_time: np.ndarray
    failed: np.ndarray = field(default=None)


def _steps(t, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t == 0:
        return 0, 0.0
    n = max(1, int(math.ceil(abs(t) / dt - 1e-9)))
    return n, t / n


def _midpoint_step(x, xi, step, h, r2, scale):
    """One implicit-midpoint step for arrays; returns (x, xi, converged)."""
    fx, fxi = _field(x, xi, h, r2, scale)
    zx, zxi = x + step * fx, xi + step * fxi
    converged = np.zeros(x.shape, dtype=bool)
    half = 0.5 * step * scale
    idx = None  # None: all points still active
    for _ in range(NEWTON_MAXITER):
        if idx is None:
            px, pxi, qx, qxi = x, xi, zx, zxi
        else:
            px, pxi, qx, qxi = x[idx], xi[idx], zx[idx], zxi[idx]
        mx, mxi = 0.5 * (px + qx), 0.5 * (pxi + qxi)
        fx, fxi = _field(mx, mxi, h, r2, scale)
        gx = qx - px - step * fx
        gxi = qxi - pxi - step * fxi
        tol = NEWTON_TOL * np.maximum(1.0, np.abs(qx) + np.abs(qxi))
        with np.errstate(invalid="ignore"):
            done = (np.abs(gx) <= tol) & (np.abs(gxi) <= tol)
        if idx is None:
            converged = done.copy()
            active = np.flatnonzero(~done)
        else:
            converged[idx[done]] = True
            active = idx[~done]
        if active.size == 0:
            break
        keep = ~done
        mx, mxi, gx, gxi = mx[keep], mxi[keep], gx[keep], gxi[keep]
        # I - (step/2) Df at the midpoint; Df = scale [[xi, x], [-3x, -xi]]
        j00 = 1.0 - half * mxi
        j01 = -half * mx
        j10 = 3.0 * half * mx
        j11 = 1.0 + half * mxi
        det = j00 * j11 - j01 * j10
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            zx[active] -= (j11 * gx - j01 * gxi) / det
            zxi[active] -= (-j10 * gx + j00 * gxi) / det
        idx = active
    return zx, zxi, converged


def integrate_arrays(x, xi, h, r2, t, dt, scale=1.0, observer=None):
    """Integrate many seeds at once with the implicit midpoint rule.

    ``scale`` multiplies the Hamiltonian (so ``scale=-1/sqrt2, r2=8`` is the
    rescaled flow). A point escapes once ``|x| + |xi|`` passes
    ``ESCAPE_RADIUS``, or when the Newton solve fails while the step is
    already under-resolved (``|step| * (|x| + |xi|) > 0.1``, i.e. finite-time
    blow-up). Other Newton failures are flagged in ``failed``.
    ``observer(k, time, x, xi)`` is called after every step if given.
    """
    x = np.array(x, dtype=float, copy=True)
    xi = np.array(xi, dtype=float, copy=True)
    n, step = _steps(t, dt)
    escaped = np.zeros(x.shape, dtype=bool)
    failed = np.zeros(x.shape, dtype=bool)
    escape_time = np.full(x.shape, np.nan)
    for k in range(n):
        live = ~(escaped | failed)
        if not live.any():
            break
        nx, nxi, ok = _midpoint_step(x[live], xi[live], step, h, r2, scale)
        size = np.abs(nx) + np.abs(nxi)
        old = np.abs(x[live]) + np.abs(xi[live])
        blown = ~np.isfinite(size) | (size > ESCAPE_RADIUS) | (~ok & (abs(step) * np.maximum(old, size) * abs(scale) > 0.1))
        bad = ~ok & ~blown
        idx = np.flatnonzero(live)
        now = (k + 1) * step
        escaped[idx[blown]] = True
        escape_time[idx[blown]] = now
        failed[idx[bad]] = True
        escape_time[idx[bad]] = k * step
        good = idx[~(blown | bad)]
        x[good] = nx[~(blown | bad)]
        xi[good] = nxi[~(blown | bad)]
        x[idx[blown | bad]] = np.nan
        xi[idx[blown | bad]] = np.nan
        if observer is not None:
            observer(k, now, x, xi)
    return FlowResult(x, xi, escaped, escape_time, failed)


def integrate_flow(seed, t, dt=1e-3):
    """Implicit-midpoint state of the p_r flow at time ``t`` (negative allowed).

    Raises
    ------
    FlowEscape
        The orbit leaves every bounded region before ``t``.
    NewtonFailure
        The implicit step could not be solved.
    """
    res = integrate_arrays([seed.x], [seed.xi], seed.h, seed.r2, t, dt)
    _raise_on(res)
    return seed.moved(res.x[0], res.xi[0])


def _raise_on(res):
    if res.escaped[0]:
        raise FlowEscape(f"trajectory escaped at t={res.escape_time[0]:.6g}", float(res.escape_time[0]))
    if res.failed[0]:
        raise NewtonFailure(f"Newton iteration failed after t={res.escape_time[0]:.6g}",
                            float(res.escape_time[0]))


# ---------------------------------------------------------------------------
# Rescaled flow
# ---------------------------------------------------------------------------

TILDE_ROUTES = ("direct", "conjugation", "rescaled")


def tilde_flow_arrays(x, xi, h, t, dt=1e-3, route="direct"):
    """Flow of p~ for arrays of seeds.

    ``direct`` integrates p~'s own field; ``conjugation`` uses
    M o kappa_t o M^-1 with M(x, xi) = (sqrt2 x, -sqrt2 xi) and kappa the
    r^2 = 4 flow; ``rescaled`` runs the r^2 = 8 flow for time -t/sqrt2.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if route == "direct":
        return integrate_arrays(x, xi, h, 8.0, t, dt, scale=-1.0 / SQRT2)
    if route == "conjugation":
        res = integrate_arrays(x / SQRT2, -xi / SQRT2, h, 4.0, t, dt)
        res.x, res.xi = SQRT2 * res.x, -SQRT2 * res.xi
        return res
    if route == "rescaled":
        return integrate_arrays(x, xi, h, 8.0, -t / SQRT2, dt / SQRT2)
    raise ValueError(f"unknown route {route!r}; choose from {TILDE_ROUTES}")


def tilde_flow(seed, t, dt=1e-3, route="direct"):
    """State of the p~ flow at time ``t``; ``seed.r2`` is not used (p~ fixes it)."""
    res = tilde_flow_arrays([seed.x], [seed.xi], seed.h, t, dt, route)
    _raise_on(res)
    return seed.moved(res.x[0], res.xi[0])


def tilde_stationary_points(h):
    """Zeros of p~'s Hamilton field: the r^2 = 8 fixed points."""
    return stationary_points(h, 8.0)


# ---------------------------------------------------------------------------
# Flow lines
# ---------------------------------------------------------------------------

@dataclass
class FlowLine:
    line_id: int
    t: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    C: np.ndarray
    escaped: bool = False
    escape_time: float = math.nan
    kind: str = ""


def _is_fixed(s):
    dx, dxi = vector_field(s)
    return math.hypot(dx, dxi) <= FIXED_TOL * (s.r2 * s.h)


def flow_lines(seeds, t_max, dt=1e-3, stride=10, method="midpoint"):
    """Polylines of the p_r flow sampled every ``stride`` steps.

    Fixed points give single-point lines. Escaping orbits stop at their
    last finite sample and are flagged; they never abort the batch.
    ``method="closed"`` samples the classified closed forms at the same
    times and stops at the first pole.
    """
    if t_max <= 0 or dt <= 0:
        raise ValueError("t_max and dt must be positive")
    if method not in ("midpoint", "closed"):
        raise ValueError("method must be 'midpoint' or 'closed'")
    seeds = list(seeds)
    n, step = _steps(t_max, dt)
    times = np.arange(0, n + 1, stride) * step
    lines = [None] * len(seeds)
    moving = {}
    for i, s in enumerate(seeds):
        cls = classify(s)
        if cls.kind in ("hyperbolic_fixed", "elliptic_fixed"):
            lines[i] = FlowLine(i, np.zeros(1), np.array([s.x]), np.array([s.xi]),
                                np.array([symbol_p(s)]), kind=cls.kind)
        elif method == "closed":
            line = _closed_line(s, cls, times)
            line.line_id, line.kind = i, cls.kind
            lines[i] = line
        else:
            moving.setdefault((s.h, s.r2), []).append((i, cls.kind))
    for (h, r2), group in moving.items():
        ids = [i for i, _ in group]
        for line, (i, kind) in zip(_midpoint_lines([seeds[i] for i in ids], h, r2, times, n, step, stride), group):
            line.line_id, line.kind = i, kind
            lines[i] = line
    return lines


def _midpoint_lines(seeds, h, r2, times, n, step, stride):
    x0 = np.array([s.x for s in seeds])
    xi0 = np.array([s.xi for s in seeds])
    xs = np.full((times.size, x0.size), np.nan)
    xis = np.full((times.size, x0.size), np.nan)
    xs[0], xis[0] = x0, xi0

    def observe(k, now, x, xi):
        if (k + 1) % stride == 0:
            row = (k + 1) // stride
            xs[row], xis[row] = x, xi

    res = integrate_arrays(x0, xi0, h, r2, n * step, abs(step), observer=observe)
    out = []
    for j in range(x0.size):
        good = np.isfinite(xs[:, j])
        m = int(np.argmin(good)) if not good.all() else good.size
        x, xi = xs[:m, j], xis[:m, j]
        out.append(FlowLine(0, times[:m], x, xi, _p(x, xi, h, r2),
                            escaped=bool(res.escaped[j] or res.failed[j]),
                            escape_time=float(res.escape_time[j])))
    return out


def _closed_line(s, cls, times):
    poles = pole_times(cls, s, 0.0, float(times[-1]) + 1.0)
    cut = len(times)
    escape = math.nan
    if poles:
        escape = min(p for p in poles if p >= 0.0)
        cut = int(np.searchsorted(times, escape - POLE_RADIUS))
        # keep only samples before the blow-up
    t = times[:cut]
    x, xi = closed_form_states(cls, s, t)
    finite = np.isfinite(x) & np.isfinite(xi) & (np.abs(x) + np.abs(xi) <= ESCAPE_RADIUS)
    if not finite.all():
        last = int(np.argmin(finite))
        t, x, xi = t[:last], x[:last], xi[:last]
    C = np.full(t.shape, cls.C)
    return FlowLine(0, t, x, xi, C, escaped=bool(poles) and escape <= times[-1], escape_time=escape)


def poincare_return_time(line):
    """First return time of a polyline to the section xi = 0, x > 0 (upward crossing).

    Returns ``nan`` if the line does not cross the section twice.
    """
    x, xi, t = line.x, line.xi, line.t
    crossings = []
    for k in range(len(t) - 1):
        if x[k] > 0 and xi[k] < 0 <= xi[k + 1]:
            frac = -xi[k] / (xi[k + 1] - xi[k])
            crossings.append(t[k] + frac * (t[k + 1] - t[k]))
    if len(crossings) < 2:
        return math.nan
    return crossings[1] - crossings[0]


POLE_WINDOW = 1.0


def max_line_discrepancy(midpoint_lines, closed_lines, window=POLE_WINDOW):
    """Largest state distance between matching midpoint and closed-form polylines.

    Samples closer than ``window`` to a blow-up time, or past it, are
    skipped: there the state itself diverges and absolute distances mean
    nothing.
    """
    worst = 0.0
    for a, b in zip(midpoint_lines, closed_lines):
        if a.line_id != b.line_id:
            raise ValueError("polylines are not aligned by line_id")
        m = min(a.t.size, b.t.size)
        t = a.t[:m]
        keep = np.ones(m, dtype=bool)
        for tp in (a.escape_time, b.escape_time):
            if math.isfinite(tp):
                keep &= t < tp - window
        if keep.any():
            d = np.hypot(a.x[:m] - b.x[:m], a.xi[:m] - b.xi[:m])[keep]
            worst = max(worst, float(d.max()))
    return worst

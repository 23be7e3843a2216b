"""Transport-error studies and figure data.

The Egorov comparison pits the exactly propagated LG field against the
classical transport of the initial LG mode along the p~ flow.
"""
from __future__ import annotations

import math
import os
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import Axis, SampledGrid
from .hamilton_flow import PhaseSpaceState, classify, flow_lines, stationary_points, tilde_flow_arrays
from .modes import lg_mode
from .operator_core import BINARY_MODES, evolved_lg_field

EGOROV_COUNT = 256
EGOROV_DT = 1e-3
EXCLUSION_BUDGET = 0.01


class ExclusionBudgetError(RuntimeError):
    """Too many relevant grid points escaped under the backward flow."""


def thread_cap():
    """Worker count from ``SCLG_THREADS`` (default: CPU count)."""
    raw = os.environ.get("SCLG_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"SCLG_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def egorov_axis(h, count=EGOROV_COUNT):
    """Square grid axis spanning +-max(12 sqrt h, 2)."""
    half = max(12.0 * math.sqrt(h), 2.0)
    return Axis(-half, half, count)


@dataclass(frozen=True)
class EgorovError:
    h: float
    sup: float
    l2: float
    excluded: int
    excluded_mass: float


def egorov_error(m, n, t, h, axis=None, dt=EGOROV_DT):
    """Sup and L^2 mismatch between exact evolution and classical transport.

    LHS is the propagated extended Wigner field; RHS is LG_mn evaluated at
    the p~ flow of each grid point run to time -t. The cubic flow is not
    complete: far-field points reach infinity in finite time. Such points
    take the limiting RHS value 0, so they still add |LHS| to both norms,
    and are counted. The exclusion budget is measured in L^2 mass of LHS,
    since the escaping points sit where the mode is negligible.

    Raises
    ------
    ExclusionBudgetError
        Escaped points carry more than 1% of the LHS L^2 mass.
    """
    if (m, n) not in BINARY_MODES:
        raise ValueError("mode pair must lie in {0, 1}^2")
    if h <= 0:
        raise ValueError("h must be positive")
    axis = axis or egorov_axis(h)
    lhs = evolved_lg_field(m, n, t, h, axis, axis).values
    fx, fy, lost = _backward_flow(float(h), float(t), float(dt), axis)
    rhs = np.where(lost, 0.0, lg_mode(m, n, fx, fy, h))
    mass = np.abs(lhs) ** 2
    lost_mass = float(mass[lost].sum() / mass.sum())
    if lost_mass > EXCLUSION_BUDGET:
        raise ExclusionBudgetError(f"escaped points carry {lost_mass:.3g} of the L2 mass (h={h}, t={t})")
    grid = SampledGrid(h, axis, axis, lhs - rhs, quantity="egorov_residual", time=float(t))
    return EgorovError(float(h), grid.sup_norm(), grid.l2_norm(), int(lost.sum()), lost_mass)


@lru_cache(maxsize=8)
def _backward_flow(h, t, dt, axis):
    # shared by every mode pair at the same (h, t, dt, grid)
    X, Y = np.meshgrid(axis.points(), axis.points(), indexing="ij")
    flow = tilde_flow_arrays(X.ravel(), Y.ravel(), h, -t, dt)
    lost = (flow.escaped | flow.failed).reshape(X.shape)
    fx = np.where(lost, 0.0, flow.x.reshape(X.shape))
    fy = np.where(lost, 0.0, flow.xi.reshape(X.shape))
    for arr in (fx, fy, lost):
        arr.setflags(write=False)
    return fx, fy, lost


def fitted_order(hs, errors):
    """Least-squares slope of log(error) against log(h); nan if any error is 0."""
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return math.nan
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


@dataclass
class EgorovReport:
    m: int
    n: int
    t: float
    h_values: list
    sup_errors: list
    l2_errors: list
    sup_order: float
    l2_order: float
    grid: dict
    excluded: list = field(default_factory=list)
    dt: float = EGOROV_DT

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    @property
    def best_order(self):
        orders = [o for o in (self.sup_order, self.l2_order) if not math.isnan(o)]
        return max(orders) if orders else math.nan


def egorov_order(m, n, t, h_values, count=EGOROV_COUNT, dt=EGOROV_DT, workers=None):
    """Errors at each h and fitted convergence orders in both norms.

    ``h_values`` must hold at least three strictly decreasing entries. The
    h samples run concurrently; results keep input order.
    """
    hs = [float(h) for h in h_values]
    if len(hs) < 3:
        raise ValueError("need at least three h samples")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("h samples must be strictly decreasing")
    workers = workers or thread_cap()
    with ThreadPoolExecutor(max_workers=min(workers, len(hs))) as pool:
        results = list(pool.map(lambda h: egorov_error(m, n, t, h, egorov_axis(h, count), dt), hs))
    sup = [r.sup for r in results]
    l2 = [r.l2 for r in results]
    grid = {"half_width": [egorov_axis(h, count).hi for h in hs], "count": int(count)}
    return EgorovReport(int(m), int(n), float(t), hs, sup, l2, fitted_order(hs, sup),
                        fitted_order(hs, l2), grid, [r.excluded for r in results], float(dt))


# ---------------------------------------------------------------------------
# Figure 1: evolution of the (0, 0) mode at h = 1
# ---------------------------------------------------------------------------

FIGURE1_AXIS = Axis(-4.0, 4.0, 256)


def caption_field(T, x, y):
    """pi^(-1/2) e^(-(x^2+y^2)/2) [cos 2T - y sin 2T + (x^2+y^2) sin^2 T]."""
    r2 = x * x + y * y
    return math.pi ** -0.5 * np.exp(-0.5 * r2) * (math.cos(2 * T) - y * math.sin(2 * T) + r2 * math.sin(T) ** 2)


@dataclass
class Figure1Frame:
    k: int
    T: float
    field: SampledGrid
    residual: float

    @property
    def magnitude(self):
        return self.field.with_values(np.abs(self.field.values), quantity="abs_evolved_lg")


def figure1_frames(axis=FIGURE1_AXIS):
    """Nine frames T = k pi/8 of the evolved (0, 0) field at h = 1, t = T sqrt2."""
    X, Y = np.meshgrid(axis.points(), axis.points(), indexing="ij")
    frames = []
    for k in range(9):
        T = k * math.pi / 8.0
        grid = evolved_lg_field(0, 0, T * math.sqrt(2.0), 1.0, axis, axis)
        residual = float(np.max(np.abs(grid.values - caption_field(T, X, Y))))
        frames.append(Figure1Frame(k, T, grid, residual))
    return frames


# ---------------------------------------------------------------------------
# Figure 2: flow lines of p at h = 1/10, r^2 = 4
# ---------------------------------------------------------------------------

@dataclass
class Figure2Data:
    h: float
    r2: float
    lines: list
    stationary: dict


def separatrix_seeds(h, r2, reach=8.0):
    """Seeds on the C = 0 set taken from the closed forms at time -reach/a.

    Gives the two sech arcs (through (+-a, 0)), the tanh segment on the
    xi-axis and the two coth rays, so the drawn separatrix joins the
    hyperbolic points.
    """
    a = math.sqrt(r2 * h)
    s = reach / a
    pts = [
        (a / math.cosh(a * s), a * math.tanh(a * s)),
        (-a / math.cosh(a * s), a * math.tanh(a * s)),
        (0.0, -a * math.tanh(0.5 * reach)),
        (0.0, a / math.tanh(0.25 * a)),
        (0.0, -a * 1.0001),
    ]
    return [PhaseSpaceState(x, xi, h, r2) for x, xi in pts]


def figure2_flowlines(h=0.1, r2=4.0, lattice=9, t_max=12.0, dt=1e-3, stride=20):
    """Flow lines from a lattice over [-1, 1]^2, the separatrix and the fixed points."""
    g = np.linspace(-1.0, 1.0, lattice)
    seeds = [PhaseSpaceState(float(x), float(y), h, r2) for x in g for y in g]
    seeds += separatrix_seeds(h, r2)
    fixed = stationary_points(h, r2)
    seeds += [PhaseSpaceState(x, y, h, r2) for x, y in fixed["elliptic"] + fixed["hyperbolic"]]
    for s in seeds[-4:]:
        if classify(s).kind not in ("elliptic_fixed", "hyperbolic_fixed"):
            raise AssertionError(f"stationary point {s} not classified as fixed")
    return Figure2Data(h, r2, flow_lines(seeds, t_max, dt, stride), fixed)

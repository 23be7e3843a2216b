"""Standard and extended semiclassical Wigner transforms.

The extended transform of an HG expansion is evaluated through the LG
closed forms; direct quadrature in the integration variable is kept as an
independent route and is used by the tests as the oracle.
"""
from __future__ import annotations

import math

import numpy as np

from .grid import Axis, SampledGrid
from .modes import CoefficientMatrix, CoefficientVector, _same_h, lg_mode
from .special_functions import hermite_functions

SYMBOLS = ("x", "xi", "x2+xi2")
_SYMBOL_ALIASES = {"ξ": "xi", "x²+ξ²": "x2+xi2", "x^2+xi^2": "x2+xi2"}


def _check_request(container, h):
    if h is not None and container.h != h:
        raise ValueError(f"container h={container.h} does not match requested h={h}")


def _envelope_radius(h, n_max):
    # classically allowed radius of h_{n_max} plus a Gaussian tail below 1e-14
    return math.sqrt(h) * (math.sqrt(2 * n_max + 1) + 9.0)


def _p_nodes(half_width, bandwidth):
    step = math.pi / (4.0 * bandwidth)
    n = int(math.ceil(half_width / step))
    p = np.arange(-n, n + 1) * step
    return p, np.full(p.size, step)


# ---------------------------------------------------------------------------
# Standard transform
# ---------------------------------------------------------------------------

def wigner_standard(f, g, x_axis, xi_axis, h=None):
    """W(f, g)(x, xi) = (2 pi h)^(-1/2) int e^(-i p xi/h) f(x + p/2) conj g(x - p/2) dp.

    Computed by direct trapezoid quadrature in p, row by row.
    """
    _same_h(f, g)
    _check_request(f, h)
    h = f.h
    n_max = max(f.coeffs.size, g.coeffs.size) - 1
    radius = _envelope_radius(h, n_max)
    xi = xi_axis.points()
    band = (np.max(np.abs(xi)) + radius) / h
    p, w = _p_nodes(2.0 * radius, band)
    x = x_axis.points()
    plus = x[:, None] + 0.5 * p[None, :]
    minus = x[:, None] - 0.5 * p[None, :]
    fp = np.tensordot(f.coeffs, hermite_functions(f.coeffs.size - 1, plus, h), axes=(0, 0))
    gm = np.tensordot(g.coeffs, hermite_functions(g.coeffs.size - 1, minus, h), axes=(0, 0))
    integrand = fp * np.conj(gm) * w[None, :]
    kernel = np.exp(-1j * np.outer(p, xi) / h)
    values = (2.0 * math.pi * h) ** -0.5 * (integrand @ kernel)
    return SampledGrid(h, x_axis, xi_axis, values, quantity="wigner")


# ---------------------------------------------------------------------------
# Extended transform
# ---------------------------------------------------------------------------

def lg_expansion(F, x, y):
    """Closed-form sum_jk c_jk LG_jk(x, y) at arbitrary points (broadcasting)."""
    c = F.coeffs
    out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=complex)
    for j, k in zip(*np.nonzero(c)):
        out = out + c[j, k] * lg_mode(int(j), int(k), x, y, F.h)
    return out


def wigner_extended(F, x_axis, y_axis, h=None):
    """Extended Wigner transform of an HG expansion, on an (x, xi) grid.

    Production route: W~ h_jk is the (j, k) LG mode, so the transform is the
    coefficient-weighted sum of closed forms.
    """
    _check_request(F, h)
    X, Y = np.meshgrid(x_axis.points(), y_axis.points(), indexing="ij")
    return SampledGrid(F.h, x_axis, y_axis, lg_expansion(F, X, Y), quantity="extended_wigner")


def wigner_extended_quadrature(F, x_axis, y_axis, h=None):
    """Extended Wigner transform by direct quadrature in p.

    W~F(x, xi) = (2 pi h)^(-1/2) int e^(+i p xi/h) F((x+p)/sqrt2, (x-p)/sqrt2) dp.
    """
    _check_request(F, h)
    h = F.h
    rows, cols = F.coeffs.shape
    radius = _envelope_radius(h, max(rows, cols) - 1)
    xi = y_axis.points()
    band = (np.max(np.abs(xi)) + math.sqrt(2.0) * radius) / h
    p, w = _p_nodes(math.sqrt(2.0) * radius, band)
    x = x_axis.points()
    s = 1.0 / math.sqrt(2.0)
    u = s * (x[:, None] + p[None, :])
    v = s * (x[:, None] - p[None, :])
    hu = hermite_functions(rows - 1, u, h)
    hv = hermite_functions(cols - 1, v, h)
    integrand = np.einsum("mn,mxp,nxp->xp", F.coeffs, hu, hv) * w[None, :]
    kernel = np.exp(1j * np.outer(p, xi) / h)
    values = (2.0 * math.pi * h) ** -0.5 * (integrand @ kernel)
    return SampledGrid(h, x_axis, y_axis, values, quantity="extended_wigner")


# ---------------------------------------------------------------------------
# Weyl pairing
# ---------------------------------------------------------------------------

def _symbol_name(symbol):
    name = _SYMBOL_ALIASES.get(symbol, symbol)
    if name not in SYMBOLS:
        raise ValueError(f"unsupported symbol {symbol!r}; choose from {SYMBOLS}")
    return name


def weyl_quantize(symbol, f):
    """Exact action of Op_h^W(symbol) on a coefficient vector.

    x = sqrt(h/2)(a + a^dag), hD = -i sqrt(h/2)(a - a^dag), x^2 + (hD)^2 = h(2N + 1).
    """
    name = _symbol_name(symbol)
    c = f.padded(f.coeffs.size + 1).coeffs
    n = np.arange(c.size)
    up = np.zeros_like(c)
    up[1:] = np.sqrt(n[1:]) * c[:-1]
    down = np.zeros_like(c)
    down[:-1] = np.sqrt(n[1:]) * c[1:]
    s = math.sqrt(f.h / 2.0)
    if name == "x":
        out = s * (down + up)
    elif name == "xi":
        out = -1j * s * (down - up)
    else:
        out = f.h * (2.0 * n + 1.0) * c
    return CoefficientVector(f.h, out)


def _symbol_values(name, X, XI):
    if name == "x":
        return X
    if name == "xi":
        return XI
    return X * X + XI * XI


def weyl_pairing(symbol, f, g, h=None, count=257):
    """Both sides of the Weyl pairing identity for the standard and extended transforms.

    Returns a dict with ``lhs`` = <Op(symbol) f | g> (exact, coefficient space),
    ``rhs_standard`` = (2 pi h)^(-1/2) iint symbol W(f, g), and ``rhs_extended`` =
    (pi h)^(-1/2) iint W~(f x conj g)(sqrt2 x, -sqrt2 xi) symbol.
    """
    name = _symbol_name(symbol)
    _same_h(f, g)
    _check_request(f, h)
    h = f.h
    opf = weyl_quantize(name, f)
    size = max(opf.coeffs.size, g.coeffs.size)
    lhs = complex(np.vdot(g.padded(size).coeffs, opf.padded(size).coeffs))

    radius = _envelope_radius(h, max(f.coeffs.size, g.coeffs.size) - 1)
    ax = Axis(-radius, radius, count)
    X, XI = np.meshgrid(ax.points(), ax.points(), indexing="ij")
    sigma = _symbol_values(name, X, XI)
    wig = wigner_standard(f, g, ax, ax)
    rhs_std = (2.0 * math.pi * h) ** -0.5 * complex(wig.integrate(sigma * wig.values))

    F = CoefficientMatrix.outer(f, g)
    ext = lg_expansion(F, math.sqrt(2.0) * X, -math.sqrt(2.0) * XI)
    rhs_ext = (math.pi * h) ** -0.5 * complex(wig.integrate(sigma * ext))
    return {"lhs": lhs, "rhs_standard": rhs_std, "rhs_extended": rhs_ext}


def weyl_pairing_residual(symbol, f, g, h=None):
    """Largest discrepancy between the exact matrix element and either phase-space pairing."""
    sides = weyl_pairing(symbol, f, g, h)
    return max(abs(sides["lhs"] - sides["rhs_standard"]), abs(sides["lhs"] - sides["rhs_extended"]))


# ---------------------------------------------------------------------------
# Intertwining
# ---------------------------------------------------------------------------

#: LG-side operator paired with the HG-side operator it intertwines with.
INTERTWINING = (
    ("A_plus_dag", "a1_dag"),
    ("A_minus_dag", "a2_dag"),
    ("A_plus", "a1"),
    ("A_minus", "a2"),
)


def fd_step(h, grid_step):
    return min(grid_step, math.sqrt(h) / 256.0)


def apply_lg_operator(kind, field, X, Y, h, delta):
    """Apply an LG ladder operator to a field given as a callable ``field(x, y)``.

    Cartesian pieces use ``a^dag = (2h)^(-1/2)(x - h d/dx)`` and
    ``a = (2h)^(-1/2)(x + h d/dx)``; derivatives are centered second-order
    differences with step ``delta``.
    """
    G = field(X, Y)
    dx = (field(X + delta, Y) - field(X - delta, Y)) / (2.0 * delta)
    dy = (field(X, Y + delta) - field(X, Y - delta)) / (2.0 * delta)
    c = (2.0 * h) ** -0.5
    if kind.endswith("_dag"):
        a1 = c * (X * G - h * dx)
        a2 = c * (Y * G - h * dy)
        sign = 1.0 if kind == "A_plus_dag" else -1.0
    else:
        a1 = c * (X * G + h * dx)
        a2 = c * (Y * G + h * dy)
        sign = -1.0 if kind == "A_plus" else 1.0
    return (a1 + sign * 1j * a2) / math.sqrt(2.0)


def intertwining_residuals(F, x_axis, y_axis):
    """Relative L^2 mismatch of the four intertwining relations for ``F``.

    For each pair, compares the LG-side operator applied to W~F by finite
    differences with W~ of the HG-side operator applied in coefficient space.
    """
    from .modes import ladder_apply

    X, Y = np.meshgrid(x_axis.points(), y_axis.points(), indexing="ij")
    grid = SampledGrid(F.h, x_axis, y_axis, np.zeros(X.shape))
    delta = fd_step(F.h, min(x_axis.step, y_axis.step))
    out = {}
    for lg_kind, hg_kind in INTERTWINING:
        lhs = apply_lg_operator(lg_kind, lambda a, b: lg_expansion(F, a, b), X, Y, F.h, delta)
        rhs = lg_expansion(ladder_apply(hg_kind, F), X, Y)
        scale = grid.l2_norm(rhs)
        if scale == 0.0:
            scale = 1.0
        out[(lg_kind, hg_kind)] = grid.l2_norm(lhs - rhs) / scale
    return out

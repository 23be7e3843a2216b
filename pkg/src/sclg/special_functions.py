"""Scalar special functions: Hermite functions, Laguerre polynomials,
Jacobi elliptic functions and the Weierstrass P-function on its real lines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = np.finfo(float).eps

#: Arguments closer than this to a lattice pole are refused.
POLE_RADIUS = 1e-6


class PoleProximityError(ValueError):
    """Raised when the P-function is evaluated too close to a pole."""

    def __init__(self, t, pole):
        self.t = t
        self.pole = pole
        super().__init__(f"argument {t!r} within {POLE_RADIUS:g} of pole at {pole!r}")


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------

def _check_h(h):
    if not (np.isfinite(h) and h > 0):
        raise ValueError(f"semiclassical parameter must be positive, got {h!r}")


def hermite_functions(nmax, x, h):
    """All normalized semiclassical Hermite functions of order 0..nmax.

    Parameters
    ----------
    nmax : int
        Highest order returned.
    x : float or array_like
        Evaluation points.
    h : float
        Semiclassical parameter.

    Returns
    -------
    ndarray, shape (nmax + 1,) + shape(x)
        ``out[n]`` is ``h_n(x)``, normalized in L^2(R).

    Notes
    -----
    The recurrence is run in ``u = x / sqrt(h)`` so it is independent of h:
    ``psi_{n+1} = sqrt(2/(n+1)) u psi_n - sqrt(n/(n+1)) psi_{n-1}``, which is
    the coefficient form of ``a^dag h_n = sqrt(n+1) h_{n+1}``.
    """
    if nmax < 0:
        raise ValueError("order must be non-negative")
    _check_h(h)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation points must be finite")
    u = x / math.sqrt(h)
    out = np.empty((nmax + 1,) + u.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * u * u)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * u * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out * h ** -0.25


def hermite_function(n, x, h):
    """The n-th L^2-normalized semiclassical Hermite function at ``x``."""
    vals = hermite_functions(n, x, h)[n]
    return float(vals) if vals.ndim == 0 else vals


# ---------------------------------------------------------------------------
# Laguerre polynomials
# ---------------------------------------------------------------------------

def laguerre_polynomial(n, alpha, x):
    """Generalized Laguerre polynomial L_n^alpha(x) by three-term recurrence."""
    if n < 0 or alpha < 0:
        raise ValueError("degree and upper index must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return float(cur) if np.ndim(cur) == 0 else cur


# ---------------------------------------------------------------------------
# Jacobi elliptic functions
# ---------------------------------------------------------------------------

def _agm_sequence(m):
    a, b, c = [1.0], [math.sqrt(1.0 - m)], [math.sqrt(m)]
    while abs(c[-1]) > _EPS * a[-1] and len(a) < 64:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    return a, c


def ellipk(m):
    """Complete elliptic integral of the first kind K(m) by the AGM."""
    if not 0.0 <= m < 1.0:
        raise ValueError("parameter must lie in [0, 1)")
    a, _ = _agm_sequence(m)
    return math.pi / (2.0 * a[-1])


def jacobi_sncndn(u, m):
    """Jacobi sn, cn, dn for real ``u`` and parameter ``0 <= m <= 1``.

    Descending Landen / AGM scheme; ``u`` is first reduced modulo 4K so the
    amplitude recursion starts from a bounded angle.
    """
    u = np.asarray(u, dtype=float)
    if not 0.0 <= m <= 1.0:
        raise ValueError("parameter must lie in [0, 1]")
    if m >= 1.0 - 4 * _EPS:
        s = 1.0 / np.cosh(u)
        return np.tanh(u), s, s
    if m == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    a, c = _agm_sequence(m)
    n = len(a) - 1
    quarter = math.pi / (2.0 * a[-1])
    u = u - 4.0 * quarter * np.round(u / (4.0 * quarter))
    phi = (2.0 ** n) * a[-1] * u
    phi_next = phi
    for k in range(n, 0, -1):
        phi_next = phi
        phi = 0.5 * (phi + np.arcsin(c[k] / a[k] * np.sin(phi)))
    sn, cn = np.sin(phi), np.cos(phi)
    dn = cn / np.cos(phi_next - phi) if n > 0 else np.ones_like(u)
    return sn, cn, dn


# ---------------------------------------------------------------------------
# Weierstrass invariants and P-function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticInvariants:
    """Invariants (g2, g3) of a Weierstrass cubic with its classified roots.

    ``roots`` is ordered ``e1 >= e2 >= e3`` when all three are real; with
    one real root it is ``(e_complex, e_real, conj(e_complex))`` so that
    ``roots[1]`` is always real.
    """

    g2: float
    g3: float
    roots: tuple
    discriminant_sign: str

    @property
    def discriminant(self):
        return self.g2 ** 3 - 27.0 * self.g3 ** 2

    def cubic(self, s):
        return 4.0 * s ** 3 - self.g2 * s - self.g3

    # Reduction parameters -------------------------------------------------

    def _real_roots(self):
        return tuple(float(np.real(r)) for r in self.roots)

    def reduction(self):
        """Jacobi reduction data ``(kind, scale, m, base)``.

        kind ``"three"``: P = e3 + (e1 - e3) / sn^2(scale * t | m);
        kind ``"one"``: P = e + H (1 + cn) / (1 - cn), argument 2 sqrt(H) t.
        """
        if self.g2 == 0.0 and self.g3 == 0.0:
            return ("degenerate", 0.0, 0.0, 0.0)
        if self.discriminant_sign == "negative":
            e = float(np.real(self.roots[1]))
            ec = complex(self.roots[0])
            big_h = abs(e - ec)
            m = min(max(0.5 - 0.75 * e / big_h, 0.0), 1.0)
            return ("one", big_h, m, e)
        e1, e2, e3 = self._real_roots()
        span = e1 - e3
        m = min(max((e2 - e3) / span, 0.0), 1.0)
        return ("three", span, m, e3)

    def real_half_period(self):
        """Real half-period omega; P(t) has its poles at t = 2 k omega."""
        kind, scale, m, _ = self.reduction()
        if kind == "degenerate" or m >= 1.0:
            return math.inf
        if kind == "three":
            return ellipk(m) / math.sqrt(scale)
        return ellipk(m) / math.sqrt(scale)

    def imaginary_half_period(self):
        """Imaginary half-period (its imaginary part), three-real-root case only."""
        kind, scale, m, _ = self.reduction()
        if kind != "three":
            raise ValueError("the shifted real line exists only for three real roots")
        if m <= 0.0:
            return math.inf
        return ellipk(1.0 - m) / math.sqrt(scale)


def _solve_cubic(g2, g3):
    """Roots of 4 s^3 - g2 s - g3 with a sign-of-discriminant label."""
    disc = g2 ** 3 - 27.0 * g3 ** 2
    scale = abs(g2) ** 3 + 27.0 * g3 ** 2
    if scale == 0.0:
        return (0j, 0j, 0j), "zero"
    if abs(disc) <= 64 * _EPS * scale:
        if g2 == 0.0:
            # g3 must then be tiny relative to itself; cannot happen with scale>0
            r = (g3 / 4.0) ** (1.0 / 3.0) if g3 >= 0 else -((-g3 / 4.0) ** (1.0 / 3.0))
            return (complex(r), complex(r), complex(r)), "zero"
        simple = 3.0 * g3 / g2
        double = -1.5 * g3 / g2
        roots = sorted([simple, double, double], reverse=True)
        return tuple(complex(r) for r in roots), "zero"
    p, q = -g2 / 4.0, -g3 / 4.0
    if disc > 0:
        rad = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        theta = math.acos(min(max(arg, -1.0), 1.0)) / 3.0
        rs = [rad * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
        rs = [_polish(r, g2, g3) for r in rs]
        rs.sort(reverse=True)
        return tuple(complex(r) for r in rs), "positive"
    root = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    u = np.cbrt(-q / 2.0 + root)
    v = np.cbrt(-q / 2.0 - root)
    e = _polish(float(u + v), g2, g3)
    # the remaining pair solves s^2 + e s + (e^2 - g2/4) = 0
    re = -0.5 * e
    im = math.sqrt(max(3.0 * e * e - g2, 0.0)) / 2.0
    # 4(s-e)(s^2+es+e^2-g2/4) = cubic  =>  discriminant e^2 - 4(e^2 - g2/4) = g2 - 3e^2
    return (complex(re, im), complex(e), complex(re, -im)), "negative"


def _polish(r, g2, g3):
    for _ in range(3):
        f = 4.0 * r ** 3 - g2 * r - g3
        df = 12.0 * r * r - g2
        if df == 0.0:
            break
        r_new = r - f / df
        if abs(4.0 * r_new ** 3 - g2 * r_new - g3) >= abs(f):
            break
        r = r_new
    return r


def elliptic_invariants(C, h, r2):
    """Weierstrass invariants of the Hamilton trajectory with energy ``C``.

    ``g2 = r^4 h^2 / 12`` and ``g3 = C^2 / 4 - r^6 h^3 / 216``.
    """
    _check_h(h)
    if r2 < 0:
        raise ValueError("r2 must be non-negative")
    g2 = r2 * r2 * h * h / 12.0
    g3 = C * C / 4.0 - r2 ** 3 * h ** 3 / 216.0
    roots, sign = _solve_cubic(g2, g3)
    return EllipticInvariants(g2=g2, g3=g3, roots=roots, discriminant_sign=sign)


def invariants_from_g(g2, g3):
    """Build :class:`EllipticInvariants` directly from real ``g2, g3``."""
    roots, sign = _solve_cubic(float(g2), float(g3))
    return EllipticInvariants(g2=float(g2), g3=float(g3), roots=roots, discriminant_sign=sign)


def weierstrass_p(t, inv):
    """P(t) and P'(t) on the real line or on the shifted line.

    Parameters
    ----------
    t : complex or array_like of complex
        Either real, or with imaginary part equal to the imaginary
        half-period of the lattice (three-real-root case only).
    inv : EllipticInvariants

    Returns
    -------
    p, dp : float or ndarray
        Real values of the function and its derivative.

    Raises
    ------
    PoleProximityError
        If a real argument lies within ``POLE_RADIUS`` of a lattice pole.
    """
    t = np.asarray(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    re = np.real(t).astype(float)
    im = np.imag(t).astype(float)
    shifted = np.zeros(re.shape, dtype=bool)
    if np.any(im != 0.0):
        half = inv.imaginary_half_period()
        on_shift = np.isclose(np.abs(im), half, rtol=1e-12, atol=0.0)
        on_real = im == 0.0
        if not np.all(on_shift | on_real):
            raise ValueError("argument must lie on the real line or the shifted real line")
        shifted = on_shift
    p = np.empty_like(re)
    dp = np.empty_like(re)
    if np.any(~shifted):
        p[~shifted], dp[~shifted] = _p_real(re[~shifted], inv)
    if np.any(shifted):
        p[shifted], dp[shifted] = _p_shifted(re[shifted], inv)
    if scalar:
        return float(p[0]), float(dp[0])
    return p, dp


def _nearest_pole(u, inv):
    omega = inv.real_half_period()
    if math.isinf(omega):
        return np.zeros_like(u)
    return 2.0 * omega * np.round(u / (2.0 * omega))


def _p_real(u, inv):
    pole = _nearest_pole(u, inv)
    close = np.abs(u - pole) < POLE_RADIUS
    if np.any(close):
        i = int(np.argmax(close))
        raise PoleProximityError(float(u[i]), float(pole[i]))
    kind, scale, m, base = inv.reduction()
    if kind == "degenerate":
        return 1.0 / u ** 2, -2.0 / u ** 3
    if kind == "three":
        rt = math.sqrt(scale)
        sn, cn, dn = jacobi_sncndn(rt * u, m)
        return base + scale / sn ** 2, -2.0 * scale * rt * cn * dn / sn ** 3
    # one real root: 1 - cn = sn^2 / (1 + cn) avoids cancellation near poles
    rt = math.sqrt(scale)
    sn, cn, dn = jacobi_sncndn(2.0 * rt * u, m)
    opc = 1.0 + cn
    ratio = opc * opc / (sn * sn)
    return base + scale * ratio, -4.0 * scale * rt * dn * opc * opc / sn ** 3


def _p_shifted(u, inv):
    kind, scale, m, base = inv.reduction()
    if kind != "three":
        raise ValueError("the shifted real line exists only for three real roots")
    rt = math.sqrt(scale)
    sn, cn, dn = jacobi_sncndn(rt * u, m)
    width = m * scale  # e2 - e3
    return base + width * sn * sn, 2.0 * width * rt * sn * cn * dn


def weierstrass_p_inverse(value, derivative, inv, shifted):
    """Argument ``u`` with ``P(u) = value`` and ``sign P'(u) = sign derivative``.

    The Jacobi amplitude is recovered with ``atan2`` from both the value
    and the derivative, so turning points (P' = 0) stay well conditioned,
    and the incomplete integral of the first kind returns the argument.
    """
    from scipy.special import ellipkinc

    kind, scale, m, base = inv.reduction()
    if kind == "degenerate":
        if shifted:
            raise ValueError("no shifted line for vanishing invariants")
        u = 1.0 / math.sqrt(value)
        return u if derivative <= 0 else -u
    rt = math.sqrt(scale)
    if kind == "three" and not shifted:
        sn2 = min(max(scale / (value - base), 0.0), 1.0)
        sn = math.sqrt(sn2)
        dn = math.sqrt(max(1.0 - m * sn2, 0.0))
        cn_val = math.sqrt(1.0 - sn2)
        if cn_val < 0.5 and dn > 0.0:
            cn = -derivative * sn ** 3 / (2.0 * scale * rt * dn)
        else:
            cn = math.copysign(cn_val, -derivative)
        phi = math.atan2(sn, cn)
        return _incomplete_f(phi, m, ellipkinc) / rt
    if kind == "three":
        width = m * scale
        sn2 = min(max((value - base) / width, 0.0), 1.0) if width > 0 else 0.0
        sn = math.sqrt(sn2)
        dn = math.sqrt(max(1.0 - m * sn2, 0.0))
        cn_val = math.sqrt(1.0 - sn2)
        if cn_val < 0.5 and sn > 0.0 and dn > 0.0:
            cn = derivative / (2.0 * width * rt * sn * dn)
        else:
            cn = math.copysign(cn_val, derivative) if derivative != 0.0 else cn_val
        phi = math.atan2(sn, cn)
        return _incomplete_f(phi, m, ellipkinc) / rt
    if shifted:
        raise ValueError("the shifted real line exists only for three real roots")
    d = value - base
    cn = (d - scale) / (d + scale)
    sn_val = math.sqrt(max(1.0 - cn * cn, 0.0))
    dn = math.sqrt(max(1.0 - m * sn_val * sn_val, 0.0))
    if abs(cn) > 0.5:
        sn = -derivative * (1.0 - cn) ** 2 / (4.0 * scale * rt * dn)
    else:
        sn = math.copysign(sn_val, -derivative)
    phi = math.atan2(sn, cn)
    return _incomplete_f(phi, m, ellipkinc) / (2.0 * rt)


def _incomplete_f(phi, m, ellipkinc):
    if m >= 1.0 - 4 * _EPS:
        return math.atanh(math.sin(phi)) if abs(phi) < math.pi / 2 else math.copysign(math.inf, phi)
    return float(ellipkinc(phi, m))

"""Hermite-Gaussian and Laguerre-Gaussian mode fields and exact ladder
actions on HG coefficient expansions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special_functions import hermite_functions, laguerre_polynomial, _check_h

ONE_D_KINDS = ("a", "a_dag")
TWO_D_KINDS = ("A_plus", "A_plus_dag", "A_minus", "A_minus_dag", "a1", "a1_dag", "a2", "a2_dag")

_ALIASES = {
    "a†": "a_dag", "adag": "a_dag",
    "A+": "A_plus", "A₊": "A_plus", "A+†": "A_plus_dag", "A₊†": "A_plus_dag",
    "A-": "A_minus", "A₋": "A_minus", "A-†": "A_minus_dag", "A₋†": "A_minus_dag",
}


@dataclass(frozen=True)
class ModeIndex:
    m: int
    n: int = 0

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("mode indices must be non-negative")


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Coefficients c_0..c_{N-1} of a 1D function in the HG basis h_n."""

    h: float
    coeffs: np.ndarray

    def __post_init__(self):
        _check_h(self.h)
        c = _frozen(self.coeffs)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficient vector must be a non-empty 1D array")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, n, h, size=None):
        c = np.zeros(max(size or 0, n + 1), dtype=complex)
        c[n] = 1.0
        return cls(h, c)

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def padded(self, size):
        if size < self.coeffs.size:
            raise ValueError("cannot pad to a smaller size")
        c = np.zeros(size, dtype=complex)
        c[: self.coeffs.size] = self.coeffs
        return CoefficientVector(self.h, c)

    def synthesize(self, x):
        """Field sum_n c_n h_n(x)."""
        hf = hermite_functions(self.coeffs.size - 1, x, self.h)
        return np.tensordot(self.coeffs, hf, axes=(0, 0))

    @classmethod
    def project(cls, values, x, h, size):
        """Trapezoid projection of sampled ``values`` on ``x`` onto h_0..h_{size-1}."""
        hf = hermite_functions(size - 1, x, h)
        return cls(h, hf @ (_trapezoid_weights(x) * np.asarray(values)))


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Coefficients c_mn of a 2D function in the HG basis h_mn = h_m x h_n."""

    h: float
    coeffs: np.ndarray

    def __post_init__(self):
        _check_h(self.h)
        c = _frozen(self.coeffs)
        if c.ndim != 2 or c.size == 0:
            raise ValueError("coefficient matrix must be a non-empty 2D array")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, m, n, h, shape=None):
        rows, cols = shape or (m + 1, n + 1)
        c = np.zeros((max(rows, m + 1), max(cols, n + 1)), dtype=complex)
        c[m, n] = 1.0
        return cls(h, c)

    @classmethod
    def outer(cls, f, g):
        """Coefficients of f(x) * conj(g(y))."""
        _same_h(f, g)
        return cls(f.h, np.outer(f.coeffs, np.conj(g.coeffs)))

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def synthesize(self, x, y):
        """Field sum_mn c_mn h_m(x) h_n(y) on the tensor grid ``x`` by ``y``."""
        rows, cols = self.coeffs.shape
        hx = hermite_functions(rows - 1, x, self.h)
        hy = hermite_functions(cols - 1, y, self.h)
        return hx.T @ self.coeffs @ hy

    @classmethod
    def project(cls, values, x, y, h, shape):
        hx = hermite_functions(shape[0] - 1, x, h)
        hy = hermite_functions(shape[1] - 1, y, h)
        wx = _trapezoid_weights(x)
        wy = _trapezoid_weights(y)
        return cls(h, (hx * wx) @ np.asarray(values) @ (hy * wy).T)


def _trapezoid_weights(x):
    w = np.full(len(x), x[1] - x[0])
    w[[0, -1]] *= 0.5
    return w


def _same_h(a, b):
    if a.h != b.h:
        raise ValueError(f"coefficient containers carry different h ({a.h} vs {b.h})")


def default_extent(h, n_max):
    """Half-width of the quadrature box that holds modes up to ``n_max``."""
    return 6.0 * math.sqrt(h * (2 * n_max + 1))


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------

def hg_mode_2d(idx, x, y, h):
    """h_mn(x, y) = h_m(x) h_n(y), evaluated pointwise (broadcasting)."""
    if not isinstance(idx, ModeIndex):
        idx = ModeIndex(*idx)
    hx = hermite_functions(idx.m, x, h)[idx.m]
    hy = hermite_functions(idx.n, y, h)[idx.n]
    out = hx * hy
    return float(out) if np.ndim(out) == 0 else out


def _log_fact(n):
    return math.lgamma(n + 1)


def lg_mode(j, k, x, y, h):
    """Laguerre-Gaussian mode (j, k) at points (x, y), with z = x + i y.

    For ``j >= k``::

        (pi h)^(-1/2) (k!/j!)^(1/2) (-1)^k (z/sqrt h)^(j-k) e^(-|z|^2/2h) L_k^(j-k)(|z|^2/h)

    and the conjugate-variable form with roles swapped for ``j <= k``.
    """
    if j < 0 or k < 0:
        raise ValueError("mode indices must be non-negative")
    _check_h(h)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho = (x * x + y * y) / h
    envelope = (math.pi * h) ** -0.5 * np.exp(-0.5 * rho)
    sq = math.sqrt(h)
    if j >= k:
        lo, d, w = k, j - k, (x + 1j * y) / sq
    else:
        lo, d, w = j, k - j, (x - 1j * y) / sq
    pref = math.exp(0.5 * (_log_fact(lo) - _log_fact(lo + d))) * (-1) ** lo
    out = pref * w ** d * envelope * laguerre_polynomial(lo, d, rho)
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Ladder actions
# ---------------------------------------------------------------------------

def _raise(c, axis):
    shape = list(c.shape)
    shape[axis] += 1
    out = np.zeros(shape, dtype=complex)
    n = c.shape[axis]
    f = np.sqrt(np.arange(1, n + 1, dtype=float))
    idx = [slice(None)] * c.ndim
    idx[axis] = slice(1, n + 1)
    fshape = [1] * c.ndim
    fshape[axis] = n
    out[tuple(idx)] = c * f.reshape(fshape)
    return out


def _lower(c, axis):
    out = np.zeros_like(c, dtype=complex)
    n = c.shape[axis]
    if n == 1:
        return out
    f = np.sqrt(np.arange(1, n, dtype=float))
    src = [slice(None)] * c.ndim
    src[axis] = slice(1, n)
    dst = [slice(None)] * c.ndim
    dst[axis] = slice(0, n - 1)
    fshape = [1] * c.ndim
    fshape[axis] = n - 1
    out[tuple(dst)] = c[tuple(src)] * f.reshape(fshape)
    return out


def _pad_to(c, shape):
    out = np.zeros(shape, dtype=complex)
    out[tuple(slice(0, s) for s in c.shape)] = c
    return out


def ladder_apply(kind, c):
    """Apply a creation/annihilation operator exactly in coefficient space.

    1D kinds ``a``, ``a_dag`` act on :class:`CoefficientVector`; the
    Cartesian ``a1*``/``a2*`` and LG kinds ``A_plus*``/``A_minus*`` act on
    :class:`CoefficientMatrix`, with

    ``A_plus^dag = (a1^dag + i a2^dag)/sqrt2``, ``A_minus^dag = (a1^dag - i a2^dag)/sqrt2``,
    ``A_plus = (a1 - i a2)/sqrt2``, ``A_minus = (a1 + i a2)/sqrt2``.

    Creation operators grow the container by one along each index they touch.
    """
    kind = _ALIASES.get(kind, kind)
    if kind in ONE_D_KINDS:
        if not isinstance(c, CoefficientVector):
            raise TypeError(f"operator {kind!r} acts on CoefficientVector")
        out = _raise(c.coeffs, 0) if kind == "a_dag" else _lower(c.coeffs, 0)
        return CoefficientVector(c.h, out)
    if kind not in TWO_D_KINDS:
        raise ValueError(f"unknown ladder operator {kind!r}")
    if not isinstance(c, CoefficientMatrix):
        raise TypeError(f"operator {kind!r} acts on CoefficientMatrix")
    m = c.coeffs
    if kind == "a1_dag":
        return CoefficientMatrix(c.h, _raise(m, 0))
    if kind == "a2_dag":
        return CoefficientMatrix(c.h, _raise(m, 1))
    if kind == "a1":
        return CoefficientMatrix(c.h, _lower(m, 0))
    if kind == "a2":
        return CoefficientMatrix(c.h, _lower(m, 1))
    s = 1.0 / math.sqrt(2.0)
    if kind.endswith("_dag"):
        shape = (m.shape[0] + 1, m.shape[1] + 1)
        first = _pad_to(_raise(m, 0), shape)
        second = _pad_to(_raise(m, 1), shape)
        sign = 1.0 if kind == "A_plus_dag" else -1.0
    else:
        first, second = _lower(m, 0), _lower(m, 1)
        sign = -1.0 if kind == "A_plus" else 1.0
    return CoefficientMatrix(c.h, s * (first + sign * 1j * second))

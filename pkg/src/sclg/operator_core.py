"""The cubic ladder operator T = a^dag + a - a^dag a^dag a - a^dag a a as a Jacobi
matrix, its scaled propagator, the pullback action on LG modes, and the
eight SU(3) generators on the 2D HG basis.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .grid import SampledGrid
from .modes import CoefficientMatrix, CoefficientVector
from .wigner import wigner_extended

DEFAULT_TRUNCATION = 64
TRUNCATION_MARGIN = 16


def beta(n):
    """Off-diagonal Jacobi entry beta_n = (1 - n) sqrt(n + 1)."""
    if n < 0:
        raise ValueError("index must be non-negative")
    return (1 - n) * math.sqrt(n + 1)


@dataclass(frozen=True, eq=False)
class JacobiOperator:
    """Truncation of T to h_0..h_{N-1}: zero diagonal, off-diagonals beta_n."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")

    @property
    def off_diagonal(self):
        n = np.arange(self.dimension - 1)
        return (1 - n) * np.sqrt(n + 1.0)

    def matrix(self):
        b = self.off_diagonal
        return np.diag(b, 1) + np.diag(b, -1)

    def blocks(self):
        """Index ranges of the blocks separated by exactly-zero off-diagonals."""
        b = self.off_diagonal
        cuts = [0] + [i + 1 for i in np.flatnonzero(b == 0.0)] + [self.dimension]
        return [(lo, hi) for lo, hi in zip(cuts[:-1], cuts[1:]) if hi > lo]


def apply_T(c):
    """T h_n = beta_n h_{n+1} + beta_{n-1} h_{n-1}; the result is one entry longer."""
    src = c.coeffs
    out = np.zeros(src.size + 1, dtype=complex)
    for n, cn in enumerate(src):
        if cn == 0:
            continue
        out[n + 1] += beta(n) * cn
        if n > 0:
            out[n - 1] += beta(n - 1) * cn
    return CoefficientVector(c.h, out)


def apply_T_tensor(F):
    """(T x T) on a coefficient matrix: T on the first index, conj-T on the second.

    T is real, so the second factor is T as well.
    """
    c = F.coeffs
    rows, cols = c.shape
    tr = JacobiOperator(rows + 1).matrix()[:, :rows]
    tc = JacobiOperator(cols + 1).matrix()[:, :cols]
    return CoefficientMatrix(F.h, tr @ c @ tc.T)


def _support(c):
    nz = np.flatnonzero(c.coeffs)
    return int(nz[-1]) + 1 if nz.size else 0


def propagate(c, t, h, N=DEFAULT_TRUNCATION):
    """U_t c with U_t = exp(-i t Tfrak / h) = exp(+i t (h/2)^(1/2) T).

    The truncated Jacobi matrix splits exactly into blocks wherever an
    off-diagonal vanishes (beta_1 = 0); each block is diagonalized
    separately, so {h_0, h_1} never mixes with the rest.

    Notes
    -----
    States with support beyond h_1 evolve under the truncation, which is
    one particular choice of self-adjoint dynamics for T.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if c.h != h:
        raise ValueError(f"coefficient h={c.h} does not match requested h={h}")
    support = _support(c)
    # a vector of length exactly N already lives in the truncated space
    in_space = c.coeffs.size == N
    if support > 2 and N < support + TRUNCATION_MARGIN and not in_space:
        raise ValueError(f"truncation N={N} too small for support {support} (+{TRUNCATION_MARGIN})")
    if N < max(support, 2):
        raise ValueError(f"truncation N={N} smaller than support {support}")
    vec = c.padded(max(N, c.coeffs.size)).coeffs[:N].copy()
    if t == 0:
        return CoefficientVector(h, vec)
    op = JacobiOperator(N)
    b = op.off_diagonal
    omega = t * math.sqrt(h / 2.0)
    out = np.zeros(N, dtype=complex)
    for lo, hi in op.blocks():
        block = vec[lo:hi]
        if not np.any(block):
            continue
        if hi - lo == 1:
            out[lo] = block[0]
            continue
        w, V = eigh_tridiagonal(np.zeros(hi - lo), b[lo:hi - 1])
        out[lo:hi] = V @ (np.exp(1j * omega * w) * (V.T @ block))
    return CoefficientVector(h, out)


def evolved_coefficients(m, n, t, h, N=DEFAULT_TRUNCATION):
    """Coefficient matrix of U_t h_m (x) conj(U_t h_n)."""
    um = propagate(CoefficientVector.basis(m, h), t, h, N)
    un = propagate(CoefficientVector.basis(n, h), t, h, N)
    return CoefficientMatrix.outer(um, un)


def _trim(F, tol=0.0):
    c = F.coeffs
    mask = np.abs(c) > tol
    if not mask.any():
        return CoefficientMatrix(F.h, c[:1, :1])
    rows = int(np.flatnonzero(mask.any(axis=1))[-1]) + 1
    cols = int(np.flatnonzero(mask.any(axis=0))[-1]) + 1
    return CoefficientMatrix(F.h, c[:rows, :cols])


def evolved_lg_field(m, n, t, h, x_axis, y_axis, N=DEFAULT_TRUNCATION):
    """Extended Wigner transform of U_t h_m (x) conj(U_t h_n) on a grid."""
    F = _trim(evolved_coefficients(m, n, t, h, N))
    grid = wigner_extended(F, x_axis, y_axis)
    return SampledGrid(h, x_axis, y_axis, grid.values, quantity="evolved_lg", time=float(t),
                       extra={"modes": [int(m), int(n)]})


BINARY_MODES = ((0, 0), (1, 1), (1, 0), (0, 1))


def binary_action_table(h=1.0):
    """Images of the four binary HG modes under T x T.

    Returns a mapping ``(m, n) -> (m', n')``; raises if any image is not
    exactly a single basis mode with unit coefficient.
    """
    table = {}
    for m, n in BINARY_MODES:
        image = apply_T_tensor(CoefficientMatrix.basis(m, n, h, shape=(2, 2))).coeffs
        nz = list(zip(*np.nonzero(image)))
        if len(nz) != 1 or image[nz[0]] != 1.0:
            raise AssertionError(f"T x T h_{m}{n} is not a basis mode: {image}")
        table[(m, n)] = (int(nz[0][0]), int(nz[0][1]))
    return table


# ---------------------------------------------------------------------------
# SU(3) generators
# ---------------------------------------------------------------------------

def basis_2d(cutoff):
    """2D HG labels of total order <= cutoff, by total order then ascending m."""
    return [(m, total - m) for total in range(cutoff + 1) for m in range(total + 1)]


# each generator is a list of (coefficient, word); a word is applied right to left
_X_UP, _X_DN, _Y_UP, _Y_DN = "x+", "x-", "y+", "y-"


def _cubic_terms(up, dn, oup, odn, phase):
    # phase 1: (a^dag + a - a^dag a^dag a - a^dag a a - a^dag b^dag b - a b^dag b) / 2
    # phase -i: -(i/2)(a^dag - a - a^dag a^dag a + a^dag a a - a^dag b^dag b + a b^dag b)
    if phase == 1:
        signs = (1, 1, -1, -1, -1, -1)
        pref = 0.5
    else:
        signs = (1, -1, -1, 1, -1, 1)
        pref = -0.5j
    words = ((up,), (dn,), (up, up, dn), (up, dn, dn), (up, oup, odn), (dn, oup, odn))
    return [(pref * s, w) for s, w in zip(signs, words)]


_GENERATORS = {
    1: [(0.5, (_X_UP, _Y_DN)), (0.5, (_Y_UP, _X_DN))],
    2: [(-0.5j, (_X_UP, _Y_DN)), (0.5j, (_Y_UP, _X_DN))],
    3: [(0.5, (_X_UP, _X_DN)), (-0.5, (_Y_UP, _Y_DN))],
    4: _cubic_terms(_X_UP, _X_DN, _Y_UP, _Y_DN, 1),
    5: _cubic_terms(_X_UP, _X_DN, _Y_UP, _Y_DN, -1j),
    6: _cubic_terms(_Y_UP, _Y_DN, _X_UP, _X_DN, 1),
    7: _cubic_terms(_Y_UP, _Y_DN, _X_UP, _X_DN, -1j),
    8: [(-1.0 / math.sqrt(3.0), ()), (math.sqrt(3.0) / 2.0, (_X_UP, _X_DN)),
        (math.sqrt(3.0) / 2.0, (_Y_UP, _Y_DN))],
}


def _apply_word(word, state):
    """Apply a ladder word (rightmost first) to a dict {(m, n): amplitude}."""
    for op in reversed(word):
        nxt = {}
        for (m, n), amp in state.items():
            if op == _X_UP:
                key, f = (m + 1, n), math.sqrt(m + 1)
            elif op == _X_DN:
                if m == 0:
                    continue
                key, f = (m - 1, n), math.sqrt(m)
            elif op == _Y_UP:
                key, f = (m, n + 1), math.sqrt(n + 1)
            else:
                if n == 0:
                    continue
                key, f = (m, n - 1), math.sqrt(n)
            nxt[key] = nxt.get(key, 0.0) + amp * f
        state = nxt
    return state


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    label: int
    cutoff: int
    matrix: np.ndarray

    @property
    def labels(self):
        return basis_2d(self.cutoff)


def su3_generator(a, cutoff):
    """Matrix of generator T_a on HG modes of total order <= cutoff.

    Images are accumulated on the enlarged basis (order <= cutoff + 3)
    before restriction to the requested block.
    """
    if a not in _GENERATORS:
        raise ValueError("generator label must be in 1..8")
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    labels = basis_2d(cutoff + 3)
    index = {lab: i for i, lab in enumerate(labels)}
    size = len(basis_2d(cutoff))
    big = np.zeros((len(labels), size), dtype=complex)
    for col, lab in enumerate(labels[:size]):
        for coef, word in _GENERATORS[a]:
            for key, amp in _apply_word(word, {lab: 1.0}).items():
                big[index[key], col] += coef * amp
    return GeneratorMatrix(a, cutoff, big[:size, :size])


def _structure_table():
    base = {
        (1, 2, 3): 1.0,
        (1, 4, 7): 0.5, (1, 6, 5): 0.5, (2, 4, 6): 0.5, (2, 5, 7): 0.5,
        (3, 4, 5): 0.5, (3, 7, 6): 0.5,
        (4, 5, 8): math.sqrt(3.0) / 2.0, (6, 7, 8): math.sqrt(3.0) / 2.0,
    }
    f = np.zeros((9, 9, 9))
    for (i, j, k), v in base.items():
        for perm in itertools.permutations((0, 1, 2)):
            idx = tuple((i, j, k)[p] for p in perm)
            parity = _perm_sign(perm)
            f[idx] = parity * v
    return f


def _perm_sign(perm):
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


STRUCTURE_CONSTANTS = _structure_table()

#: Labels spanning the projection subspace {|0,0>, |1,0>, |0,1>}.
LOW_MODES = ((0, 0), (1, 0), (0, 1))


def su3_commutator_residual(a, b, cutoff=4):
    """Norm of P([T_a, T_b] - i sum_c f_abc T_c)P on span{|0,0>, |1,0>, |0,1>}."""
    if cutoff < 4:
        raise ValueError("cutoff must be at least 4")
    mats = {c: su3_generator(c, cutoff).matrix for c in range(1, 9)}
    comm = mats[a] @ mats[b] - mats[b] @ mats[a]
    for c in range(1, 9):
        if STRUCTURE_CONSTANTS[a, b, c] != 0.0:
            comm = comm - 1j * STRUCTURE_CONSTANTS[a, b, c] * mats[c]
    labels = basis_2d(cutoff)
    keep = [labels.index(lab) for lab in LOW_MODES]
    return float(np.linalg.norm(comm[np.ix_(keep, keep)], 2))

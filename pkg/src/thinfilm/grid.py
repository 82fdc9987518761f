"""Discrete calculus on the strip grid.

The grid covers ``[-1, 1] x T`` with spacing ``h = 1/n``: ``n1 = 2n + 1``
columns ``x1 = -1 + i h`` (both Dirichlet edges included) and ``n2 = n``
periodic rows ``x2 = j h``. Fields are numpy arrays of shape ``(n1, n2)`` for
scalars or ``(n1, n2, k)`` for k-vectors, x2 varying fastest.

``d1h`` is the centred difference with spacing 2h in the interior and the
half one-sided difference on the edge columns, so that

    <d1h f, g>_h + <f, d1h g>_h = h sum_{x1=1} f g - h sum_{x1=-1} f g

holds exactly, and ``d2h`` is the periodic centred difference, which is
skew-adjoint. All operators are pure and return fresh arrays.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DomainError, ValidationError

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class GridSpec:
    """Node layout of the discrete strip for ``n`` points per unit length."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"grid: n must be a positive integer, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n1(self) -> int:
        return 2 * self.n + 1

    @property
    def n2(self) -> int:
        return self.n

    @property
    def shape(self) -> tuple:
        return (self.n1, self.n2)

    @cached_property
    def x1(self) -> np.ndarray:
        return -1.0 + np.arange(self.n1) * self.h

    @cached_property
    def x2(self) -> np.ndarray:
        return np.arange(self.n2) * self.h

    def coords(self):
        """Return ``(X1, X2)`` arrays of shape ``(n1, n2)``."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def check(self, f, name="field"):
        f = np.asarray(f)
        if f.shape[:2] != self.shape:
            raise ValueError(f"{name}: shape {f.shape} does not match grid {self.shape}")
        return f


def d1h(f, grid):
    """Centred x1-difference with the half one-sided rule on the edge columns."""
    return kernels.d1h(grid.check(f), grid.h)


def d2h(f, grid):
    """Periodic centred x2-difference."""
    return kernels.d2h(grid.check(f), grid.h)


def grad_h(f, grid):
    """Stack ``(d1h f, d2h f)`` on a new last axis."""
    return np.stack([d1h(f, grid), d2h(f, grid)], axis=-1)


def div_h(p, grid):
    """``d1h p1 + d2h p2`` for a planar field ``p`` of shape (n1, n2, 2)."""
    p = grid.check(p)
    return d1h(p[..., 0], grid) + d2h(p[..., 1], grid)


def laplacian_h(f, grid):
    """Wide-stencil Laplacian ``d1h d1h + d2h d2h``."""
    return kernels.laplacian_h(grid.check(f), grid.h)


def inner_h(f, g, grid):
    """h^2-weighted sum of pointwise products over all grid nodes."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"inner_h: shape mismatch {f.shape} vs {g.shape}")
    grid.check(f)
    return grid.h ** 2 * float(np.sum(f * g))


def norm_h(f, grid):
    return np.sqrt(inner_h(f, f, grid))


def boundary_flux_h(f, g, grid):
    """The edge term ``h sum_{x1=1} f g - h sum_{x1=-1} f g``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    return grid.h * (float(np.sum(f[-1] * g[-1])) - float(np.sum(f[0] * g[0])))


def sample_Sh(f, grid):
    """Sample a function onto the grid by cell averages.

    ``f`` is either a callable ``f(x1, x2)`` (vectorised, returning an array
    with optional trailing component axis) or an array on a finer grid with
    ``n_fine = r * n``. Node ``x`` receives the average over the cell
    ``[x1, x1+h) x [x2, x2+h)``; the edge column ``x1 = 1`` receives the point
    value. Callables are averaged with 4x4 Gauss-Legendre per cell, fine-grid
    arrays by exact averaging of their r x r nodes.
    """
    if callable(f):
        return _sample_callable(f, grid)
    return _sample_fine(np.asarray(f, dtype=float), grid)


def _sample_callable(f, grid):
    h = grid.h
    X1, X2 = grid.coords()
    q = 0.5 * (_GAUSS_X + 1.0) * h
    w = 0.5 * _GAUSS_W
    acc = None
    for a, wa in zip(q, w):
        for b, wb in zip(q, w):
            val = np.asarray(f(X1[:-1] + a, X2[:-1] + b), dtype=float) * (wa * wb)
            acc = val if acc is None else acc + val
    last = np.asarray(f(X1[-1:], X2[-1:]), dtype=float)
    return np.concatenate([acc, last], axis=0)


def _sample_fine(f, grid):
    n1f, n2f = f.shape[:2]
    r = n2f // grid.n2
    if r * grid.n2 != n2f or (n1f - 1) != r * (grid.n1 - 1):
        raise ValueError(f"sample_Sh: fine array shape {f.shape[:2]} is not a refinement of {grid.shape}")
    tail = f.shape[2:]
    body = f[:-1].reshape((grid.n1 - 1, r, grid.n2, r) + tail).mean(axis=(1, 3))
    last = f[-1:, ::r]
    return np.concatenate([body, last], axis=0)


def interpolate_Ih(f, grid):
    """Return the continuous piecewise-bilinear interpolant of a grid field.

    On the cell with lower-left node ``y`` the interpolant is
    ``f(y) + D1 f(y)(x1-y1) + D2 f(y)(x2-y2) + D1 D2 f(y)(x1-y1)(x2-y2)`` with
    forward differences ``D``; the x1 slope is zero on the edge column
    ``y1 = 1`` (whose cell meets the closed strip only in the line x1 = 1).
    The returned callable accepts broadcastable ``x1, x2`` and raises
    :class:`DomainError` when ``|x1| > 1``; ``x2`` is taken modulo 1.
    """
    f = np.array(grid.check(f), dtype=float)
    h = grid.h
    n1, n2 = grid.shape
    fj = np.roll(f, -1, axis=1)
    s2 = (fj - f) / h
    s1 = np.zeros_like(f)
    s1[:-1] = (f[1:] - f[:-1]) / h
    s12 = np.zeros_like(f)
    s12[:-1] = (s2[1:] - s2[:-1]) / h

    def evaluate(x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        x1, x2 = np.broadcast_arrays(x1, x2)
        if np.any(np.abs(x1) > 1.0 + 1e-12):
            raise DomainError("interpolate_Ih: evaluation point outside -1 <= x1 <= 1")
        t1 = (np.clip(x1, -1.0, 1.0) + 1.0) / h
        i = np.clip(np.floor(t1 + 1e-12).astype(int), 0, n1 - 1)
        x2m = np.mod(x2, 1.0)
        jf = np.floor(x2m / h + 1e-12)
        j = jf.astype(int) % n2
        r1 = np.maximum(t1 - i, 0.0) * h
        r1 = np.where(i == n1 - 1, 0.0, r1)
        r2 = np.maximum(x2m - jf * h, 0.0)
        if f.ndim == 3:
            r1 = r1[..., None]
            r2 = r2[..., None]
        return f[i, j] + s1[i, j] * r1 + s2[i, j] * r2 + s12[i, j] * r1 * r2

    return evaluate


def normalize(m, grid=None, keep_boundary=True):
    """Pointwise m/|m|; edge columns are returned untouched when asked."""
    m = np.asarray(m, dtype=float)
    out = m / np.linalg.norm(m, axis=-1, keepdims=True)
    if keep_boundary:
        out[0] = m[0]
        out[-1] = m[-1]
    return out


def max_norm_deviation(m):
    return float(np.max(np.abs(np.linalg.norm(m, axis=-1) - 1.0)))

"""Functional calculus of the Dirichlet/periodic Laplacian on the strip grid.

Powers ``(-Delta)^s`` are realised in the eigenbasis of the compact 3-point
Laplacian on the interior nodes: a sine series (DST-I) in x1 with zero values
on the two edge columns, and a Fourier series in x2. The eigenvalues are

    lam(k, q) = (4/h^2) sin^2(k pi h / 4) + (4/h^2) sin^2(pi q h)

for k = 1 .. n1-2 and q = 0 .. n2-1. Edge-column values of any input are
ignored (the Dirichlet trace is zero), and every output vanishes there.
Because outputs vanish on the edges, ``-grad_h`` is the exact ``<.,.>_h``
adjoint of ``div_h`` on them, which makes ``nonlocal_P`` the exact gradient of
``0.5 * hminus_half_sq(div_h m')``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ValidationError
from .grid import GridSpec, div_h, grad_h, inner_h


@dataclass(frozen=True, eq=False)
class SpectralWorkspace:
    """Eigenvalue tables for one grid; immutable apart from a multiplier cache."""

    grid: GridSpec
    lam1: np.ndarray
    lam2: np.ndarray
    eigenvalues: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def forward(self, f):
        """Orthonormal coefficients of the interior part of ``f``."""
        f = np.asarray(f, dtype=float)
        c = sfft.dst(f[1:-1], type=1, axis=0, norm="ortho")
        return sfft.fft(c, axis=1, norm="ortho")

    def inverse(self, c):
        """Inverse of :meth:`forward`, embedded with zero edge columns."""
        g = sfft.ifft(c, axis=1, norm="ortho").real
        g = sfft.idst(g, type=1, axis=0, norm="ortho")
        out = np.zeros((g.shape[0] + 2,) + g.shape[1:])
        out[1:-1] = g
        return out

    def power(self, s):
        key = float(s)
        mult = self._cache.get(key)
        if mult is None:
            mult = self.eigenvalues ** key
            self._cache[key] = mult
        return mult

    def apply_multiplier(self, mult, f):
        """Multiply the coefficients of ``f`` by ``mult`` (shape (n1-2, n2))."""
        f = np.asarray(f, dtype=float)
        c = self.forward(f)
        m = mult if f.ndim == 2 else mult.reshape(mult.shape + (1,) * (f.ndim - 2))
        return self.inverse(c * m)


def build_workspace(grid):
    """Precompute the eigenvalue table for ``grid`` (requires n >= 4)."""
    if grid.n < 4:
        raise ValidationError(f"spectral workspace needs n >= 4, got n={grid.n}")
    h = grid.h
    k = np.arange(1, grid.n1 - 1)
    q = np.arange(grid.n2)
    lam1 = 4.0 / h**2 * np.sin(k * np.pi * h / 4.0) ** 2
    lam2 = 4.0 / h**2 * np.sin(np.pi * q * h) ** 2
    eig = lam1[:, None] + lam2[None, :]
    for a in (lam1, lam2, eig):
        a.setflags(write=False)
    return SpectralWorkspace(grid, lam1, lam2, eig)


def apply_fractional(ws, s, f):
    """Apply ``(-Delta)^s`` to the interior part of ``f``.

    ``s = -1`` is the Dirichlet inverse Laplacian, ``s = -1/2`` is
    ``|grad|^{-1}`` and ``s = -1/4`` is ``|grad|^{-1/2}``.
    """
    return ws.apply_multiplier(ws.power(s), f)


def nonlocal_P(ws, mp):
    """``-grad_h |grad|^{-1} div_h m'`` for a planar field ``mp`` (n1, n2, 2)."""
    q = div_h(mp, ws.grid)
    phi = apply_fractional(ws, -0.5, q)
    return -grad_h(phi, ws.grid)


def hminus_half_sq(ws, q):
    """``|| |grad|^{-1/2} q ||_h^2`` for a scalar field (edge values ignored)."""
    phi = apply_fractional(ws, -0.5, q)
    return inner_h(q, phi, ws.grid)

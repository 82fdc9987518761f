"""Néel walls: construction, relaxation and concentration diagnostics.

One-dimensional profiles live on ``[-1, 1]`` with ``2n + 1`` nodes and are
parametrized by the in-plane angle ``phi``, ``m = (cos phi, sin phi)``. The
boundary directions are ``m_{-inf} = (m1inf, -sqrt(1 - m1inf^2))`` and
``m_{+inf} = (m1inf, +sqrt(1 - m1inf^2))``, i.e. ``phi = -/+ arccos(m1inf)``.

The 1D wall energy is

    E(m) = sum_i |m_{i+1} - m_i|^2 / h + (1/(2 delta)) h <f, L^{1/2} f>,
    f = m1 - m1inf,

with ``L`` the compact Dirichlet Laplacian on the interior nodes.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft
from scipy.optimize import minimize

from .energy import energy, energy_density, energy_grad
from .errors import NoWallError, ResolutionError, ValidationError
from .grid import GridSpec

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 1D profiles

@dataclass(frozen=True)
class WallProfile1D:
    """In-plane profile on ``[-1, 1]``; ``values`` has shape ``(2n+1, 2)``."""

    n: int
    values: np.ndarray
    m1inf: float
    energy: Optional[float] = None
    iterations: int = 0
    converged: Optional[bool] = None

    @property
    def x(self):
        return -1.0 + np.arange(2 * self.n + 1) / self.n

    @property
    def phi(self):
        return np.arctan2(self.values[:, 1], self.values[:, 0])


@dataclass(frozen=True)
class Workspace1D:
    n: int
    h: float
    lam: np.ndarray

    def dst(self, f):
        return sfft.dst(f, type=1, norm="ortho")


def build_workspace_1d(n):
    if n < 2:
        raise ValidationError(f"1D workspace needs n >= 2, got {n}")
    h = 1.0 / n
    k = np.arange(1, 2 * n)
    lam = 4.0 / h**2 * np.sin(k * np.pi * h / 4.0) ** 2
    lam.setflags(write=False)
    return Workspace1D(n, h, lam)


def _check_delta(delta):
    if not 0.0 < delta < 0.5:
        raise ValidationError(f"delta={delta!r} violates 0 < delta < 1/2")


def _check_m1inf(m1inf):
    if not 0.0 <= m1inf < 1.0:
        raise ValidationError(f"m1inf={m1inf!r} violates 0 <= m1inf < 1")


def _profile_from_phi(phi, n, m1inf, **meta):
    values = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    # exact endpoint values
    values[0] = (m1inf, -math.sqrt(1.0 - m1inf**2))
    values[-1] = (m1inf, math.sqrt(1.0 - m1inf**2))
    return WallProfile1D(n, values, m1inf, **meta)


def neel_ansatz(delta, m1inf, n, center=0.0):
    """Two-scale initial profile.

    The phase is ``phi = arccos(m1inf) * g(x)`` with
    ``g = sign(x-c) (tanh(|x-c|/delta) + log(1+|x-c|/delta)/log(1+1/delta)) / 2``,
    rescaled on each side so that ``g(-1) = -1`` and ``g(1) = 1``: a tanh core
    of width ``delta`` plus a logarithmic tail.
    """
    _check_delta(delta)
    _check_m1inf(m1inf)
    x = -1.0 + np.arange(2 * n + 1) / n
    s = np.abs(x - center)
    ln = math.log1p(1.0 / delta)

    def G(r):
        return 0.5 * np.tanh(r / delta) + 0.5 * np.log1p(r / delta) / ln

    g = np.where(x >= center, G(s) / G(1.0 - center), -G(s) / G(1.0 + center))
    return _profile_from_phi(math.acos(m1inf) * g, n, m1inf)


def tanh_profile(width, m1inf, n, center=0.0):
    """Smoothed step ``phi = arccos(m1inf) * tanh((x-c)/width)``, rescaled to hit the ends."""
    _check_m1inf(m1inf)
    x = -1.0 + np.arange(2 * n + 1) / n
    t = np.tanh((x - center) / width)
    g = np.where(x >= center, t / math.tanh((1.0 - center) / width), t / math.tanh((1.0 + center) / width))
    return _profile_from_phi(math.acos(m1inf) * g, n, m1inf)


def _phi_energy_grad(phi, delta, m1inf, ws):
    h = ws.h
    dphi = np.diff(phi)
    exch = 2.0 * float(np.sum(1.0 - np.cos(dphi))) / h
    f = np.cos(phi[1:-1]) - m1inf
    c = ws.dst(f)
    rl = np.sqrt(ws.lam)
    nonloc = h * float(np.sum(rl * c * c)) / (2.0 * delta)
    Lf = ws.dst(rl * c)
    s = np.sin(dphi)
    g = 2.0 * (s[:-1] - s[1:]) / h - h / delta * Lf * np.sin(phi[1:-1])
    return exch + nonloc, g


def wall_energy_1d(profile, delta, ws=None):
    """1D wall energy per unit length of ``profile``."""
    ws = ws or build_workspace_1d(profile.n)
    return _phi_energy_grad(profile.phi, delta, profile.m1inf, ws)[0]


def _lbfgs(fun, y0, tol, max_iter):
    """L-BFGS with a Wolfe line search, so accepted energies never increase."""
    res = minimize(fun, y0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-12, "maxcor": 20})
    # a line-search stall at the rounding floor still leaves an admissible minimizer
    converged = bool(res.success) or "ABNORMAL" in str(res.message)
    return res, converged


def relax_profile(profile, delta, ws=None, tol=1e-13, max_iter=5000, shift=1.0):
    """Minimize the 1D wall energy from ``profile``.

    L-BFGS in the interior angles after the change of variables
    ``phi = M^{-1/2} y``, where ``M`` is the sine-basis multiplier
    ``h (2 lam + lam^{1/2}/delta + shift)`` approximating the Hessian. The
    Wolfe line search keeps the energy monotone. ``tol`` is the relative
    energy decrease below which iteration stops. The returned profile carries
    ``energy``, ``iterations`` and ``converged``.
    """
    _check_delta(delta)
    ws = ws or build_workspace_1d(profile.n)
    if ws.n != profile.n:
        raise ValidationError("relax_profile: workspace and profile resolutions differ")
    phi0 = profile.phi.copy()
    isq = 1.0 / np.sqrt(ws.h * (2.0 * ws.lam + np.sqrt(ws.lam) / delta + shift))

    def to_phi(y):
        phi = phi0.copy()
        phi[1:-1] = ws.dst(ws.dst(y) * isq)
        return phi

    def fun(y):
        E, g = _phi_energy_grad(to_phi(y), delta, profile.m1inf, ws)
        return E, ws.dst(ws.dst(g) * isq)

    y0 = ws.dst(ws.dst(phi0[1:-1]) / isq)
    E0 = fun(y0)[0]
    res, converged = _lbfgs(fun, y0, tol, max_iter)
    phi, E = to_phi(res.x), float(res.fun)
    if E > E0:  # never hand back a worse profile
        phi, E = phi0, E0
    if not converged:
        log.warning("relax_profile: %s after %d iterations (E=%.12g)", res.message, res.nit, E)
    return _profile_from_phi(phi, profile.n, profile.m1inf, energy=E, iterations=int(res.nit),
                             converged=converged)


def profile_density(profile, delta, ws=None):
    """Rescaled 1D energy density of ``profile`` (one value per node).

    Each exchange difference is split evenly between its two nodes and the
    nonlocal term is localized as ``(L^{1/4} f)^2 / (2 delta)``, so that
    ``h * sum`` equals ``(2/pi) delta |log delta|`` times the 1D energy.
    """
    ws = ws or build_workspace_1d(profile.n)
    h = ws.h
    edge = np.sum(np.diff(profile.values, axis=0) ** 2, axis=-1) / h**2
    dens = np.zeros(2 * profile.n + 1)
    dens[:-1] += 0.5 * edge
    dens[1:] += 0.5 * edge
    f = profile.values[1:-1, 0] - profile.m1inf
    r = ws.dst(ws.lam**0.25 * ws.dst(f))
    dens[1:-1] += r * r / (2.0 * delta)
    return 2.0 / math.pi * delta * abs(math.log(delta)) * dens


def wall_energy_asymptotic(delta, m1inf):
    """``pi (1 - m1inf)^2 / (2 delta |log delta|)``."""
    _check_delta(delta)
    _check_m1inf(m1inf)
    return math.pi * (1.0 - m1inf) ** 2 / (2.0 * delta * abs(math.log(delta)))


# ---------------------------------------------------------------------------
# 2D fields

def straight_wall(x1_star, m1inf, grid):
    """``m_{-inf}`` for ``x1 < x1_star`` and ``m_{+inf}`` for ``x1 >= x1_star``."""
    if not -1.0 <= x1_star <= 1.0:
        raise ValidationError(f"x1_star={x1_star!r} outside [-1, 1]")
    _check_m1inf(m1inf)
    s = math.sqrt(1.0 - m1inf**2)
    m = np.zeros(grid.shape + (3,))
    m[..., 0] = m1inf
    m[..., 1] = np.where(grid.x1 >= x1_star, s, -s)[:, None]
    return m


def extrude(profile, grid):
    """Copy a 1D profile along x2 (requires matching ``n``)."""
    if profile.n != grid.n:
        raise ValidationError(f"extrude: profile n={profile.n} differs from grid n={grid.n}")
    m = np.zeros(grid.shape + (3,))
    m[..., :2] = profile.values[:, None, :]
    return m


@dataclass(frozen=True)
class RelaxInfo:
    energy: float
    iterations: int
    converged: bool


def relax_field(m, p, ws, tol=1e-13, max_iter=5000):
    """Minimize the 2D energy with the edge columns held fixed.

    Interior nodes are written in angles, ``m = (cos t cos f, cos t sin f, sin t)``,
    so the unit-length constraint holds exactly, and L-BFGS runs in the
    preconditioned variables ``f = M_f^{-1/2} y_f``, ``t = M_t^{-1/2} y_t``
    with ``M_f = 2 lam + lam^{1/2}/delta`` and ``M_t = 2 lam + 2/eps^2``.
    Fields with ``|m3|`` close to 1 are outside the chart and are rejected.
    """
    grid = ws.grid
    m = np.array(grid.check(m, "m"), dtype=float)
    if np.max(np.abs(m[1:-1, :, 2])) > 0.999:
        raise ValidationError("relax_field: |m3| too close to 1 for the angle chart")
    lam = ws.eigenvalues
    isq_f = 1.0 / np.sqrt(2.0 * lam + np.sqrt(lam) / p.delta)
    isq_t = 1.0 / np.sqrt(2.0 * lam + 2.0 / p.eps**2)
    f0 = np.arctan2(m[..., 1], m[..., 0])
    t0 = np.arcsin(np.clip(m[..., 2], -1.0, 1.0))
    n_int = (grid.n1 - 2) * grid.n2

    def unpack(y):
        yf = np.zeros(grid.shape)
        yt = np.zeros(grid.shape)
        yf[1:-1] = y[:n_int].reshape(grid.n1 - 2, grid.n2)
        yt[1:-1] = y[n_int:].reshape(grid.n1 - 2, grid.n2)
        f = f0 + ws.apply_multiplier(isq_f, yf)
        t = t0 + ws.apply_multiplier(isq_t, yt)
        return f, t

    def field(f, t):
        out = np.stack([np.cos(t) * np.cos(f), np.cos(t) * np.sin(f), np.sin(t)], axis=-1)
        out[0] = m[0]
        out[-1] = m[-1]
        return out

    def fun(y):
        f, t = unpack(y)
        mm = field(f, t)
        E = energy(mm, p, ws).total
        g = energy_grad(mm, p, ws) * grid.h**2
        gf = -g[..., 0] * mm[..., 1] + g[..., 1] * mm[..., 0]
        gt = (-g[..., 0] * np.cos(f) - g[..., 1] * np.sin(f)) * np.sin(t) + g[..., 2] * np.cos(t)
        gf = ws.apply_multiplier(isq_f, gf)[1:-1].ravel()
        gt = ws.apply_multiplier(isq_t, gt)[1:-1].ravel()
        return E, np.concatenate([gf, gt])

    y0 = np.zeros(2 * n_int)
    E0 = energy(m, p, ws).total
    res, converged = _lbfgs(fun, y0, tol, max_iter)
    E = float(res.fun)
    if E > E0:
        return m, RelaxInfo(E0, int(res.nit), converged)
    out = field(*unpack(res.x))
    if not converged:
        log.warning("relax_field: %s after %d iterations (E=%.12g)", res.message, res.nit, E)
    return out, RelaxInfo(energy(out, p, ws).total, int(res.nit), converged)


# ---------------------------------------------------------------------------
# concentration diagnostics

def _marginal(density, grid):
    """Mass per column; 1D densities (one value per column) are weighted by h."""
    density = np.asarray(density, dtype=float)
    if density.ndim == 1:
        if density.shape[0] != grid.n1:
            raise ValueError(f"density: length {density.shape[0]} does not match n1={grid.n1}")
        return grid.h * density
    density = grid.check(density, "density")
    return grid.h**2 * density.sum(axis=1)


def detect_wall_center(density, grid):
    """Median of the x1-marginal of ``density``.

    When the cumulative mass reaches exactly one half at a column, the result
    is the midpoint between that column and the next column carrying mass;
    otherwise it is the first column where the cumulative mass passes one half.
    """
    mass = _marginal(density, grid)
    total = float(mass.sum())
    if not total > 0.0:
        raise NoWallError("detect_wall_center: density vanishes identically")
    cum = np.cumsum(mass)
    half = 0.5 * total
    i = int(np.searchsorted(cum, half * (1.0 - 1e-12)))
    x1 = grid.x1
    if abs(cum[i] - half) <= 1e-12 * total:
        nxt = np.nonzero(mass[i + 1:] > 1e-14 * total)[0]
        if nxt.size:
            return 0.5 * (x1[i] + x1[i + 1 + nxt[0]])
    return float(x1[i])


def concentration_fraction(density, x1_star, w, grid):
    """Share of the mass within ``|x1 - x1_star| <= w``."""
    if not w > 0:
        raise ValidationError("concentration_fraction: w must be positive")
    mass = _marginal(density, grid)
    total = float(mass.sum())
    if not total > 0.0:
        raise NoWallError("concentration_fraction: density vanishes identically")
    inside = np.abs(grid.x1 - x1_star) <= w + 1e-12
    return float(mass[inside].sum()) / total


@dataclass(frozen=True)
class ConcentrationReport:
    x1_star: float
    rescaled_energy: float
    grid: GridSpec
    density: np.ndarray

    def mass_in_strip(self, w):
        return concentration_fraction(self.density, self.x1_star, w, self.grid)


def concentration_report(m, p, ws):
    dens = energy_density(m, p, ws)
    x1s = detect_wall_center(dens, ws.grid)
    rescaled = p.delta * p.log_delta * energy(m, p, ws).total
    return ConcentrationReport(x1s, rescaled, ws.grid, dens)


def phase_midpoint(m, grid):
    """x1 where the x2-averaged m2 changes sign (linear interpolation)."""
    m2 = np.asarray(m)[..., 1].mean(axis=1)
    idx = np.nonzero(np.diff(np.sign(m2)) != 0)[0]
    if idx.size == 0:
        raise NoWallError("phase_midpoint: m2 has no sign change")
    i = int(idx[0])
    if m2[i + 1] == m2[i]:
        return float(grid.x1[i])
    t = m2[i] / (m2[i] - m2[i + 1])
    return float(grid.x1[i] + t * grid.h)


# ---------------------------------------------------------------------------
# vortex energy law

@dataclass(frozen=True)
class VortexProbeResult:
    eps: np.ndarray
    energy: np.ndarray
    slope: float
    intercept: float

    @staticmethod
    def continuum(eps):
        """Energy of the regularized vortex on the unit disk."""
        return 2.0 * math.pi * abs(math.log(eps)) + 2.0 * math.pi + math.pi / 3.0


def vortex_energy(eps, n):
    """GL energy of ``x_perp / max(|x|, eps)`` on the unit disk.

    Nodes ``-1 + i/n`` in both directions; a cell counts when its centre lies
    in the disk. Per cell, the exchange term averages the squared differences
    over the two parallel edges in each direction, and the potential term
    averages the four corners.
    """
    h = 1.0 / n
    if eps < 4.0 * h:
        raise ResolutionError(f"vortex_probe: eps={eps} below 4h={4 * h}")
    x = -1.0 + np.arange(2 * n + 1) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    r = np.maximum(np.hypot(X, Y), eps)
    u1 = -Y / r
    u2 = X / r
    xc = 0.5 * (x[1:] + x[:-1])
    XC, YC = np.meshgrid(xc, xc, indexing="ij")
    mask = XC**2 + YC**2 <= 1.0
    du1x = np.diff(u1, axis=0)
    du2x = np.diff(u2, axis=0)
    du1y = np.diff(u1, axis=1)
    du2y = np.diff(u2, axis=1)
    ex = du1x**2 + du2x**2
    ey = du1y**2 + du2y**2
    exch = 0.5 * (ex[:, :-1] + ex[:, 1:]) + 0.5 * (ey[:-1, :] + ey[1:, :])
    pot = (1.0 - u1**2 - u2**2) ** 2
    potc = 0.25 * (pot[:-1, :-1] + pot[1:, :-1] + pot[:-1, 1:] + pot[1:, 1:])
    return float(np.sum(exch[mask]) + h * h / eps**2 * np.sum(potc[mask]))


def vortex_probe(eps_list, n):
    """Energies for each ``eps`` and the least-squares slope against ``|log eps|``."""
    eps = np.asarray(sorted(eps_list, reverse=True), dtype=float)
    if np.any(eps <= 0) or np.any(eps > 0.2):
        raise ValidationError("vortex_probe: eps values must lie in (0, 0.2]")
    E = np.array([vortex_energy(e, n) for e in eps])
    if len(eps) >= 2:
        slope, intercept = np.polyfit(np.abs(np.log(eps)), E, 1)
    else:
        slope, intercept = float("nan"), float("nan")
    return VortexProbeResult(eps, E, float(slope), float(intercept))

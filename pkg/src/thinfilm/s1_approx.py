"""Approximation of planar fields by circle-valued ones.

Pipeline: pick a square net of grid lines on which the Ginzburg-Landau
energy of ``m'`` is small (shift selection), minimize the GL energy on every
cell with ``m'`` as Dirichlet data, then project the assembled field onto the
unit circle. Includes the winding number and verifiers for cell minimizers
(modulus bounds and a Pohozaev balance).

Cell energies use the compact 5-point form
``sum_edges |u(y) - u(y')|^2 + (h^2/eps^2) sum_nodes w (1 - |u|^2)^2``
with trapezoid weights ``w``.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .energy import energy
from .errors import DegreeUndefinedError, ProjectionError, ResolutionError, ValidationError
from .grid import d1h, d2h, inner_h

log = logging.getLogger(__name__)

MIN_NODES_PER_SIDE = 8


def gl_density(u, eps, grid):
    """``|grad_h u|^2 + (1 - |u|^2)^2 / eps^2`` with the wide stencils."""
    u = np.asarray(grid.check(u, "u"), dtype=float)
    grad2 = np.sum(d1h(u, grid) ** 2 + d2h(u, grid) ** 2, axis=-1)
    return grad2 + (1.0 - np.sum(u * u, axis=-1)) ** 2 / eps**2


# ---------------------------------------------------------------------------
# shifted net

@dataclass(frozen=True)
class Cell:
    id: int
    cols: tuple          # (c0, c1), inclusive column range
    rows: np.ndarray     # row indices c0..c1 in x2 order, wrapped modulo n2

    @property
    def shape(self):
        return (self.cols[1] - self.cols[0] + 1, len(self.rows))


@dataclass(frozen=True)
class CellGrid:
    """Net of grid lines: rows ``shift_t + j k`` and columns ``shift_s + j k``.

    ``spacing`` is ``k = ceil(eps^beta_grid / h)`` grid steps. The edge
    columns ``x1 = -1, 1`` always belong to the net. Line energies are
    ``h``-weighted sums of the GL density along the chosen lines.
    """

    grid: object
    eps: float
    beta_grid: float
    spacing: int
    shift_t: int
    shift_s: int
    row_lines: np.ndarray
    col_lines: np.ndarray
    line_energy_H: float
    line_energy_V: float
    line_energy_edges: float
    candidates_H: np.ndarray
    candidates_V: np.ndarray
    total_energy: float

    @property
    def pigeonhole_bound(self):
        """``(2 / eps^beta_grid) * int e_eps(m')``."""
        return 2.0 / self.eps**self.beta_grid * self.total_energy

    @property
    def chosen_line_energy(self):
        return self.line_energy_H + self.line_energy_V

    def cells(self):
        n2 = self.grid.n2
        cb = self.col_lines
        rb = list(self.row_lines) + [self.row_lines[0] + n2]
        out = []
        cid = 0
        for a in range(len(cb) - 1):
            for b in range(len(rb) - 1):
                rows = np.arange(rb[b], rb[b + 1] + 1) % n2
                out.append(Cell(cid, (int(cb[a]), int(cb[a + 1])), rows))
                cid += 1
        return out


def _first_min(values):
    """Index of the smallest value, ties (to rounding) toward the smallest index."""
    vmin = float(np.min(values))
    slack = 1e-12 * max(abs(vmin), float(np.max(np.abs(values))), 1e-300)
    return int(np.nonzero(values <= vmin + slack)[0][0])


def select_shifts(mp, eps, beta_grid, grid, density=None):
    """Choose the net shifts that minimize the line energy of ``e_eps(m')``.

    Candidate row shifts are ``t = 0..k-1`` with lines ``t + j k`` for
    ``j < floor(n2 / k)``; candidate column shifts ``s = 0..k-1`` give lines
    ``s + j k`` inside ``[k, n1 - 1 - k]``. Each candidate set visits every
    row (column) at most once, so the minimum is at most the average, which
    is bounded by ``int e / (k h)``.
    """
    if not 0.0 < beta_grid < 1.0:
        raise ValidationError(f"beta_grid={beta_grid!r} must lie in (0, 1)")
    if not eps > 0:
        raise ValidationError("eps must be positive")
    h = grid.h
    k = int(math.ceil(eps**beta_grid / h - 1e-9))
    if k < MIN_NODES_PER_SIDE:
        raise ResolutionError(
            f"select_shifts: cell side eps^beta_grid={eps**beta_grid:.4g} spans {k} < {MIN_NODES_PER_SIDE} grid steps")
    if 2 * k > grid.n2 or 3 * k > grid.n1 - 1:
        raise ResolutionError("select_shifts: grid too small for at least two cells per direction")
    e = gl_density(mp, eps, grid) if density is None else np.asarray(density, dtype=float)
    row_e = h * e.sum(axis=0)
    col_e = h * e.sum(axis=1)
    J = grid.n2 // k
    H = np.array([row_e[t + k * np.arange(J)].sum() for t in range(k)])
    last = grid.n1 - 1
    col_sets = [np.arange(s, last - k + 1, k)[np.arange(s, last - k + 1, k) >= k] for s in range(k)]
    V = np.array([col_e[c].sum() for c in col_sets])
    t = _first_min(H)
    s = _first_min(V)
    cols = np.concatenate([[0], col_sets[s], [last]]).astype(int)
    rows = (t + k * np.arange(J)).astype(int)
    return CellGrid(grid, eps, beta_grid, k, t, s, rows, cols, float(H[t]), float(V[s]),
                    float(col_e[0] + col_e[last]), H, V, h * h * float(e.sum()))


def cell_block(f, cell):
    """Values of ``f`` on the closed cell, shape ``cell.shape + f.shape[2:]``."""
    return np.asarray(f)[cell.cols[0]:cell.cols[1] + 1][:, cell.rows]


def cell_loop(shape):
    """Counter-clockwise boundary loop of a ``(p, q)`` block in the (x1, x2) plane."""
    p, q = shape
    bottom = [(a, 0) for a in range(p - 1)]
    right = [(p - 1, b) for b in range(q - 1)]
    top = [(a, q - 1) for a in range(p - 1, 0, -1)]
    left = [(0, b) for b in range(q - 1, 0, -1)]
    return np.array(bottom + right + top + left, dtype=int)


# ---------------------------------------------------------------------------
# winding number and projection

def degree(mp, loop):
    """Winding number of ``m'`` along the closed index loop ``loop`` (L, 2).

    Sums the angle increments of ``m'/|m'|`` between consecutive loop points,
    each taken in ``(-pi, pi]``.
    """
    mp = np.asarray(mp, dtype=float)
    vals = mp[loop[:, 0], loop[:, 1]]
    mod = np.hypot(vals[:, 0], vals[:, 1])
    if np.min(mod) < 0.5:
        i = int(np.argmin(mod))
        raise DegreeUndefinedError(
            f"degree: |m'| = {mod[i]:.3g} < 1/2 at loop point {tuple(loop[i])}")
    ang = np.arctan2(vals[:, 1], vals[:, 0])
    d = np.diff(np.append(ang, ang[0]))
    d = np.where(d > np.pi, d - 2 * np.pi, d)
    d = np.where(d <= -np.pi, d + 2 * np.pi, d)
    return int(round(float(d.sum()) / (2 * np.pi)))


def project_s1(u):
    """``u / |u|`` pointwise; raises on vanishing modulus."""
    u = np.asarray(u, dtype=float)
    mod = np.linalg.norm(u, axis=-1, keepdims=True)
    bad = mod[..., 0] <= 1e-12
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ProjectionError(f"project_s1: |u| vanishes at index {idx}")
    return u / mod


def modulus_report(u):
    """``{'sup_dev': sup||u|-1|, 'min': min|u|, 'max': max|u|}``."""
    mod = np.linalg.norm(np.asarray(u, dtype=float), axis=-1)
    return {"sup_dev": float(np.max(np.abs(mod - 1.0))), "min": float(mod.min()), "max": float(mod.max())}


# ---------------------------------------------------------------------------
# cell minimization

@dataclass
class GLCellSolution:
    u: np.ndarray
    h: float
    eps: float
    energy: float
    competitor_energy: float
    eta: float
    iterations: int
    converged: bool
    residual: float
    cell_id: int = 0
    degree: Optional[int] = None
    extra: dict = field(default_factory=dict)


def coons_patch(g):
    """Transfinite bilinear interpolation of the boundary ring of ``g`` (p, q, 2)."""
    g = np.asarray(g, dtype=float)
    p, q = g.shape[:2]
    s = np.linspace(0.0, 1.0, p)[:, None, None]
    t = np.linspace(0.0, 1.0, q)[None, :, None]
    L, R = g[0][None], g[-1][None]
    B, T = g[:, 0][:, None], g[:, -1][:, None]
    corners = ((1 - s) * (1 - t) * g[0, 0] + s * (1 - t) * g[-1, 0]
               + (1 - s) * t * g[0, -1] + s * t * g[-1, -1])
    out = (1 - s) * L + s * R + (1 - t) * B + t * T - corners
    out[0], out[-1], out[:, 0], out[:, -1] = g[0], g[-1], g[:, 0], g[:, -1]
    return out


def gl_cell_energy(u, h, eps):
    return kernels.gl_energy_grad(u, h, eps)[0]


def cell_minimize(g, eps, h, tol=1e-14, max_iter=20000, init=None, cell_id=0):
    """Minimize the cell GL energy with the boundary ring of ``g`` as data.

    ``g`` has shape ``(p, q, 2)``; only its outer ring is used. Starts from
    ``init`` or from the Coons patch of the data pulled into the unit ball,
    and runs L-BFGS on the interior nodes. The boundary ring of the result is
    bit-identical to that of ``g``.
    """
    g = np.array(g, dtype=float)
    p, q = g.shape[:2]
    if p < 3 or q < 3:
        raise ValidationError("cell_minimize: cell needs at least 3 nodes per side")
    ring = np.ones((p, q), bool)
    ring[1:-1, 1:-1] = False
    if np.max(np.linalg.norm(g[ring], axis=-1)) > 1.0 + 1e-12:
        raise ValidationError("cell_minimize: boundary data must satisfy |g| <= 1")
    comp = coons_patch(g)
    E_comp = gl_cell_energy(comp, h, eps)
    if init is None:
        u0 = comp / np.maximum(1.0, np.linalg.norm(comp, axis=-1, keepdims=True))
    else:
        u0 = np.array(init, dtype=float)
    u0[ring] = g[ring]
    work = u0.copy()

    def fun(y):
        work[1:-1, 1:-1] = y.reshape(p - 2, q - 2, 2)
        E, grad = kernels.gl_energy_grad(work, h, eps)
        return E, grad[1:-1, 1:-1].ravel()

    res = minimize(fun, u0[1:-1, 1:-1].ravel(), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-13, "maxcor": 20})
    converged = bool(res.success) or "ABNORMAL" in str(res.message)
    u = u0.copy()
    u[1:-1, 1:-1] = res.x.reshape(p - 2, q - 2, 2)
    E, grad = kernels.gl_energy_grad(u, h, eps)
    if E > gl_cell_energy(u0, h, eps):
        u = u0
        E, grad = kernels.gl_energy_grad(u, h, eps)
    resid = float(np.max(np.abs(grad))) / (2.0 * h * h)
    eta = float(np.max(np.abs(np.sum(u * u, axis=-1) - 1.0)))
    if not converged:
        log.warning("cell_minimize(cell %d): %s", cell_id, res.message)
    return GLCellSolution(u, h, eps, float(E), float(E_comp), eta, int(res.nit), converged, resid, cell_id)


# ---------------------------------------------------------------------------
# Pohozaev balance

def _trap(n):
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def pohozaev_residual(sol, x0=None):
    """Relative mismatch of the Pohozaev balance for a cell solution.

    With ``X = x - x0``, ``nu`` the outer normal and ``rho = 1 - |u|^2``:

        int_bd (X.nu |grad u|^2 / 2 - d_nu u . (X.grad u))
            = (1/eps^2) int rho^2 - (1/(2 eps^2)) int_bd X.nu rho^2.

    Returns ``|lhs - rhs|`` divided by the sum of the absolute values of the
    four integrals (0 when all of them vanish to rounding). Normal derivatives are second-order
    one-sided differences, tangential ones second-order differences along the
    side, and all integrals use the trapezoid rule. ``x0`` defaults to the
    cell centre, in cell coordinates with the corner node at the origin.
    """
    u = np.asarray(sol.u, dtype=float)
    h, eps = sol.h, sol.eps
    p, q = u.shape[:2]
    if x0 is None:
        x0 = (0.5 * (p - 1) * h, 0.5 * (q - 1) * h)
    rho = 1.0 - np.sum(u * u, axis=-1)
    interior = h * h * float(np.sum(np.outer(_trap(p), _trap(q)) * rho**2))
    xs = np.arange(p) * h - x0[0]
    ys = np.arange(q) * h - x0[1]

    def one_sided(a0, a1, a2):
        return (-3.0 * a0 + 4.0 * a1 - a2) / (2.0 * h)

    sides = []
    # (values along side, d1 u, d2 u, X1, X2, normal)
    d2 = np.gradient(u[0], h, axis=0, edge_order=2)
    sides.append((u[0], one_sided(u[0], u[1], u[2]), d2, np.full(q, xs[0]), ys, (-1.0, 0.0)))
    d2 = np.gradient(u[-1], h, axis=0, edge_order=2)
    sides.append((u[-1], -one_sided(u[-1], u[-2], u[-3]), d2, np.full(q, xs[-1]), ys, (1.0, 0.0)))
    d1 = np.gradient(u[:, 0], h, axis=0, edge_order=2)
    sides.append((u[:, 0], d1, one_sided(u[:, 0], u[:, 1], u[:, 2]), xs, np.full(p, ys[0]), (0.0, -1.0)))
    d1 = np.gradient(u[:, -1], h, axis=0, edge_order=2)
    sides.append((u[:, -1], d1, -one_sided(u[:, -1], u[:, -2], u[:, -3]), xs, np.full(p, ys[-1]), (0.0, 1.0)))

    A = B = D = 0.0
    for vals, du1, du2, X1, X2, (n1, n2) in sides:
        w = h * _trap(len(X1))
        xnu = X1 * n1 + X2 * n2
        grad2 = np.sum(du1**2 + du2**2, axis=-1)
        dnu = du1 * n1 + du2 * n2
        dX = du1 * X1[:, None] + du2 * X2[:, None]
        rho_g = 1.0 - np.sum(vals * vals, axis=-1)
        A += float(np.sum(w * 0.5 * xnu * grad2))
        B += float(np.sum(w * np.sum(dnu * dX, axis=-1)))
        D += float(np.sum(w * xnu * rho_g**2))
    C = interior / eps**2
    D = D / (2.0 * eps**2)
    lhs = A - B
    rhs = C - D
    scale = abs(A) + abs(B) + abs(C) + abs(D)
    # rounding-level terms (e.g. a constant unit solution) count as vanishing
    if scale <= 1e-12 * (p - 1) * (q - 1) * h * h / eps**2:
        return 0.0
    return abs(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# pipeline

@dataclass
class ApproxResult:
    M: np.ndarray
    u: np.ndarray
    cellgrid: CellGrid
    solutions: list
    eta: float

    def cell_rows(self):
        """Rows ``(cell_id, energy, eta, degree, pohozaev_residual, iterations)``."""
        return [(s.cell_id, s.energy, s.eta, s.degree, s.extra.get("pohozaev", float("nan")), s.iterations)
                for s in self.solutions]


def approximate(m, p, beta_grid, ws, tol=1e-14, workers=1, pohozaev=True):
    """Run the pipeline on ``m`` (n1, n2, 3) and return the circle-valued ``M``.

    Raises :class:`DegreeUndefinedError` when ``|m'| < 1/2`` on a net line
    crossing a cell loop; a nonzero cell degree is logged and recorded.
    """
    grid = ws.grid
    m = np.asarray(grid.check(m, "m"), dtype=float)
    mp = m[..., :2]
    eps = p.eps
    cg = select_shifts(mp, eps, beta_grid, grid)
    cells = cg.cells()
    u = mp.copy()

    def solve(cell):
        g = cell_block(mp, cell)
        deg = degree(g, cell_loop(cell.shape))
        if deg != 0:
            log.warning("cell %d has degree %d", cell.id, deg)
        sol = cell_minimize(g, eps, grid.h, tol=tol, cell_id=cell.id)
        sol.degree = deg
        if pohozaev:
            sol.extra["pohozaev"] = pohozaev_residual(sol)
        return sol

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(solve, cells))
    else:
        sols = [solve(c) for c in cells]
    for cell, sol in zip(cells, sols):
        c0, c1 = cell.cols
        rows = cell.rows[1:-1]
        u[c0 + 1:c1, rows] = sol.u[1:-1, 1:-1]
    eta = float(np.max(np.abs(np.sum(u * u, axis=-1) - 1.0)))
    M = project_s1(u)
    return ApproxResult(M, u, cg, sols, eta)


def approx_report(m, M, p, ws, beta_grid):
    """Measured ratios comparing the circle-valued ``M`` with ``m``.

    ``l2_ratio = ||M - m'||_h^2 / (eps^{2 beta_grid} E(m))``,
    ``grad_ratio = ||grad_h (M - m')||_h^2 / E(m)`` and
    ``energy_ratio = E(M) / E(m)`` with ``M`` padded by ``m3 = 0``.
    """
    grid = ws.grid
    m = np.asarray(m, dtype=float)
    diff = np.asarray(M, dtype=float) - m[..., :2]
    Em = energy(m, p, ws).total
    M3 = np.concatenate([M, np.zeros(M.shape[:2] + (1,))], axis=-1)
    EM = energy(M3, p, ws).total
    l2 = inner_h(diff, diff, grid)
    g2 = inner_h(d1h(diff, grid), d1h(diff, grid), grid) + inner_h(d2h(diff, grid), d2h(diff, grid), grid)
    if Em == 0.0:
        ratios = (0.0 if l2 == 0 else math.inf, 0.0 if g2 == 0 else math.inf, 1.0 if EM == 0 else math.inf)
    else:
        ratios = (l2 / (p.eps ** (2 * beta_grid) * Em), g2 / Em, EM / Em)
    return {
        "E_m": Em, "E_M": EM, "l2_diff_sq": l2, "grad_diff_sq": g2,
        "l2_ratio": ratios[0], "grad_ratio": ratios[1], "energy_ratio": ratios[2],
        "energy_ok": ratios[2] <= 1.05,
    }

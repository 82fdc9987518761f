"""Discrete LLG dynamics with damping, precession and spin-current drift.

Interior nodes obey

    dm/dt + alpha m x dm/dt + m x (beta grad E(m) - a - m x a) = 0,
    a = (v . grad_h) m,

and the edge columns are frozen. Solving for ``dm/dt`` uses the closed-form
inverse of ``A(m) mu = mu + alpha m x mu``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .energy import energy, energy_grad, gronwall_ceiling
from .errors import ContractViolation, DivergenceError, InsufficientDataError, IntegrityError, ValidationError
from .grid import d1h, d2h, max_norm_deviation, norm_h
from .spectral import apply_fractional

log = logging.getLogger(__name__)

UNIT_TOL = 1e-6


class SpinCurrent:
    """Applied current ``v(t, x1, x2)`` sampled at grid nodes.

    Parameters
    ----------
    func : callable or None
        ``func(t, X1, X2)`` returning an array of shape ``X1.shape + (2,)``.
        ``None`` means no current.
    sup_sq_bound : float
        Declared bound on ``||v(t)||_inf^2`` for all t.
    params : ModelParams, optional
        When given, the bound is checked against ``alpha * beta``.
    allow_violation : bool
        Accept a bound above ``alpha * beta`` (logged instead of raised).
    """

    def __init__(self, func=None, sup_sq_bound=0.0, params=None, allow_violation=False):
        self.func = func
        self.sup_sq_bound = float(sup_sq_bound)
        self.admissible = True
        if params is not None:
            ab = params.alpha * params.beta
            if self.sup_sq_bound > ab * (1.0 + 1e-12):
                self.admissible = False
                msg = f"spin current: ||v||_inf^2 bound {self.sup_sq_bound:.6g} exceeds alpha*beta={ab:.6g}"
                if not allow_violation:
                    raise ValidationError(msg)
                log.warning(msg)

    @classmethod
    def zero(cls):
        return cls(None, 0.0)

    @classmethod
    def constant(cls, vec, params=None, allow_violation=False):
        vec = np.asarray(vec, dtype=float).reshape(2)

        def func(t, X1, X2):
            return np.broadcast_to(vec, np.shape(X1) + (2,))

        return cls(func, float(vec @ vec), params, allow_violation)

    @property
    def is_zero(self):
        return self.func is None

    def sample(self, t, grid):
        if self.func is None:
            return None
        X1, X2 = grid.coords()
        return np.asarray(self.func(t, X1, X2), dtype=float)

    def sup_norm_sq(self, t, grid):
        """``max_x |v(t, x)|^2`` over the grid nodes."""
        v = self.sample(t, grid)
        return 0.0 if v is None else float(np.max(np.sum(v * v, axis=-1)))


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping controls.

    ``scheme`` is ``"rk4"`` (projected RK4) or ``"midpoint"`` (projected
    explicit midpoint). Energies are recorded every ``sample_every`` steps.
    """

    dt: float
    scheme: str = "rk4"
    renormalize_every: int = 1
    energy_check_tol: float = 0.02
    sample_every: int = 1
    store_states: bool = True
    enforce_stability: bool = True

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValidationError(f"IntegratorConfig.dt={self.dt!r} must be positive")
        if self.scheme not in ("rk4", "midpoint"):
            raise ValidationError(f"IntegratorConfig.scheme={self.scheme!r} not in (rk4, midpoint)")
        if self.renormalize_every < 1 or self.sample_every < 1:
            raise ValidationError("IntegratorConfig: renormalize_every and sample_every must be >= 1")
        if self.energy_check_tol < 0:
            raise ValidationError("IntegratorConfig.energy_check_tol must be >= 0")


def stability_limit(p, grid, v_sup=0.0, scheme="rk4"):
    """Largest admissible step for the explicit schemes.

    Bounds the spectral radius of the linearized right-hand side by
    ``beta (4/h^2 + 2/eps^2 + 2 sqrt(2)/(delta h)) + sqrt(2) |v|_inf / h`` and
    keeps ``dt * radius`` inside the stability region (2.5 for RK4, 1 for the
    midpoint rule).
    """
    h = grid.h
    rho = p.beta * (4.0 / h**2 + 2.0 / p.eps**2 + 2.0 * math.sqrt(2.0) / (p.delta * h))
    rho += math.sqrt(2.0) * v_sup / h
    return (2.5 if scheme == "rk4" else 1.0) / rho


def a_inv(m, w, alpha):
    """Solve ``mu + alpha m x mu = w`` for ``mu``.

    Uses ``mu = (w - alpha m x w + alpha^2 (m.w) m) / (1 + alpha^2 |m|^2)``,
    which is exact for any ``m`` (not only unit vectors).
    """
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    mw = np.sum(m * w, axis=-1, keepdims=True)
    mm = np.sum(m * m, axis=-1, keepdims=True)
    return (w - alpha * np.cross(m, w) + alpha**2 * mw * m) / (1.0 + alpha**2 * mm)


def drift(m, vnodes, grid):
    """``(v . grad_h) m``."""
    if vnodes is None:
        return np.zeros_like(m)
    return vnodes[..., 0:1] * d1h(m, grid) + vnodes[..., 1:2] * d2h(m, grid)


def _rhs(m, vnodes, p, ws):
    grid = ws.grid
    g = energy_grad(m, p, ws)
    a = drift(m, vnodes, grid)
    out = kernels.llg_velocity(m, g, a, p.alpha, p.beta)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def rhs(m, t, p, ws, v=None):
    """Time derivative of ``m`` at time ``t``; zero on the edge columns."""
    m = np.asarray(ws.grid.check(m, "m"), dtype=float)
    dev = max_norm_deviation(m)
    if dev > UNIT_TOL:
        raise IntegrityError(f"rhs: max ||m|-1| = {dev:.3g} exceeds {UNIT_TOL}")
    vnodes = None if v is None else v.sample(t, ws.grid)
    return _rhs(m, vnodes, p, ws)


def _check_finite(m, dt):
    if not np.all(np.isfinite(m)):
        raise DivergenceError(f"non-finite values after a step with dt={dt:.6g}; reduce dt")


def _advance(m, t, dt, scheme, p, ws, v):
    """One explicit step without projection. Returns the new state and the
    current samples at t, t+dt/2, t+dt (None when there is no current)."""
    grid = ws.grid
    if v is None or v.is_zero:
        v0 = vh = v1 = None
    else:
        v0, vh, v1 = v.sample(t, grid), v.sample(t + 0.5 * dt, grid), v.sample(t + dt, grid)
    if scheme == "rk4":
        k1 = _rhs(m, v0, p, ws)
        k2 = _rhs(m + 0.5 * dt * k1, vh, p, ws)
        k3 = _rhs(m + 0.5 * dt * k2, vh, p, ws)
        k4 = _rhs(m + dt * k3, v1, p, ws)
        new = m + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        k1 = _rhs(m, v0, p, ws)
        new = m + dt * _rhs(m + 0.5 * dt * k1, vh, p, ws)
    return new, (v0, vh, v1)


def step(m, t, dt, config, p, ws, v=None, boundary=None, renormalize=True):
    """Advance ``m`` by one step of ``config.scheme``.

    The result is renormalized pointwise (when ``renormalize``) and its edge
    columns are overwritten by ``boundary`` (default: the edge columns of
    ``m``), so they stay bit-identical.
    """
    m = np.asarray(ws.grid.check(m, "m"), dtype=float)
    if boundary is None:
        boundary = (m[0].copy(), m[-1].copy())
    new, _ = _advance(m, t, dt, config.scheme, p, ws, v)
    _check_finite(new, dt)
    if renormalize:
        new /= np.linalg.norm(new, axis=-1, keepdims=True)
    new[0] = boundary[0]
    new[-1] = boundary[-1]
    return new


@dataclass
class Trajectory:
    """Samples of a run plus its energy ledger."""

    ws: object
    params: object
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    ledger: list = field(default_factory=list)
    E0: float = 0.0
    v_integral: float = 0.0
    final: Optional[np.ndarray] = None
    t_final: float = 0.0
    steps: int = 0
    max_pre_norm_dev: float = 0.0
    max_tangency: float = 0.0

    LEDGER_COLUMNS = ("t", "exchange", "anisotropy", "nonlocal", "total", "ceiling",
                      "max_norm_dev", "l2_h_minus1_rate")


def _hminus1_norm(d, ws):
    """``sqrt(sum_c || |grad|^{-1} d_c ||_h^2)`` over the components of ``d``."""
    r = apply_fractional(ws, -0.5, d)
    return norm_h(r, ws.grid)


def simulate(m0, p, v, T, config, ws, callbacks=(), t0=0.0, E0=None, v_integral0=0.0,
             check_tangency=False):
    """Evolve ``m0`` to time ``t0 + T``.

    Every ``config.sample_every`` steps a ledger row
    ``(t, exchange, anisotropy, nonlocal, total, ceiling, max_norm_dev,
    l2_h_minus1_rate)`` is recorded and the callbacks ``cb(t, m, row)`` are
    invoked. ``max_norm_dev`` is the largest ``||m|-1|`` seen before
    renormalization since the previous row. The energy must stay below the
    ceiling (times ``1 + energy_check_tol``); without current it must not
    exceed its running minimum by more than that slack. ``E0`` and
    ``v_integral0`` continue a previous run.
    """
    grid = ws.grid
    m = np.array(grid.check(m0, "m0"), dtype=float)
    dev0 = max_norm_deviation(m)
    if dev0 > UNIT_TOL:
        raise IntegrityError(f"simulate: initial field has max ||m|-1| = {dev0:.3g}")
    v = v if v is not None else SpinCurrent.zero()
    v_sup = math.sqrt(max(v.sup_sq_bound, v.sup_norm_sq(t0, grid)))
    limit = stability_limit(p, grid, v_sup, config.scheme)
    if config.enforce_stability and config.dt > limit:
        raise ValidationError(f"dt={config.dt:.6g} exceeds the stability limit {limit:.6g}")
    nsteps = int(round(T / config.dt))
    if nsteps < 0 or abs(nsteps * config.dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValidationError(f"T={T!r} is not a non-negative multiple of dt={config.dt!r}")
    boundary = (m[0].copy(), m[-1].copy())
    tol = config.energy_check_tol
    e = energy(m, p, ws)
    E0 = e.total if E0 is None else float(E0)
    traj = Trajectory(ws=ws, params=p, E0=E0, v_integral=float(v_integral0))
    seg_dev = dev0
    running_min = e.total
    prev_sample = (t0, m.copy())

    def record(t, m, e, dev):
        nonlocal prev_sample
        ceiling = gronwall_ceiling(E0, p, traj.v_integral)
        tp, mp = prev_sample
        rate = _hminus1_norm((m - mp) / (t - tp), ws) if t > tp else 0.0
        prev_sample = (t, m.copy())
        row = (t, e.exchange, e.anisotropy, e.nonlocal_, e.total, ceiling, dev, rate)
        traj.ledger.append(row)
        traj.times.append(t)
        if config.store_states:
            traj.states.append(m.copy())
        for cb in callbacks:
            cb(t, m, row)
        return ceiling

    record(t0, m, e, dev0)
    t = t0
    for k in range(nsteps):
        new, (v0, vh, v1) = _advance(m, t, config.dt, config.scheme, p, ws, v)
        _check_finite(new, config.dt)
        if check_tangency:
            r = _rhs(m, v0, p, ws)
            traj.max_tangency = max(traj.max_tangency, float(np.max(np.abs(np.sum(r * m, axis=-1)))))
        new[0] = boundary[0]
        new[-1] = boundary[-1]
        dev = max_norm_deviation(new)
        seg_dev = max(seg_dev, dev)
        traj.max_pre_norm_dev = max(traj.max_pre_norm_dev, dev)
        if (k + 1) % config.renormalize_every == 0:
            new /= np.linalg.norm(new, axis=-1, keepdims=True)
            new[0] = boundary[0]
            new[-1] = boundary[-1]
        if v0 is not None:
            s0, sh, s1 = (float(np.max(np.sum(x * x, axis=-1))) for x in (v0, vh, v1))
            traj.v_integral += config.dt / 6.0 * (s0 + 4.0 * sh + s1)
        m = new
        t = t0 + (k + 1) * config.dt
        if (k + 1) % config.sample_every == 0 or k + 1 == nsteps:
            e = energy(m, p, ws)
            ceiling = record(t, m, e, seg_dev)
            seg_dev = 0.0
            if e.total > ceiling * (1.0 + tol) + 1e-300:
                raise ContractViolation(
                    f"energy {e.total:.10g} exceeds the ceiling {ceiling:.10g} at t={t:.6g}; reduce dt")
            if v.is_zero and e.total > running_min * (1.0 + tol) + 1e-300:
                raise ContractViolation(
                    f"energy increased to {e.total:.10g} from {running_min:.10g} at t={t:.6g} without current; reduce dt")
            running_min = min(running_min, e.total)
    traj.final = m
    traj.t_final = t
    traj.steps = nsteps
    return traj


def time_derivative_norms(traj):
    """Discrete time integrals of the sampled time derivative.

    Returns a dict with ``l2`` = ``sqrt(sum dt ||dm/dt||_h^2)``, ``hminus1`` =
    the same with ``|grad|^{-1}`` applied to each component, and
    ``displacement`` = ``||m(T) - m(0)||_h``.
    """
    if len(traj.states) < 2:
        raise InsufficientDataError("time_derivative_norms: need at least two stored samples")
    ws = traj.ws
    l2 = 0.0
    hm1 = 0.0
    for (t0, m0), (t1, m1) in zip(zip(traj.times, traj.states), zip(traj.times[1:], traj.states[1:])):
        dt = t1 - t0
        d = (m1 - m0) / dt
        l2 += dt * norm_h(d, ws.grid) ** 2
        hm1 += dt * _hminus1_norm(d, ws) ** 2
    disp = norm_h(traj.states[-1] - traj.states[0], ws.grid)
    return {"l2": math.sqrt(l2), "hminus1": math.sqrt(hm1), "displacement": disp}

"""Reduced thin-film energy, its gradient, a density surrogate and the energy ceiling.

For a field ``m = (m', m3)`` on the strip grid the discrete energy is

    E(m) = ||grad_h m||_h^2 + (1/eps^2) ||m3||_h^2
           + (1/(2 delta)) || |grad|^{-1/2} div_h m' ||_h^2,

with ``|grad|^s`` taken from :mod:`thinfilm.spectral`. The energy is defined
for any field, unit length is not required.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .grid import d1h, d2h, div_h, laplacian_h
from .spectral import apply_fractional, hminus_half_sq, nonlocal_P

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    Parameters
    ----------
    delta : float
        Core-width parameter, in (0, 1/2).
    eps : float
        Vortex core scale, in (0, 1/2).
    nu : float
        Damping coefficient; the Gilbert damping is ``alpha = nu * eps``.
    lam : float
        Precession coefficient; ``beta = lam * eps``.
    m1inf : float
        First component of the boundary directions, in [0, 1).
    """

    delta: float
    eps: float
    nu: float = 1.0
    lam: float = 1.0
    m1inf: float = 0.0

    def __post_init__(self):
        checks = [
            ("delta", self.delta, 0.0 < self.delta < 0.5, "0 < delta < 1/2"),
            ("eps", self.eps, 0.0 < self.eps < 0.5, "0 < eps < 1/2"),
            ("nu", self.nu, self.nu > 0.0, "nu > 0"),
            ("lam", self.lam, self.lam > 0.0, "lam > 0"),
            ("m1inf", self.m1inf, 0.0 <= self.m1inf < 1.0, "0 <= m1inf < 1"),
        ]
        for name, value, ok, rule in checks:
            if not (isinstance(value, (int, float)) and math.isfinite(value) and ok):
                raise ValidationError(f"ModelParams.{name}={value!r} violates {rule}")
        if not self.regime_ok:
            log.warning("regime flag off: 1/(delta|log delta|)=%.3g is not << |log eps|=%.3g",
                        self.kappa, abs(math.log(self.eps)))
        if not self.lambda_ok:
            log.warning("lambda flag off: lam=%.3g > sqrt(delta|log delta|)=%.3g",
                        self.lam, math.sqrt(self.delta * abs(math.log(self.delta))))

    @property
    def alpha(self) -> float:
        return self.nu * self.eps

    @property
    def beta(self) -> float:
        return self.lam * self.eps

    @property
    def log_delta(self) -> float:
        """``|log delta|`` (natural logarithm)."""
        return abs(math.log(self.delta))

    @property
    def kappa(self) -> float:
        return 1.0 / (self.delta * self.log_delta)

    @property
    def regime_ok(self) -> bool:
        """Whether ``kappa <= 0.1 |log eps|`` (the ``<<`` read as a factor of ten)."""
        return self.kappa <= 0.1 * abs(math.log(self.eps))

    @property
    def lambda_ok(self) -> bool:
        return self.lam <= math.sqrt(self.delta * self.log_delta)

    @property
    def m_minus(self):
        return np.array([self.m1inf, -math.sqrt(1.0 - self.m1inf**2), 0.0])

    @property
    def m_plus(self):
        return np.array([self.m1inf, math.sqrt(1.0 - self.m1inf**2), 0.0])

    def flags(self) -> dict:
        return {"regime_ok": self.regime_ok, "lambda_ok": self.lambda_ok}


@dataclass(frozen=True)
class EnergyBreakdown:
    exchange: float
    anisotropy: float
    nonlocal_: float
    total: float
    ceiling: Optional[float] = None

    def as_row(self):
        return (self.exchange, self.anisotropy, self.nonlocal_, self.total)


def energy(m, p, ws):
    """Energy parts of ``m`` (shape (n1, n2, 3))."""
    grid = ws.grid
    m = np.asarray(grid.check(m, "m"), dtype=float)
    h2 = grid.h**2
    exch = h2 * (float(np.sum(d1h(m, grid) ** 2)) + float(np.sum(d2h(m, grid) ** 2)))
    aniso = h2 * float(np.sum(m[..., 2] ** 2)) / p.eps**2
    nonloc = hminus_half_sq(ws, div_h(m[..., :2], grid)) / (2.0 * p.delta)
    return EnergyBreakdown(exch, aniso, nonloc, exch + aniso + nonloc)


def energy_grad(m, p, ws):
    """``-2 lap_h m + ((1/delta) P(m'), 2 m3 / eps^2)``.

    This is the exact ``<.,.>_h`` gradient of :func:`energy` for perturbations
    vanishing on the edge columns.
    """
    grid = ws.grid
    m = np.asarray(grid.check(m, "m"), dtype=float)
    g = -2.0 * laplacian_h(m, grid)
    g[..., :2] += nonlocal_P(ws, m[..., :2]) / p.delta
    g[..., 2] += 2.0 * m[..., 2] / p.eps**2
    return g


def density_scale(p):
    """``(2/pi) delta |log delta|``."""
    return 2.0 / math.pi * p.delta * p.log_delta


def energy_density(m, p, ws):
    """Pointwise surrogate of the rescaled energy density.

    The nonlocal part is localized as ``(1/(2 delta)) (|grad|^{-1/2} div_h m')^2``,
    which has the same ``h^2``-sum as the nonlocal energy.
    """
    grid = ws.grid
    m = np.asarray(grid.check(m, "m"), dtype=float)
    local = np.sum(d1h(m, grid) ** 2 + d2h(m, grid) ** 2, axis=-1) + m[..., 2] ** 2 / p.eps**2
    r = apply_fractional(ws, -0.25, div_h(m[..., :2], grid))
    return density_scale(p) * (local + r**2 / (2.0 * p.delta))


def gronwall_ceiling(E0, p, v_sup_sq_integral):
    """``E0 * exp(4 / (alpha beta) * int ||v||_inf^2 dt)``."""
    ab = p.alpha * p.beta
    if not ab > 0.0:
        raise ValidationError("gronwall_ceiling: alpha*beta must be positive")
    if E0 < 0 or v_sup_sq_integral < 0:
        raise ValidationError("gronwall_ceiling: E0 and the current integral must be >= 0")
    return E0 * math.exp(4.0 / ab * v_sup_sq_integral)

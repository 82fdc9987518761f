"""Pure numpy implementation of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Arrays are float64; stencils act on axis 0 (x1, Dirichlet columns) and axis 1
(x2, periodic rows), any trailing axes are components.
"""
import numpy as np

NAME = "numpy"


def d1h(f, h):
    f = np.asarray(f, dtype=np.float64)
    out = np.empty_like(f)
    inv = 1.0 / (2.0 * h)
    out[1:-1] = (f[2:] - f[:-2]) * inv
    out[0] = (f[1] - f[0]) * inv
    out[-1] = (f[-1] - f[-2]) * inv
    return out


def d2h(f, h):
    f = np.asarray(f, dtype=np.float64)
    return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) * (1.0 / (2.0 * h))


def laplacian_h(f, h):
    return d1h(d1h(f, h), h) + d2h(d2h(f, h), h)


def llg_velocity(m, grad, drift, alpha, beta):
    """dm/dt from the implicit LLG form, pointwise over the trailing 3-axis.

    Solves mu + alpha m x mu = -m x (beta*grad - drift - m x drift).
    """
    w = beta * grad - drift - np.cross(m, drift)
    b = -np.cross(m, w)
    mb = np.sum(m * b, axis=-1, keepdims=True)
    mm = np.sum(m * m, axis=-1, keepdims=True)
    return (b - alpha * np.cross(m, b) + alpha * alpha * mb * m) / (1.0 + alpha * alpha * mm)


def gl_energy_grad(u, h, eps):
    """Compact 5-point Ginzburg-Landau energy of a cell and its gradient.

    ``u`` has shape (p, q, 2); the outer ring of nodes is Dirichlet data and
    gets a zero gradient. Potential uses trapezoidal node weights.
    """
    u = np.asarray(u, dtype=np.float64)
    dx = u[1:] - u[:-1]
    dy = u[:, 1:] - u[:, :-1]
    exchange = np.sum(dx * dx) + np.sum(dy * dy)
    rho = 1.0 - np.sum(u * u, axis=-1)
    w = np.ones(rho.shape)
    w[0, :] *= 0.5
    w[-1, :] *= 0.5
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    c = h * h / (eps * eps)
    energy = exchange + c * np.sum(w * rho * rho)
    g = np.zeros_like(u)
    g[:-1] -= 2.0 * dx
    g[1:] += 2.0 * dx
    g[:, :-1] -= 2.0 * dy
    g[:, 1:] += 2.0 * dy
    g -= 4.0 * c * (w * rho)[..., None] * u
    g[0] = 0.0
    g[-1] = 0.0
    g[:, 0] = 0.0
    g[:, -1] = 0.0
    return energy, g

# cython: language_level=3
"""Compiled twins of the kernels in ``_pykernels``.

Same signatures and semantics; loops are written so that each output value is
computed with the same floating-point operations as the numpy version where
practical (stencils), and to within rounding otherwise (cross products).
"""
import numpy as np

NAME = "cython"


cdef inline object _as3(f):
    a = np.ascontiguousarray(f, dtype=np.float64)
    if a.ndim == 2:
        return a.reshape(a.shape[0], a.shape[1], 1)
    if a.ndim == 3:
        return a
    return a.reshape(a.shape[0], a.shape[1], -1)


cdef void _d1h(const double[:, :, ::1] f, double[:, :, ::1] out, double inv) noexcept nogil:
    cdef Py_ssize_t n1 = f.shape[0], n2 = f.shape[1], nc = f.shape[2]
    cdef Py_ssize_t i, j, c
    for i in range(1, n1 - 1):
        for j in range(n2):
            for c in range(nc):
                out[i, j, c] = (f[i + 1, j, c] - f[i - 1, j, c]) * inv
    for j in range(n2):
        for c in range(nc):
            out[0, j, c] = (f[1, j, c] - f[0, j, c]) * inv
            out[n1 - 1, j, c] = (f[n1 - 1, j, c] - f[n1 - 2, j, c]) * inv


cdef void _d2h(const double[:, :, ::1] f, double[:, :, ::1] out, double inv) noexcept nogil:
    cdef Py_ssize_t n1 = f.shape[0], n2 = f.shape[1], nc = f.shape[2]
    cdef Py_ssize_t i, j, c, jp, jm
    for i in range(n1):
        for j in range(n2):
            jp = j + 1
            if jp == n2:
                jp = 0
            jm = j - 1
            if jm < 0:
                jm = n2 - 1
            for c in range(nc):
                out[i, j, c] = (f[i, jp, c] - f[i, jm, c]) * inv


def d1h(f, double h):
    shape = np.shape(f)
    a = _as3(f)
    out = np.empty_like(a)
    cdef double[:, :, ::1] o = out
    _d1h(a, o, 1.0 / (2.0 * h))
    return out.reshape(shape)


def d2h(f, double h):
    shape = np.shape(f)
    a = _as3(f)
    out = np.empty_like(a)
    cdef double[:, :, ::1] o = out
    _d2h(a, o, 1.0 / (2.0 * h))
    return out.reshape(shape)


def laplacian_h(f, double h):
    shape = np.shape(f)
    a = _as3(f)
    t = np.empty_like(a)
    out = np.empty_like(a)
    t2 = np.empty_like(a)
    cdef double[:, :, ::1] tv = t
    cdef double[:, :, ::1] ov = out
    cdef double[:, :, ::1] t2v = t2
    cdef double inv = 1.0 / (2.0 * h)
    cdef Py_ssize_t k, n = out.size
    cdef double* op
    cdef double* tp
    _d1h(a, tv, inv)
    _d1h(tv, ov, inv)
    _d2h(a, tv, inv)
    _d2h(tv, t2v, inv)
    op = &ov[0, 0, 0]
    tp = &t2v[0, 0, 0]
    with nogil:
        for k in range(n):
            op[k] = op[k] + tp[k]
    return out.reshape(shape)


def llg_velocity(m, grad, drift, double alpha, double beta):
    shape = np.shape(m)
    cdef double[:, ::1] mv = np.ascontiguousarray(m, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] gv = np.ascontiguousarray(grad, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] dv = np.ascontiguousarray(drift, dtype=np.float64).reshape(-1, 3)
    out = np.empty((mv.shape[0], 3))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t p, n = mv.shape[0]
    cdef double m0, m1, m2, a0, a1, a2, w0, w1, w2, b0, b1, b2
    cdef double c0, c1, c2, mb, mm, a2f = alpha * alpha
    with nogil:
        for p in range(n):
            m0 = mv[p, 0]
            m1 = mv[p, 1]
            m2 = mv[p, 2]
            a0 = dv[p, 0]
            a1 = dv[p, 1]
            a2 = dv[p, 2]
            # w = beta*grad - a - m x a
            w0 = beta * gv[p, 0] - a0 - (m1 * a2 - m2 * a1)
            w1 = beta * gv[p, 1] - a1 - (m2 * a0 - m0 * a2)
            w2 = beta * gv[p, 2] - a2 - (m0 * a1 - m1 * a0)
            # b = -m x w
            b0 = -(m1 * w2 - m2 * w1)
            b1 = -(m2 * w0 - m0 * w2)
            b2 = -(m0 * w1 - m1 * w0)
            c0 = m1 * b2 - m2 * b1
            c1 = m2 * b0 - m0 * b2
            c2 = m0 * b1 - m1 * b0
            mb = m0 * b0 + m1 * b1 + m2 * b2
            mm = m0 * m0 + m1 * m1 + m2 * m2
            ov[p, 0] = (b0 - alpha * c0 + a2f * mb * m0) / (1.0 + a2f * mm)
            ov[p, 1] = (b1 - alpha * c1 + a2f * mb * m1) / (1.0 + a2f * mm)
            ov[p, 2] = (b2 - alpha * c2 + a2f * mb * m2) / (1.0 + a2f * mm)
    return out.reshape(shape)


def gl_energy_grad(u, double h, double eps):
    a = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[:, :, ::1] uv = a
    cdef Py_ssize_t P = uv.shape[0], Q = uv.shape[1]
    g = np.zeros_like(a)
    cdef double[:, :, ::1] gv = g
    cdef double c = h * h / (eps * eps)
    cdef double exch = 0.0, pot = 0.0, d0, d1, rho, w
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(P):
            for j in range(Q):
                if i + 1 < P:
                    d0 = uv[i + 1, j, 0] - uv[i, j, 0]
                    d1 = uv[i + 1, j, 1] - uv[i, j, 1]
                    exch += d0 * d0 + d1 * d1
                    gv[i, j, 0] -= 2.0 * d0
                    gv[i, j, 1] -= 2.0 * d1
                    gv[i + 1, j, 0] += 2.0 * d0
                    gv[i + 1, j, 1] += 2.0 * d1
                if j + 1 < Q:
                    d0 = uv[i, j + 1, 0] - uv[i, j, 0]
                    d1 = uv[i, j + 1, 1] - uv[i, j, 1]
                    exch += d0 * d0 + d1 * d1
                    gv[i, j, 0] -= 2.0 * d0
                    gv[i, j, 1] -= 2.0 * d1
                    gv[i, j + 1, 0] += 2.0 * d0
                    gv[i, j + 1, 1] += 2.0 * d1
                w = 1.0
                if i == 0 or i == P - 1:
                    w *= 0.5
                if j == 0 or j == Q - 1:
                    w *= 0.5
                rho = 1.0 - (uv[i, j, 0] * uv[i, j, 0] + uv[i, j, 1] * uv[i, j, 1])
                pot += w * rho * rho
                gv[i, j, 0] -= 4.0 * c * w * rho * uv[i, j, 0]
                gv[i, j, 1] -= 4.0 * c * w * rho * uv[i, j, 1]
        for i in range(P):
            gv[i, 0, 0] = 0.0
            gv[i, 0, 1] = 0.0
            gv[i, Q - 1, 0] = 0.0
            gv[i, Q - 1, 1] = 0.0
        for j in range(Q):
            gv[0, j, 0] = 0.0
            gv[0, j, 1] = 0.0
            gv[P - 1, j, 0] = 0.0
            gv[P - 1, j, 1] = 0.0
    return exch + c * pot, g

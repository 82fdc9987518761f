import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinfilm.errors import DomainError, ValidationError
from thinfilm.grid import (
    GridSpec, boundary_flux_h, d1h, d2h, div_h, grad_h, inner_h, interpolate_Ih, laplacian_h,
    max_norm_deviation, norm_h, normalize, sample_Sh,
)


def test_gridspec_layout():
    g = GridSpec(8)
    assert g.h == 1 / 8
    assert g.shape == (17, 8)
    assert g.x1[0] == -1.0 and g.x1[-1] == 1.0
    assert g.x2[-1] == pytest.approx(1 - 1 / 8)
    with pytest.raises(ValidationError):
        GridSpec(0)


def test_d1h_constant_and_linear():
    g = GridSpec(8)
    X1, _ = g.coords()
    assert np.all(d1h(np.full(g.shape, 3.7), g) == 0.0)
    d = d1h(X1, g)
    np.testing.assert_allclose(d[1:-1], 1.0, rtol=1e-14)
    np.testing.assert_allclose(d[[0, -1]], 0.5, rtol=1e-14)


def test_d2h_sine_row():
    g = GridSpec(8)
    _, X2 = g.coords()
    f = np.sin(2 * np.pi * X2)
    expected = (np.sin(2 * np.pi * (X2 + g.h)) - np.sin(2 * np.pi * (X2 - g.h))) / (2 * g.h)
    np.testing.assert_allclose(d2h(f, g), expected, atol=1e-13)
    assert np.all(d2h(np.full(g.shape, -1.5), g) == 0.0)


def test_d2h_alternating_row_vanishes():
    g = GridSpec(8)
    f = np.tile((-1.0) ** np.arange(g.n2), (g.n1, 1))
    assert np.all(d2h(f, g) == 0.0)


def test_div_constant_and_laplacian_quadratic():
    g = GridSpec(8)
    p = np.broadcast_to([0.3, -0.7], g.shape + (2,))
    assert np.all(div_h(p, g) == 0.0)
    X1, _ = g.coords()
    lap = laplacian_h(X1**2, g)
    np.testing.assert_allclose(lap[2:-2], 2.0, rtol=1e-12)


def test_div_of_rotated_gradient_vanishes(rng):
    g = GridSpec(16)
    psi = rng.standard_normal(g.shape)
    rot = np.stack([-d2h(psi, g), d1h(psi, g)], axis=-1)
    assert np.max(np.abs(div_h(rot, g))) <= 1e-12 * np.max(np.abs(rot)) / g.h


def test_grad_stacks_components(rng, grid16):
    f = rng.standard_normal(grid16.shape)
    gr = grad_h(f, grid16)
    assert gr.shape == grid16.shape + (2,)
    np.testing.assert_array_equal(gr[..., 0], d1h(f, grid16))


def test_inner_product_basics():
    g = GridSpec(8)
    one = np.ones(g.shape)
    assert inner_h(one, one, g) == pytest.approx(g.h**2 * g.n1 * g.n2)
    e1 = np.zeros(g.shape + (3,))
    e2 = np.zeros(g.shape + (3,))
    e1[..., 0] = 1.0
    e2[..., 1] = 1.0
    assert inner_h(e1, e2, g) == 0.0
    assert norm_h(one, g) == pytest.approx(np.sqrt(2 + g.h))


def test_integration_by_parts_small(rng, grid16):
    f = rng.standard_normal(grid16.shape)
    h = rng.standard_normal(grid16.shape)
    lhs1 = inner_h(d1h(f, grid16), h, grid16) + inner_h(f, d1h(h, grid16), grid16)
    assert lhs1 == pytest.approx(boundary_flux_h(f, h, grid16), rel=1e-12, abs=1e-13)
    lhs2 = inner_h(d2h(f, grid16), h, grid16)
    assert lhs2 == pytest.approx(-inner_h(f, d2h(h, grid16), grid16), rel=1e-12, abs=1e-13)


def test_sample_constant_and_linear():
    g = GridSpec(8)
    s = sample_Sh(lambda a, b: np.full(np.shape(a), 2.5), g)
    np.testing.assert_allclose(s, 2.5, rtol=1e-15)
    X1, X2 = g.coords()
    s = sample_Sh(lambda a, b: b, g)
    np.testing.assert_allclose(s[:-1], X2[:-1] + g.h / 2, rtol=1e-13)
    np.testing.assert_allclose(s[-1], X2[-1], atol=1e-15)


def test_sample_fine_array_averages():
    g = GridSpec(4)
    fine = GridSpec(8)
    X1, X2 = fine.coords()
    f = X1 + 3 * X2
    s = sample_Sh(f, g)
    G1, G2 = g.coords()
    np.testing.assert_allclose(s[:-1], G1[:-1] + fine.h / 2 + 3 * (G2[:-1] + fine.h / 2), rtol=1e-13)
    with pytest.raises(ValueError):
        sample_Sh(np.zeros((10, 7)), g)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_sample_is_sup_contracting(vals):
    g = GridSpec(6)
    # piecewise-constant data in x1 with jumps inside cells
    edges = np.linspace(-1, 1, 7)

    def f(a, b):
        idx = np.clip(np.searchsorted(edges, a, side="right") - 1, 0, 5)
        return np.asarray(vals)[idx]

    s = sample_Sh(f, g)
    assert np.max(np.abs(s)) <= max(abs(v) for v in vals) + 1e-12


def test_interpolant_nodes_and_constant(rng):
    g = GridSpec(8)
    f = rng.standard_normal(g.shape)
    I = interpolate_Ih(f, g)
    X1, X2 = g.coords()
    np.testing.assert_array_equal(I(X1, X2), f)
    c = interpolate_Ih(np.full(g.shape, 0.25), g)
    np.testing.assert_allclose(c(rng.uniform(-1, 1, 50), rng.uniform(0, 3, 50)), 0.25, rtol=1e-15)
    with pytest.raises(DomainError):
        I(1.5, 0.0)


def test_interpolant_sup_is_node_max(rng):
    g = GridSpec(8)
    f = rng.standard_normal(g.shape)
    I = interpolate_Ih(f, g)
    a = np.linspace(-1, 1, 10 * (g.n1 - 1) + 1)
    b = np.linspace(0, 1, 10 * g.n2 + 1)
    A, B = np.meshgrid(a, b, indexing="ij")
    vals = I(A, B)
    assert np.max(np.abs(vals)) == pytest.approx(np.max(np.abs(f)), rel=1e-13)


def test_normalize_keeps_edges(rng, grid16):
    m = rng.standard_normal(grid16.shape + (3,))
    out = normalize(m)
    np.testing.assert_array_equal(out[0], m[0])
    assert max_norm_deviation(out[1:-1]) <= 1e-15


def test_shape_mismatch_rejected(grid16):
    with pytest.raises(ValueError):
        d1h(np.zeros((5, 5)), grid16)

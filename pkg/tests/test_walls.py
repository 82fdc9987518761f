import math

import numpy as np
import pytest

from thinfilm.energy import ModelParams, energy, energy_density
from thinfilm.errors import NoWallError, ResolutionError, ValidationError
from thinfilm.grid import GridSpec
from thinfilm.spectral import build_workspace
from thinfilm.walls import (
    VortexProbeResult, build_workspace_1d, concentration_fraction, concentration_report, detect_wall_center,
    extrude, neel_ansatz, phase_midpoint, profile_density, relax_field, relax_profile, straight_wall,
    tanh_profile, vortex_energy, vortex_probe, wall_energy_1d, wall_energy_asymptotic,
)


def test_straight_wall_values():
    g = GridSpec(8)
    m = straight_wall(0.0, 0.0, g)
    left = g.x1 < 0
    np.testing.assert_array_equal(m[left], np.broadcast_to([0.0, -1.0, 0.0], m[left].shape))
    np.testing.assert_array_equal(m[~left], np.broadcast_to([0.0, 1.0, 0.0], m[~left].shape))
    assert np.allclose(np.linalg.norm(straight_wall(0.3, 0.6, g), axis=-1), 1.0)
    with pytest.raises(ValidationError):
        straight_wall(1.5, 0.0, g)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.25, 0.7])
def test_detect_center_of_straight_wall(a):
    g = GridSpec(64)
    ws = build_workspace(g)
    p = ModelParams(0.1, 0.05)
    dens = energy_density(straight_wall(a, 0.0, g), p, ws)
    assert abs(detect_wall_center(dens, g) - a) <= g.h + 1e-12


def test_ansatz_endpoints_and_symmetry():
    for m1inf in (0.0, 0.5):
        prof = neel_ansatz(0.1, m1inf, 64)
        s = math.sqrt(1 - m1inf**2)
        np.testing.assert_array_equal(prof.values[0], [m1inf, -s])
        np.testing.assert_array_equal(prof.values[-1], [m1inf, s])
        np.testing.assert_allclose(prof.values[:, 0], prof.values[::-1, 0], atol=1e-14)
        np.testing.assert_allclose(prof.values[:, 1], -prof.values[::-1, 1], atol=1e-14)


def test_relaxation_lowers_energy_and_is_init_independent():
    n, d = 512, 0.1
    ws = build_workspace_1d(n)
    a = neel_ansatz(d, 0.0, n)
    r1 = relax_profile(a, d, ws)
    r2 = relax_profile(tanh_profile(d, 0.0, n), d, ws)
    assert r1.converged and r2.converged
    assert r1.energy <= wall_energy_1d(a, d, ws)
    assert wall_energy_1d(a, d, ws) <= 3 * r1.energy
    assert r1.energy == pytest.approx(r2.energy, rel=1e-2)
    assert r1.energy == pytest.approx(wall_energy_1d(r1, d, ws), rel=1e-12)


def test_profile_density_mass():
    n, d = 256, 0.1
    ws = build_workspace_1d(n)
    prof = relax_profile(neel_ansatz(d, 0.0, n), d, ws)
    dens = profile_density(prof, d, ws)
    scale = 2 / math.pi * d * abs(math.log(d))
    assert ws.h * dens.sum() == pytest.approx(scale * prof.energy, rel=1e-10)


def test_asymptotic_formula():
    assert wall_energy_asymptotic(0.1, 0.0) == pytest.approx(math.pi / (0.2 * math.log(10)), rel=1e-14)
    assert wall_energy_asymptotic(0.1, 0.0) == pytest.approx(6.822, abs=5e-4)
    assert wall_energy_asymptotic(0.1, 1 - 1e-9) < 1e-15
    d = 0.05
    assert wall_energy_asymptotic(d, 0.3) * d * abs(math.log(d)) == pytest.approx(math.pi / 2 * 0.7**2)


def test_detect_center_conventions():
    g = GridSpec(8)
    dens = np.zeros(g.n1)
    dens[5] = 1.0
    assert detect_wall_center(dens, g) == g.x1[5]
    dens = np.zeros(g.n1)
    dens[3] = dens[9] = 2.0
    assert detect_wall_center(dens, g) == pytest.approx(0.5 * (g.x1[3] + g.x1[9]))
    with pytest.raises(NoWallError):
        detect_wall_center(np.zeros(g.shape), g)


def test_concentration_fraction_trivial():
    g = GridSpec(16)
    rng = np.random.default_rng(1)
    dens = rng.random(g.shape)
    assert concentration_fraction(dens, 0.3, 2.0, g) == pytest.approx(1.0)
    col = np.zeros(g.shape)
    col[10] = 1.0
    assert concentration_fraction(col, g.x1[10], 1e-3, g) == 1.0
    with pytest.raises(ValidationError):
        concentration_fraction(dens, 0.0, 0.0, g)


def test_center_matches_phase_midpoint():
    n, d = 128, 0.05
    g = GridSpec(n)
    ws = build_workspace(g)
    prof = relax_profile(neel_ansatz(d, 0.0, n, center=0.2), d, build_workspace_1d(n))
    m = extrude(prof, g)
    p = ModelParams(d, 0.02)
    x = detect_wall_center(energy_density(m, p, ws), g)
    assert abs(x - phase_midpoint(m, g)) <= 2 * g.h
    rep = concentration_report(m, p, ws)
    assert rep.x1_star == x
    assert 0.0 < rep.mass_in_strip(0.2) <= rep.mass_in_strip(0.5) <= 1.0


def test_relax_field_descends():
    n, d = 32, 0.1
    g = GridSpec(n)
    ws = build_workspace(g)
    p = ModelParams(d, 0.05)
    m0 = extrude(tanh_profile(0.1, 0.0, n), g)
    rng = np.random.default_rng(3)
    m0[1:-1, :, 2] = 0.05 * rng.standard_normal((g.n1 - 2, g.n2))
    m0 /= np.linalg.norm(m0, axis=-1, keepdims=True)
    m, info = relax_field(m0, p, ws, tol=1e-10)
    assert info.energy <= energy(m0, p, ws).total
    np.testing.assert_array_equal(m[0], m0[0])
    np.testing.assert_array_equal(m[-1], m0[-1])
    assert np.max(np.abs(np.linalg.norm(m, axis=-1) - 1)) < 1e-13


def test_vortex_energy_properties():
    res = vortex_probe([0.2, 0.1, 0.05], 128)
    assert np.all(np.diff(res.energy) > 0)
    coarse = vortex_energy(0.1, 64)
    fine = vortex_energy(0.1, 256)
    assert coarse == pytest.approx(fine, rel=0.05)
    assert VortexProbeResult.continuum(0.1) == pytest.approx(2 * math.pi * math.log(10) + 7 * math.pi / 3)
    with pytest.raises(ResolutionError):
        vortex_energy(0.01, 64)
    with pytest.raises(ValidationError):
        vortex_probe([0.5], 64)


def test_profile_validation():
    with pytest.raises(ValidationError):
        neel_ansatz(0.7, 0.0, 32)
    with pytest.raises(ValidationError):
        extrude(neel_ansatz(0.1, 0.0, 16), GridSpec(32))

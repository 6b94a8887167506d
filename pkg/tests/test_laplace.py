"""Downwash specs, transforms, decay diagnostics, contour inversion."""
import numpy as np
import pytest

from possio import cheb
from possio import laplace as L
from possio.errors import ConfigError, ConvergenceError, DecayError, DomainError

GRID = cheb.cheb_grid(16)


def ones_profile(grid=GRID):
    return cheb.bounded_function(grid, np.ones(grid.n))


def test_harmonic_transform_closed_forms():
    # k = 0, s = 2: plain exponential integral, 1/2 exactly
    spec = L.harmonic_downwash(ones_profile(), 0.0)
    out = L.laplace_transform(spec, 2.0)
    assert np.allclose(out.values, 0.5, rtol=0, atol=1e-15)
    # w0(x) = x, k = 1, s = 1+i: the pole shift cancels the i
    spec = L.harmonic_downwash(
        cheb.bounded_function(GRID, GRID.nodes.astype(complex)), 1.0)
    out = L.laplace_transform(spec, 1 + 1j)
    assert np.allclose(out.values, GRID.nodes, rtol=1e-15, atol=1e-15)


def test_harmonic_transform_regridding():
    spec = L.harmonic_downwash(
        cheb.bounded_function(GRID, GRID.nodes**2 + 0j), 0.0)
    fine = cheb.cheb_grid(40)
    out = L.laplace_transform(spec, 1.0, fine)
    assert out.grid.n == 40
    assert np.allclose(out.values, fine.nodes**2, rtol=0, atol=1e-13)


def test_time_sample_transform_quadrature():
    t = np.arange(0.0, 20.0, 1e-3)
    spec = L.time_sample_downwash(t, np.zeros(1), np.exp(-t)[:, None])
    got = L.laplace_transform(spec, 1.0, GRID).values
    assert np.abs(got - 0.5).max() < 1e-6
    with pytest.raises(DomainError):
        L.laplace_transform(spec, -1.0 + 1j, GRID)


def test_time_sample_decay_gate():
    t = np.linspace(0.0, 10.0, 200)
    with pytest.raises(DecayError):
        L.time_sample_downwash(t, np.zeros(1), np.ones((200, 1)))


def test_closure_catalog():
    prof = lambda x: np.ones_like(x)
    step = L.step_downwash(prof)
    dec = L.decaying_downwash(prof, 2.0)
    s = 1.5 + 0.5j
    assert np.allclose(L.laplace_transform(step, s, GRID).values, 1.0 / s)
    assert np.allclose(L.laplace_transform(dec, s, GRID).values, 1.0 / (s + 2.0))
    assert step.closure_name == "step"
    assert dec.closure_name == "decaying-exponential"
    with pytest.raises(ConfigError):
        L.decaying_downwash(prof, -1.0)


def test_harmonic_bypass_point():
    spec = L.harmonic_downwash(ones_profile(), 0.5)
    assert L.harmonic_solve_point(spec) == 0.1 + 0.5j
    assert L.harmonic_solve_point(spec, 0.05) == 0.05 + 0.5j


def test_decay_hypothesis_zero_transform():
    spec = DummyZero = L.DownwashSpec(
        mode=L.LAPLACE_CLOSURE, closure=lambda x, s: np.zeros_like(x, dtype=complex))
    rep = L.check_decay_hypothesis(spec, GRID, sigma=1.0)
    assert rep.met.all()
    assert rep.crossover_nu is None
    assert rep.met_beyond_nu == rep.nu_grid[0]


def test_decay_hypothesis_harmonic_violation():
    spec = L.harmonic_downwash(ones_profile(), 0.5)
    rep = L.check_decay_hypothesis(spec, GRID, sigma=1.0)
    # 1/|nu| decay loses to a double exponential almost immediately
    assert rep.crossover_nu is not None
    assert not rep.met[-1]
    assert rep.met_beyond_nu is None


def test_decay_hypothesis_compact_support():
    def closure(x, s):
        return (np.abs(s.imag) <= 2.0) * np.ones_like(x, dtype=complex)

    spec = L.DownwashSpec(mode=L.LAPLACE_CLOSURE, closure=closure)
    rep = L.check_decay_hypothesis(spec, GRID, sigma=1.0,
                                   nu_grid=np.linspace(0, 5, 26))
    assert rep.met_beyond_nu is not None
    assert rep.met_beyond_nu <= 2.3


def test_contour_grid_validation():
    g = L.contour_grid(1.0, 10.0, 0.5)
    assert g.nu.size == 41
    assert g.nu[0] == -10.0 and g.nu[-1] == 10.0
    assert g.d_nu == 0.5
    with pytest.raises(ConfigError):
        L.contour_grid(-1.0, 10.0, 0.5)
    with pytest.raises(ConfigError):
        L.ContourGrid(1.0, np.array([-1.0, 0.0, 0.5, 1.0]))   # nonuniform
    with pytest.raises(ConfigError):
        L.ContourGrid(1.0, np.array([-1.0, -0.5, 0.0, 0.5]))  # asymmetric
    with pytest.raises(ConfigError):
        L.ContourGrid(1.0, np.array([-1.5, -0.5, 0.5, 1.5]))  # even, no zero


def test_bromwich_closed_form_pair():
    # the slow 1/nu falloff of this transform demands a wide, fine contour
    vals = {}
    for sigma in (1.0, 1.5):
        g = L.contour_grid(sigma, nu_max=1.6e5, d_nu=0.25)
        v = L.bromwich_invert(g, 1.0 / (g.points + 1.0), 1.0)
        assert abs(v - np.exp(-1)) < 1e-4 * np.exp(-1)
        vals[sigma] = v
    assert abs(vals[1.0] - vals[1.5]) < 1e-4 * np.exp(-1)


def test_bromwich_zero_and_shapes():
    g = L.contour_grid(1.0, 20.0, 0.25)
    assert L.bromwich_invert(g, np.zeros(g.nu.size), 1.0) == 0.0
    out = L.bromwich_invert(g, np.zeros((g.nu.size, 3)), np.array([0.5, 1.0]),
                            check=False)
    assert out.shape == (2, 3)


def test_bromwich_conjugate_symmetric_is_real():
    g = L.contour_grid(0.8, 500.0, 0.25)
    f = 1.0 / (g.points + 2.0) ** 2      # inverse transform t e^{-2t}
    got = L.bromwich_invert(g, f, np.array([0.5, 1.0, 1.5]))
    exact = np.array([t * np.exp(-2 * t) for t in (0.5, 1.0, 1.5)])
    assert np.abs(got.imag).max() < 1e-8 * np.abs(got.real).max()
    assert np.abs(got.real - exact).max() < 1e-5


def test_bromwich_gate_rejects_undersized_contour():
    g = L.contour_grid(1.0, 50.0, 0.25)
    with pytest.raises(ConvergenceError):
        L.bromwich_invert(g, 1.0 / (g.points + 1.0), 1.0)


def test_mirror_half_samples():
    g = L.contour_grid(0.8, 500.0, 0.25)
    f = 1.0 / (g.points + 2.0) ** 2
    half = f[g.half_indices]
    assert np.abs(L.mirror_half_samples(g, half, parity=1) - f).max() == 0.0
    with pytest.raises(ConfigError):
        L.mirror_half_samples(g, half[:-1], parity=1)


def test_round_trip_time_samples():
    # numeric transform of e^{-t} followed by numeric inversion
    t = np.arange(0.0, 20.0, 1e-3)
    spec = L.time_sample_downwash(t, np.zeros(1), np.exp(-t)[:, None])
    grid = cheb.cheb_grid(4)
    g = L.contour_grid(0.3, nu_max=2400.0, d_nu=0.25)
    half_pts = g.points[g.half_indices]
    half = np.array([L.laplace_transform(spec, s, grid).values[0]
                     for s in half_pts])
    samples = L.mirror_half_samples(g, half, parity=1)
    t_eval = np.array([0.5, 1.0, 2.0, 3.0])
    got = L.bromwich_invert(g, samples, t_eval, check=False)
    assert np.abs(got - np.exp(-t_eval)).max() < 1e-3
    assert np.abs(got.imag).max() < 1e-8

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conedbar import kernels
from conedbar.quadrature import (
    ChartField,
    DiscGrid,
    bump,
    cauchy_transform,
    dbar_polar,
    disc_kernel_integral,
    exterior_moments,
    polar_gauss_rule,
    smooth_step,
)


def test_grid_weights_integrate_area():
    g = DiscGrid(1.5, 40)
    assert g.n_theta == 8 * int(np.ceil(np.pi * 40 / 4))
    assert abs(np.sum(g.weights) - np.pi * 1.5**2) < 1e-12


def test_gauss_rule_integrates_radial_polynomials():
    pts, w = polar_gauss_rule(1.0, 12, 24)
    # int_disc |t|^4 dA = 2 pi / 6
    assert abs(np.sum(w * np.abs(pts) ** 4) - np.pi / 3) < 1e-13


def test_kernel_integral_is_cauchy_transform_of_one():
    # I1 = abar inside; outside, the exterior moment c_1 = area / pi = R^2
    a = np.array([0.3 + 0.2j, -0.5j, 2.0 + 1.0j])
    ref = np.where(np.abs(a) < 1, np.conj(a), 1 / a)
    assert np.allclose(disc_kernel_integral(a, 1.0), ref, atol=1e-15)


def test_transform_of_tbar():
    # I(tbar)(a) = abar^2 / 2 inside and 1 / (2 a^2) outside (Cauchy-Pompeiu residues)
    grid = DiscGrid(1.0, 64)
    g = ChartField.from_function(grid, np.conj)
    a = np.array([0.2 + 0.1j, -0.4 + 0.3j, 0.6j, 1.5, -2.0j])
    ref = np.where(np.abs(a) < 1, np.conj(a) ** 2 / 2, 1 / (2 * a**2))
    assert np.max(np.abs(cauchy_transform(g, a) - ref)) < 1e-3


def test_transform_converges_at_second_order():
    f = lambda t: np.conj(t) * np.cos(t)
    a = np.array([0.25 + 0.25j, -0.375 + 0.125j])
    vals = [cauchy_transform(ChartField.from_function(DiscGrid(1.0, n), f), a) for n in (16, 32, 64, 128)]
    err = [np.max(np.abs(v - vals[-1])) for v in vals[:-1]]
    assert np.log2(err[0] / err[1]) > 1.7


def test_exterior_moments_match_transform_far_out():
    grid = DiscGrid(1.0, 48)
    g = ChartField.from_function(grid, lambda t: np.conj(t) ** 2 + t)
    c = exterior_moments(g, 12)
    a = np.array([3.0 + 1j, -2.5j])
    series = sum(c[j] * a ** -(j + 1) for j in range(12))
    assert np.max(np.abs(series - cauchy_transform(g, a))) < 1e-10


def test_dbar_stencil_on_polynomial():
    u = lambda t: np.conj(t) ** 3 * t
    a = np.array([0.4 + 0.3j, -0.2j])
    exact = 3 * np.conj(a) ** 2 * a
    assert np.max(np.abs(dbar_polar(u, a, 1e-3, 1e-3) - exact)) < 1e-9


def test_bump_and_step_properties():
    assert bump(0.0) == 1.0 and bump(1.0) == 0.0
    x = np.linspace(-1, 1, 41)
    assert np.allclose(smooth_step(x, 0.5) + smooth_step(-x, 0.5), 1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40), st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_backends_agree(n_targets, k, seed):
    rng = np.random.default_rng(seed)
    grid = DiscGrid(1.0, 12)
    vals = rng.normal(size=(grid.size, k)) + 1j * rng.normal(size=(grid.size, k))
    tg = rng.normal(size=n_targets) + 1j * rng.normal(size=n_targets)
    tv = rng.normal(size=(n_targets, k)) + 0j
    ref = kernels.cauchy_sum_numpy(grid.nodes, grid.weights, vals, tg, tv)
    got = kernels.cauchy_sum(grid.nodes, grid.weights, vals, tg, tv)
    assert np.max(np.abs(got - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))


def test_pure_backend_switch(monkeypatch):
    monkeypatch.setenv("CONEDBAR_PURE", "1")
    assert kernels.backend() == "numpy"


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        DiscGrid(1.0, 0)

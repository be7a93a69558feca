import numpy as np
import pytest

from conedbar.cp1_dbar import (
    BundleForm,
    CechObstruction,
    DiscGrid,
    cech_obstruction,
    cocycle_form,
    fd_residual,
    holder_quotient_cp1,
    holomorphic_section_dimension,
    manufactured_section,
    obstruction_dimension,
    solve_bundle_cp1,
    solve_scalar_cp1,
    weak_residual_cp1,
)
from conedbar.obstruction import rr_dims

N_R = 32


@pytest.mark.parametrize("m", [0, 1, -1])
def test_manufactured_forms_solved(m):
    _, g = manufactured_section(m, seed=3)
    u = solve_bundle_cp1(g, N_R)
    assert fd_residual(u, g, DiscGrid(1.0, N_R)) < 5e-3
    assert u.transition_defect() < 1e-10


def test_manufactured_data_is_compatible():
    f, g = manufactured_section(2, seed=1)
    assert f.transition_defect() < 1e-12
    assert g.transition_defect() < 1e-12


def test_scalar_solution_weak_across_seam():
    _, g = manufactured_section(0, seed=3)
    u = solve_scalar_cp1(g, N_R)
    assert weak_residual_cp1(u.chart_a_global, g.chart_a_global) < 1e-3


def test_incompatible_seam_rejected():
    g = BundleForm(0, lambda t: np.ones(np.shape(t), dtype=complex), lambda t: np.zeros(np.shape(t), dtype=complex))
    with pytest.raises(ValueError, match="seam"):
        solve_scalar_cp1(g, N_R)


def test_negative_degree_refused_by_solver():
    with pytest.raises(ValueError):
        solve_bundle_cp1(cocycle_form(-3), N_R)


@pytest.mark.parametrize("m,power", [(-2, 1), (-3, 1), (-3, 2), (-4, 3)])
def test_cocycle_class_is_unit_vector(m, power):
    obs, _ = cech_obstruction(cocycle_form(m, power), N_R)
    target = np.zeros(-m - 1)
    target[power - 1] = 1.0
    assert np.max(np.abs(obs.values - target)) < 1e-4


def test_exact_forms_have_zero_class():
    _, g = manufactured_section(-3, seed=2)
    obs, u = cech_obstruction(g, N_R)
    assert obs.is_zero(1e-4)
    assert fd_residual(u, g, DiscGrid(1.0, N_R)) < 5e-3


@pytest.mark.parametrize("m", range(-5, 3))
def test_obstruction_dimension_matches_riemann_roch(m):
    assert obstruction_dimension(m, n_r=24) == rr_dims(0, m)[1]


@pytest.mark.parametrize("m", range(-2, 4))
def test_holomorphic_sections_match_riemann_roch(m):
    assert holomorphic_section_dimension(m) == rr_dims(0, m)[0]


def test_obstruction_length_validated():
    with pytest.raises(ValueError):
        CechObstruction(-3, np.zeros(1))
    assert CechObstruction(-1).dimension == 0


def test_solution_is_holder_bounded():
    _, g = manufactured_section(0, seed=3)
    u = solve_scalar_cp1(g, N_R)
    q = holder_quotient_cp1(u, 0.5, n_pairs=1000)
    assert np.isfinite(q) and q < 10


def test_linearity():
    _, g1 = manufactured_section(1, seed=0)
    _, g2 = manufactured_section(1, seed=5)
    u = solve_bundle_cp1(g1 + g2.scale(2.0), N_R)
    u1, u2 = solve_bundle_cp1(g1, N_R), solve_bundle_cp1(g2, N_R)
    pts = np.array([0.2 + 0.3j, -0.6j, 0.7])
    assert np.allclose(u.f_a(pts), u1.f_a(pts) + 2 * u2.f_a(pts), atol=1e-10)

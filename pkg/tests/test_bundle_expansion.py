import numpy as np
import pytest

from conedbar.basefunc import TB, Numeric, Sym, T
from conedbar.bundle_expansion import (
    BundleAreaForm,
    PreconditionError,
    TruncationError,
    fd_residual_disc,
    fiber_radius,
    regularize_pullback,
    series_coefficients,
    solve_dbar_k,
)
from conedbar.cone_solver import generate_test_form
from conedbar.cp1_dbar import cocycle_form
from conedbar.fiber import FiberExpansion, OneForm
from conedbar.quadrature import DiscGrid

N_R = 32


def dtbar_form(e, terms, k=0):
    return BundleAreaForm.from_chart_a(k, e, OneForm(FiberExpansion(terms), None))


@pytest.mark.parametrize("e", [1, 2])
def test_fiber_radius_matches_ball(e):
    # the point (t, rho(t)) lies on the sphere |z| = 1
    t = np.array([0.3 + 0.1j, 0.9j, 0.0])
    rho = fiber_radius(e)(t)
    z = rho[:, None] * t[:, None] ** np.arange(e + 1)[None, :]
    assert np.allclose(np.linalg.norm(z, axis=1), 1.0)


@pytest.mark.parametrize("e", [1, 2])
def test_series_coefficients_reassemble(e):
    w = dtbar_form(e, {(0, 0): Sym(T * TB**2), (1, 1): Sym(TB), (3, 3): Sym(2 * TB * T**2)})
    series = series_coefficients(w, 0, mu_max=6)
    t = np.array([0.2 + 0.3j, -0.6 + 0.1j, 0.9])
    s = 0.5 * fiber_radius(e)(t)[:, None] * np.exp(1j * np.array([0.1, 1.7, 3.3]))[None, :]
    for which in "AB":
        ref = w.chart(which).base.evaluate(t, s)
        assert np.max(np.abs(series.reassemble(which, t, s) - ref)) < 1e-10


def test_non_holomorphic_coefficient_rejected():
    w = dtbar_form(1, {(-1, 1): Sym(TB)})
    with pytest.raises(PreconditionError, match="not holomorphic"):
        series_coefficients(w, 0)


def test_mode_below_weight_rejected():
    w = dtbar_form(1, {(-1, -1): Sym(TB)})
    with pytest.raises(PreconditionError, match="below the weight"):
        series_coefficients(w, 0)


def test_truncation_reported():
    w = dtbar_form(1, {(6, 6): Sym(TB)})
    with pytest.raises(TruncationError):
        solve_dbar_k(w, 0, mu_max=3, n_r=16)


def test_zero_form():
    eta, rep = solve_dbar_k(BundleAreaForm(0, 2), n_r=16)
    assert eta.at(np.array([0.3]), np.array([0.1]))[0] == 0
    assert rep.clean and not rep.entries


def test_cocycle_in_negative_weight_is_obstructed():
    g = cocycle_form(-2, 1)
    w = dtbar_form(2, {(-1, -1): Numeric(g.g_a)}, k=-1)
    _, rep = solve_dbar_k(w, -1, mu_max=4, n_r=N_R)
    assert abs(rep.entries[-1].values[0] - 1) < 1e-4
    assert not rep.clean


@pytest.mark.parametrize("e,kind", [(1, "exact_smooth"), (2, "exact_smooth"), (2, "bounded_random")])
def test_solve_round_trip(e, kind):
    f = generate_test_form(kind, seed=1, degree=e)
    w = f.upstairs
    eta, rep = solve_dbar_k(w.with_weight(0), 0, mu_max=8, n_r=N_R)
    assert rep.clean
    grid = DiscGrid(1.0, N_R)
    assert fd_residual_disc(eta, w, grid.h, grid.dtheta) < 1e-2


def test_regularization_identity():
    # dbar(u0 - u1) = w - omega1, and omega1 lives in weight 1
    w = generate_test_form("bounded_random", seed=0, degree=2).upstairs.with_weight(0)
    reg = regularize_pullback(w, n_r=N_R)
    assert reg.omega1.k == 1
    grid = reg.grid
    # cell corners of the local grid inside |t| < 0.7; the gluing annulus is left to the weak residual
    k = np.arange(N_R // 16, int(0.7 / grid.h) + 1)
    pts = ((k * grid.h)[:, None] * np.exp(1j * np.arange(8) * np.pi / 4)[None, :]).ravel()
    assert fd_residual_disc(reg.correction, w - reg.omega1, grid.h, grid.dtheta, points=pts) < 1e-3
    series_coefficients(reg.omega1, 1, mu_max=8)


def test_partition_must_fit_inside_discs():
    w = generate_test_form("exact_smooth", seed=0, degree=1).upstairs
    with pytest.raises(ValueError):
        regularize_pullback(w, n_r=16, radius=1.1, delta=np.log(1.3))


def test_contour_coefficient_dbar_is_exact_for_closed_form_data():
    from conedbar.quadrature import dbar_fd

    w = dtbar_form(2, {(1, 1): Sym(T * TB**2), (2, 2): Sym(TB**3 + T)})
    series = series_coefficients(w, 0, mu_max=4)
    t = np.array([0.2 + 0.3j, -0.6 + 0.1j, 0.9])
    for mu in (1, 2):
        f = series.coeffs[mu].g_a
        assert np.max(np.abs(f.dbar()(t) - dbar_fd(f, t, 1e-5))) < 1e-8

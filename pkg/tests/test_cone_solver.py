import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from conedbar import bundle_expansion as bx
from conedbar.cone_solver import (
    KINDS,
    AmbientFunction,
    ConeForm,
    ConeModel,
    ConeSample,
    Term,
    apex_growth,
    apex_oscillation,
    decay_exponent,
    generate_test_form,
    holder_quotient,
    lp_norm,
    norm_transfer_check,
    pullback_function,
    random_ambient_functions,
    solve_bounded,
    solve_l2,
    test_battery as make_battery,
    weak_dbar_residual,
)
from conedbar.fiber import FiberExpansion, dbar_scalar


def radial(e, beta):
    """|z|^{2 beta} pulled back to D."""
    zero = (0,) * (e + 1)
    return pullback_function(AmbientFunction(e, [Term(1, zero, zero, Fraction(beta))]))


def constant(e, c=1.0):
    f = FiberExpansion.monomial_term(0, 0, c)
    return bx.DiscFunction(e, f, f)


@pytest.mark.parametrize("e", [1, 2, 3])
def test_volume_is_degree_times_ball(e):
    # a degree-e cone meets the unit ball in volume e * pi^2 / 2
    assert lp_norm(constant(e), 2, cone=ConeModel(e)) ** 2 == pytest.approx(e * np.pi**2 / 2, rel=1e-12)


def test_flat_case_form_norm():
    # e = 1 is C^2 with the flat metric, where |dzbar_0| = 1
    cone = ConeModel(1)
    zero = (0, 0)
    w = ConeForm.from_ambient(cone, [AmbientFunction(1, [Term(1, zero, zero)]), AmbientFunction(1)])
    assert lp_norm(w, 2) ** 2 == pytest.approx(np.pi**2 / 2, rel=1e-12)
    assert lp_norm(w, np.inf) == pytest.approx(1.0, rel=1e-9)


def test_restricted_covector_is_shorter():
    cone = ConeModel(2)
    zero = (0, 0, 0)
    w = ConeForm.from_ambient(cone, [AmbientFunction(2, [Term(1, zero, zero)]), AmbientFunction(2), AmbientFunction(2)])
    assert lp_norm(w, 2) ** 2 < np.pi**2
    assert lp_norm(w, np.inf) <= 1 + 1e-9


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 50), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_norm_homogeneity(seed, c):
    w = generate_test_form("exact_smooth", seed, 2)
    for p in (2, np.inf):
        assert lp_norm(w.scale(c), p) == pytest.approx(abs(c) * lp_norm(w, p), rel=1e-10)


def test_scalar_norm_needs_cone():
    with pytest.raises(ValueError):
        lp_norm(constant(1), 2)


@pytest.mark.parametrize("e", [1, 2])
def test_ambient_pullback_commutes_with_dbar(e):
    (u,) = random_ambient_functions(e, 1, seed=4)
    w = ConeForm.from_ambient(ConeModel(e), u.dbar())
    pot = pullback_function(u)
    t = np.array([0.3 + 0.2j, -0.7j])
    s = np.array([[0.1, 0.2j], [-0.3, 0.05 + 0.1j]])
    for chart in "AB":
        lhs = dbar_scalar(pot.chart(chart)).evaluate(t, s)
        rhs = w.upstairs.chart(chart).evaluate(t, s)
        assert np.allclose(lhs[0], rhs[0], atol=1e-12) and np.allclose(lhs[1], rhs[1], atol=1e-12)


@pytest.mark.parametrize("kind,rate", [("exact_smooth", -1.0), ("exact_singular", 0.5), ("bounded_random", 0.0)])
def test_apex_growth(kind, rate):
    assert apex_growth(generate_test_form(kind, 0, 2)) == pytest.approx(rate, abs=0.02)


def test_unknown_kind():
    with pytest.raises(ValueError, match="unknown"):
        generate_test_form("nope")


@pytest.mark.parametrize("e", [1, 2])
def test_holder_of_square_root_radius(e):
    # ||z|^1/2 - |w|^1/2| <= |z - w|^1/2
    q = holder_quotient(radial(e, Fraction(1, 4)), ConeModel(e), alpha=0.5, n_pairs=4000)
    assert 0.5 < q <= 1 + 1e-6


def test_holder_of_radius_and_constant():
    cone = ConeModel(2)
    assert holder_quotient(radial(2, Fraction(1, 2)), cone, alpha=0.5, n_pairs=4000) <= np.sqrt(2) + 1e-6
    assert holder_quotient(constant(2, 3.0), cone, alpha=0.5, n_pairs=4000, apex_value=3.0) == 0.0


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.3])
def test_holder_exponent_validated(alpha):
    with pytest.raises(ValueError):
        holder_quotient(constant(1), ConeModel(1), alpha=alpha)


def test_apex_oscillation_decay():
    sample = ConeSample(ConeModel(2))
    deltas = 0.5 ** np.arange(1, 6)
    osc = apex_oscillation(radial(2, Fraction(1, 2)), deltas=deltas, sample=sample)
    assert np.all(osc <= deltas + 1e-12)
    assert decay_exponent(deltas, osc) == pytest.approx(1.0, abs=0.1)
    assert decay_exponent(deltas, np.zeros(5)) == float("inf")


def test_norm_transfer_flat_case_exact():
    (lo, hi), skipped = norm_transfer_check(ConeModel(1), random_ambient_functions(1, 6, seed=2))
    assert skipped == 0
    assert lo == pytest.approx(1.0, abs=1e-8) and hi == pytest.approx(1.0, abs=1e-8)


def test_norm_transfer_comparable_for_quadric():
    (lo, hi), _ = norm_transfer_check(ConeModel(2), random_ambient_functions(2, 6, seed=2))
    assert 1.0 - 1e-8 <= lo <= hi <= 6.0 + 1e-8
    assert hi - lo > 1e-3


def test_potential_has_small_weak_residual():
    f = generate_test_form("bounded_random", 0, 2)
    battery = make_battery(2)
    assert weak_dbar_residual(f.potential, f, battery) < 1e-4
    assert weak_dbar_residual(None, None, battery) == 0.0


def test_zero_inputs_give_zero_reports():
    f = generate_test_form("exact_smooth", 0, 2).scale(0.0)
    for rep in (solve_l2(f, n_r=16), solve_bounded(f, n_r=16)):
        assert rep.clean and rep.residual == 0.0 and rep.constant_estimate == 0.0


def test_bounded_pipeline_rejects_singular_form():
    with pytest.raises(bx.PreconditionError, match="unbounded"):
        solve_bounded(generate_test_form("exact_singular", 0, 2), n_r=16)


def test_bounded_pipeline_refuses_failed_hypothesis():
    with pytest.raises(bx.PreconditionError, match="hypothesis"):
        solve_bounded(generate_test_form("bounded_random", 0, 2), n_r=16, genus=2)


def test_l2_pipeline_small_grid():
    f = generate_test_form("exact_singular", 1, 2)
    rep = solve_l2(f, n_r=16)
    assert rep.clean
    assert rep.residual < 1e-2
    assert 0 < rep.constant_estimate < 2
    assert set(rep.as_dict()) >= {"l2_in", "l2_out", "residual", "obstruction"}


def test_kinds_listed():
    assert KINDS == ("exact_smooth", "exact_singular", "bounded_random")

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from conedbar.basefunc import TB, LogRadialStep, Numeric, Sym, T, cauchy_t
from conedbar.fiber import FiberExpansion, LogTermError, OneForm, dbar_scalar, monomial
from conedbar.quadrature import ChartField, DiscGrid, cauchy_transform


def fd_dbar_s(f, s, h=1e-6):
    return 0.5 * ((f(s + h) - f(s - h)) + 1j * (f(s + 1j * h) - f(s - 1j * h))) / (2 * h)


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.fractions(0, 5, max_denominator=4))
def test_dbar_fiber_rule_matches_differences(n, g):
    f = FiberExpansion.monomial_term(n, g + 1)
    d = f.dbar_fiber()
    s = np.array([0.3 + 0.4j, -0.5 + 0.1j])
    t = np.zeros(2)
    fd = fd_dbar_s(lambda x: f.evaluate(t, x), s)
    assert np.allclose(d.evaluate(t, s), fd, atol=1e-7)


@pytest.mark.parametrize("key", [(0, 0), (0, Fraction(1, 2)), (1, 1), (2, 2), (-1, 1), (1, Fraction(-1, 2))])
def test_fiber_cauchy_transform_matches_disc_quadrature(key):
    # closed form versus the planar quadrature of the same integral on |s| < 0.8
    radius = 0.8
    f = FiberExpansion.monomial_term(*key)
    p = f.cauchy_fiber(radius)
    grid = DiscGrid(radius, 96)
    field = ChartField.from_function(grid, lambda s: monomial(key[0], key[1], s))
    s = np.array([0.31 + 0.17j, -0.22 + 0.4j])
    ref = cauchy_transform(field, s)
    got = p.evaluate(np.zeros(2), s)
    assert np.max(np.abs(got - ref)) < 2e-3


def test_log_term_rejected():
    with pytest.raises(LogTermError):
        FiberExpansion.monomial_term(2, 0).cauchy_fiber(1.0)


def test_convert_chart_agrees_pointwise():
    e = 2
    f = FiberExpansion({(1, 1): Sym(TB), (0, 2): Sym(T + 1), (-1, 1): Sym(T * TB)})
    g = f.convert_chart(e)
    t = np.array([0.6 + 0.9j, 1.3 - 0.2j])
    s = np.array([0.2 + 0.1j, -0.05j])
    assert np.allclose(f.evaluate(t, s), g.evaluate(1 / t, t**e * s), rtol=1e-13)


def test_form_convert_chart_is_pullback():
    e = 3
    u = FiberExpansion({(0, 2): Sym(TB), (1, 1): Sym(T**2)})
    w = dbar_scalar(u)
    w_other = w.convert_chart(e)
    u_other = u.convert_chart(e)
    t = np.array([0.7 + 0.4j])
    s = np.array([0.1 - 0.3j])
    lhs = w_other.evaluate(1 / t, t**e * s)
    rhs = dbar_scalar(u_other).evaluate(1 / t, t**e * s)
    assert np.allclose(lhs[0], rhs[0]) and np.allclose(lhs[1], rhs[1])


def test_closedness_of_exact_forms():
    u = FiberExpansion({(0, 2): Sym(TB * T), (1, 3): Sym(TB**2)})
    d = dbar_scalar(u).closedness_defect()
    t, s = np.array([0.2 + 0.1j]), np.array([0.3j])
    assert np.max(np.abs(d.evaluate(t, s))) < 1e-14


def test_shift_and_monomial_at_zero():
    f = FiberExpansion.monomial_term(0, 0, 2.0).shift(1, 1)
    assert f.evaluate(np.array([0.0]), np.array([0.0]))[0] == 0
    assert np.isnan(monomial(-1, -1, np.array([0.0]))[0])


def test_partition_of_unity():
    chi = LogRadialStep(np.log(1.3))
    t = np.array([0.5, 0.9 + 0.3j, 1.1j, 2.0])
    assert np.allclose(chi(t) + chi(1 / t), 1.0)
    assert np.allclose(chi(t) + chi.inverted()(t), 1.0)


def test_cauchy_t_solves_dbar():
    grid = DiscGrid(1.0, 48)
    (ct,) = cauchy_t(grid, [Sym(T * TB)])
    pts = np.array([0.3 + 0.2j, -0.1 + 0.5j])
    h = 1e-4
    fd = 0.5 * ((ct(pts + h) - ct(pts - h)) + 1j * (ct(pts + 1j * h) - ct(pts - 1j * h))) / (2 * h)
    assert np.max(np.abs(fd - pts * np.conj(pts))) < 5e-3


def test_numeric_coefficients_evaluate():
    n = Numeric(lambda t: 2 * t)
    f = FiberExpansion.holomorphic(1, n)
    assert np.allclose(f.evaluate(np.array([1.0]), np.array([0.5])), 1.0)
    assert OneForm().is_zero


@pytest.mark.parametrize("sign", [1, -1])
def test_cutoff_second_dbar_matches_differences(sign):
    from conedbar.quadrature import dbar_fd

    d = LogRadialStep(np.log(1.3), sign).dbar()
    t = np.array([0.85 + 0.1j, 1.1j, -1.2 + 0.1j, 0.95, 0.5])
    assert np.max(np.abs(d.dbar()(t) - dbar_fd(d, t, 1e-6))) < 1e-7

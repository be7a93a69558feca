import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from conedbar.geometry import (
    ChartPoint,
    ConeModel,
    blowup_map,
    chart_transition,
    distance_bounds,
    distortion_profile,
    gram_matrix,
    inverse_chart,
    pullback_form,
    pushforward_function,
    volume_distortion,
)

cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def symbolic_u(e):
    # independent route: Gram determinant of the Jacobian columns at a real point t = r, s = 1
    # (u depends on |t|^2 only, and det G is |s|^2 times it)
    r = sp.Symbol("r", positive=True)
    x = sp.Symbol("x", nonnegative=True)
    d_base = sp.Matrix([j * r ** (j - 1) if j else 0 for j in range(e + 1)])
    d_fiber = sp.Matrix([r**j for j in range(e + 1)])
    J = sp.Matrix.hstack(d_base, d_fiber)
    det = sp.expand((J.T * J).det())
    return sp.expand(det.subs(r, sp.sqrt(x))), x


@pytest.mark.parametrize("e", [1, 2, 3, 4])
def test_image_satisfies_cone_relations(e):
    cone = ConeModel(e)
    rng = np.random.default_rng(e)
    t = rng.normal(size=50) + 1j * rng.normal(size=50)
    s = rng.normal(size=50) + 1j * rng.normal(size=50)
    for chart in "AB":
        assert cone.relation_residual(blowup_map(cone, chart, t, s)) < 1e-13


def test_degree_must_be_positive():
    with pytest.raises(ValueError):
        ConeModel(0)


@settings(max_examples=50, deadline=None)
@given(cplx.filter(lambda z: abs(z) > 1e-3), cplx, st.integers(1, 5))
def test_chart_change_is_an_involution(t, s, e):
    cone = ConeModel(e)
    p = ChartPoint("A", t, s)
    q = p.to_other(cone).to_other(cone)
    assert abs(q.base - t) < 1e-9 * max(1, abs(t)) and abs(q.fiber - s) < 1e-9 * max(1, abs(s))
    assert np.allclose(blowup_map(cone, p), blowup_map(cone, p.to_other(cone)))


def test_chart_transition_arrays():
    cone = ConeModel(3)
    t, s = np.array([0.5 + 0.5j]), np.array([0.1j])
    tau, sig = chart_transition(cone, t, s)
    assert np.allclose(blowup_map(cone, "A", t, s), blowup_map(cone, "B", tau, sig))


@pytest.mark.parametrize("e", [1, 2, 3])
def test_inverse_chart_roundtrip(e):
    cone = ConeModel(e)
    rng = np.random.default_rng(0)
    t = 2 * (rng.normal(size=40) + 1j * rng.normal(size=40))
    s = rng.normal(size=40) + 1j * rng.normal(size=40)
    z = blowup_map(cone, "A", t, s)
    use_a, base, fiber = inverse_chart(cone, z)
    assert np.allclose(blowup_map(cone, "A", base, fiber)[use_a], z[use_a])
    assert np.allclose(blowup_map(cone, "B", base, fiber)[~use_a], z[~use_a])
    with pytest.raises(ValueError):
        inverse_chart(cone, np.zeros((1, e + 1)))


def test_pushforward_of_lifted_function():
    cone = ConeModel(2)
    f = lambda z: z[..., 0] * np.conj(z[..., 1]) + z[..., 2]
    lifted = lambda chart, b, s: f(blowup_map(cone, chart, b, s))
    z = blowup_map(cone, "A", np.array([0.3, 2.0 + 1j]), np.array([0.5j, 0.1]))
    assert np.allclose(pushforward_function(cone, lifted, z), f(z))


@pytest.mark.parametrize("e", [1, 2, 3, 4])
def test_volume_distortion_matches_symbolic_profile(e):
    cone = ConeModel(e)
    u, x = symbolic_u(e)
    prof = distortion_profile(cone, 1.0)
    assert sp.simplify(prof.u - u) == 0
    t = np.array([0.2 + 0.4j, -0.9, 0.5j])
    s = np.array([0.3, 0.1 - 0.2j, 1.2j])
    ref = np.abs(s) ** 2 * np.array([float(u.subs(x, abs(tv) ** 2)) for tv in t])
    assert np.allclose(volume_distortion(cone, "A", t, s), ref, rtol=1e-12)
    g = gram_matrix(cone, "A", t, s)
    assert np.allclose(np.real(np.linalg.det(g)), ref, rtol=1e-10)


def test_distortion_bounds_on_unit_disc():
    p1, p2 = distortion_profile(ConeModel(1), 1.0), distortion_profile(ConeModel(2), 1.0)
    assert (p1.c_min, p1.c_max) == (1.0, 1.0) and p1.is_squared_modulus
    # u = 1 + 4x + x^2 on [0, 1]
    assert (p2.c_min, p2.c_max) == (1.0, 6.0) and not p2.is_squared_modulus


def test_pullback_matches_fd_of_composition():
    # pullback of dbar f equals dbar of f o Pi, checked by central differences in t and s
    cone = ConeModel(2)
    f = lambda z: z[..., 0] * np.conj(z[..., 1]) ** 2 + np.conj(z[..., 2]) * z[..., 1]
    df = lambda z: np.stack([0 * z[..., 0], 2 * z[..., 0] * np.conj(z[..., 1]), z[..., 1]], axis=-1)
    t, s = np.array([0.3 + 0.2j]), np.array([0.4 - 0.1j])
    gb, gf = pullback_form(cone, df, "A", t, s)
    comp = lambda tt, ss: f(blowup_map(cone, "A", tt, ss))
    h = 1e-6
    dt = 0.5 * ((comp(t + h, s) - comp(t - h, s)) + 1j * (comp(t + 1j * h, s) - comp(t - 1j * h, s))) / (2 * h)
    ds = 0.5 * ((comp(t, s + h) - comp(t, s - h)) + 1j * (comp(t, s + 1j * h) - comp(t, s - 1j * h))) / (2 * h)
    assert abs(gb[0] - dt[0]) < 1e-8 and abs(gf[0] - ds[0]) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.lists(cplx, min_size=6, max_size=6))
def test_distance_bounds_order(v):
    z, w = np.array(v[:3]), np.array(v[3:])
    lo, hi = distance_bounds(z, w)
    assert lo <= hi + 1e-15


def test_distance_on_one_ruling_is_exact():
    z = np.array([1.0, 0.5j, -0.25])
    lo, hi = distance_bounds(z, -0.3 * z)
    assert abs(lo - hi) < 1e-15

"""Rational normal cones Y_e and their resolution by one blow-up.

Y_e is the image of (t, s) -> s (1, t, ..., t^e) in C^{e+1}.  The blow-up of the
apex is the total space of O(-e) over CP^1, covered by two charts:

* chart A: (t, s) -> s (1, t, t^2, ..., t^e)
* chart B: (tau, sigma) -> sigma (tau^e, ..., tau, 1)

with transition tau = 1/t, sigma = t^e s.  The exceptional curve X is {s = 0}.
"""
from dataclasses import dataclass, field

import numpy as np
import sympy as sp


@dataclass(frozen=True)
class ConeModel:
    degree: int

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")

    @property
    def ambient_dim(self):
        return self.degree + 1

    @property
    def sing_order(self):
        """Vanishing order k0 of the Jacobian factor along X (= dim Y - 1 = 1)."""
        return 1

    def relations(self):
        """Index quadruples (i, j, k, l) with i + j = k + l, i.e. z_i z_j = z_k z_l on Y_e."""
        e = self.degree
        out = []
        for i in range(e + 1):
            for j in range(i, e + 1):
                for k in range(i + 1, e + 1):
                    l = i + j - k
                    if k <= l <= e and (k, l) != (i, j):
                        out.append((i, j, k, l))
        return out

    def relation_residual(self, z):
        """Largest relative violation of the cone relations over the points ``z`` (..., e+1)."""
        z = np.asarray(z, dtype=complex)
        scale = np.sum(np.abs(z) ** 2, axis=-1)
        worst = 0.0
        for i, j, k, l in self.relations():
            r = np.abs(z[..., i] * z[..., j] - z[..., k] * z[..., l])
            with np.errstate(invalid="ignore", divide="ignore"):
                rel = np.where(scale > 0, r / np.where(scale > 0, scale, 1.0), r)
            worst = max(worst, float(np.max(rel, initial=0.0)))
        return worst


@dataclass(frozen=True)
class ChartPoint:
    chart: str
    base: complex
    fiber: complex

    def __post_init__(self):
        if self.chart not in ("A", "B"):
            raise ValueError(f"chart must be 'A' or 'B', got {self.chart!r}")

    def to_other(self, cone):
        """The same point in the other chart (requires base != 0)."""
        if self.base == 0:
            raise ValueError("chart transition undefined at base = 0")
        t = complex(self.base)
        other = "B" if self.chart == "A" else "A"
        return ChartPoint(other, 1 / t, t ** cone.degree * self.fiber)


def chart_transition(cone, base, fiber):
    """(t, s) -> (1/t, t^e s); the map is its own inverse up to swapping charts."""
    base = np.asarray(base, dtype=complex)
    return 1 / base, base ** cone.degree * np.asarray(fiber, dtype=complex)


def _powers(base, e, reverse):
    base = np.asarray(base, dtype=complex)
    exps = np.arange(e + 1)
    if reverse:
        exps = exps[::-1]
    return base[..., None] ** exps


def blowup_map(cone, p_or_chart, base=None, fiber=None):
    """Ambient image of chart points; accepts a ChartPoint or (chart, base, fiber) arrays."""
    if isinstance(p_or_chart, ChartPoint):
        chart, base, fiber = p_or_chart.chart, p_or_chart.base, p_or_chart.fiber
    else:
        chart = p_or_chart
    e = cone.degree
    fiber = np.asarray(fiber, dtype=complex)
    return fiber[..., None] * _powers(base, e, reverse=(chart == "B"))


def chart_jacobian(cone, chart, base, fiber):
    """Complex Jacobian columns (d/dbase, d/dfiber), each of shape (..., e+1)."""
    e = cone.degree
    base = np.asarray(base, dtype=complex)
    fiber = np.asarray(fiber, dtype=complex)
    j = np.arange(e + 1)
    if chart == "B":
        j = j[::-1]
    # d/dbase of base^j, written to avoid 0 * base^-1 at base = 0
    safe = np.where(j >= 1, j - 1, 0)
    d_base = fiber[..., None] * j * base[..., None] ** safe
    d_fiber = base[..., None] ** j
    return d_base, d_fiber


def gram_matrix(cone, chart, base, fiber):
    """Hermitian Gram matrix G = A^H A of the chart parametrization, shape (..., 2, 2)."""
    a, b = chart_jacobian(cone, chart, base, fiber)
    g = np.empty(a.shape[:-1] + (2, 2), dtype=complex)
    g[..., 0, 0] = np.sum(np.abs(a) ** 2, axis=-1)
    g[..., 1, 1] = np.sum(np.abs(b) ** 2, axis=-1)
    g[..., 0, 1] = np.sum(np.conj(a) * b, axis=-1)
    g[..., 1, 0] = np.conj(g[..., 0, 1])
    return g


def volume_distortion(cone, p_or_chart, base=None, fiber=None):
    """det(A^H A): the ratio dV_Y / dV_chart (zero on the exceptional curve)."""
    if isinstance(p_or_chart, ChartPoint):
        chart, base, fiber = p_or_chart.chart, p_or_chart.base, p_or_chart.fiber
    else:
        chart = p_or_chart
    a, b = chart_jacobian(cone, chart, base, fiber)
    aa = np.sum(np.abs(a) ** 2, axis=-1)
    bb = np.sum(np.abs(b) ** 2, axis=-1)
    ab = np.sum(np.conj(a) * b, axis=-1)
    return np.maximum(aa * bb - np.abs(ab) ** 2, 0.0)


@dataclass
class DistortionProfile:
    """det G = |s|^2 u(|t|^2) with u a polynomial; bounds of u on |t| <= radius."""

    degree: int
    u: sp.Expr
    x: sp.Symbol
    region_radius: float
    c_min: float
    c_max: float
    is_squared_modulus: bool
    coefficients: list = field(default_factory=list)

    def __call__(self, xv):
        return np.polyval(self.coefficients[::-1], np.asarray(xv, dtype=float))


def distortion_polynomial(e):
    """Symbolic u(x) with det G = |s|^2 u(|t|^2) for Y_e."""
    x = sp.Symbol("x", nonnegative=True)
    s_sq = sum(j**2 * x ** (j - 1) for j in range(1, e + 1))
    s_0 = sum(x**j for j in range(e + 1))
    s_1 = sum(j * x ** (j - 1) for j in range(1, e + 1))
    u = sp.expand(s_sq * s_0 - x * s_1**2)
    return u, x


def distortion_profile(cone, region_radius):
    if region_radius < 0:
        raise ValueError("region_radius must be non-negative")
    u, x = distortion_polynomial(cone.degree)
    poly = sp.Poly(u, x)
    coeffs = [float(c) for c in reversed(poly.all_coeffs())]
    xmax = float(region_radius) ** 2
    candidates = [0.0, xmax]
    for r in sp.Poly(sp.diff(u, x), x).real_roots() if poly.degree() > 1 else []:
        rv = float(r)
        if 0.0 < rv < xmax:
            candidates.append(rv)
    vals = [float(u.subs(x, c)) for c in candidates]
    # u(|t|^2) = |J(t)|^2 for holomorphic J forces log u(|t|^2) to be harmonic in t
    lap = sp.simplify(sp.diff(x * sp.diff(sp.log(u), x), x))
    return DistortionProfile(
        degree=cone.degree,
        u=u,
        x=x,
        region_radius=float(region_radius),
        c_min=min(vals),
        c_max=max(vals),
        is_squared_modulus=bool(lap == 0),
        coefficients=coeffs,
    )


def pullback_form(cone, f, chart, base, fiber):
    """Components (g_base, g_fiber) of the pullback of sum_j f_j dzbar_j.

    ``f`` is either a callable z -> array (..., e+1) of coefficient values or an
    array of such values already evaluated at the image points.
    """
    a, b = chart_jacobian(cone, chart, base, fiber)
    if callable(f):
        fv = np.asarray(f(blowup_map(cone, chart, base, fiber)), dtype=complex)
    else:
        fv = np.asarray(f, dtype=complex)
    return np.sum(np.conj(a) * fv, axis=-1), np.sum(np.conj(b) * fv, axis=-1)


def inverse_chart(cone, z):
    """Chart coordinates of ambient points: chart A where |z_0| >= |z_e|, else chart B.

    Returns (is_chart_a, base, fiber).  Raises ValueError at the apex.
    """
    z = np.asarray(z, dtype=complex)
    e = cone.degree
    if np.any(np.all(z == 0, axis=-1)):
        raise ValueError("the apex has no preimage off the exceptional curve")
    use_a = np.abs(z[..., 0]) >= np.abs(z[..., e])
    z0 = np.where(use_a, z[..., 0], 1.0)
    ze = np.where(use_a, 1.0, z[..., e])
    base = np.where(use_a, z[..., 1] / z0, z[..., e - 1] / ze)
    fiber = np.where(use_a, z[..., 0], z[..., e])
    return use_a, base, fiber


def pushforward_function(cone, u, z):
    """Evaluate z -> u(pi^{-1}(z)) where ``u(chart, base, fiber)`` lives on the resolution."""
    use_a, base, fiber = inverse_chart(cone, z)
    out = np.empty(np.shape(base), dtype=complex)
    if np.any(use_a):
        out[use_a] = u("A", base[use_a], fiber[use_a])
    if np.any(~use_a):
        out[~use_a] = u("B", base[~use_a], fiber[~use_a])
    return out


def distance_bounds(z, w, ruling_tol=1e-12):
    """Certified bounds (lower, upper) on the intrinsic distance between cone points.

    The lower bound is the chord; the upper bound follows a complex ruling when
    both points share one, and otherwise goes through the apex.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    nz = np.linalg.norm(z, axis=-1)
    nw = np.linalg.norm(w, axis=-1)
    chord = np.linalg.norm(z - w, axis=-1)
    inner = np.abs(np.sum(np.conj(z) * w, axis=-1))
    wedge_sq = np.maximum(nz**2 * nw**2 - inner**2, 0.0)
    same_ruling = wedge_sq <= ruling_tol * np.maximum(nz**2 * nw**2, 1e-300)
    upper = np.where(same_ruling, chord, nz + nw)
    return chord, np.maximum(upper, chord)

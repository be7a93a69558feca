"""Polar quadrature on discs and the discrete Cauchy transform.

I g(a) = (1/pi) int_{|t|<R} g(t) / (a - t) dA(t) solves dbar(Ig) = g on the disc and
is holomorphic outside it.  The sum is singularity-subtracted to first order:

    I g(a) = (1/pi) sum_j w_j (g_j - g(a) - q (tbar_j - abar)) / (a - t_j)
             + g(a) conj(a) - q conj(a)^2 / 2,        q = dbar g(a),

for |a| < R; the subtracted terms are integrated exactly over the disc.  The
holomorphic first-order term needs no subtraction because the weights sum to
exactly pi R^2.  Outside the disc the plain sum is used.  Any value of q gives the
same integral; a good q makes the discrete integrand O(|t - a|) near the pole,
which moves the error from O(h^2) to about O(h^4) for smooth g.
"""
from dataclasses import dataclass, field

import numpy as np

from .kernels import cauchy_sum


@dataclass
class DiscGrid:
    radius: float
    n_r: int
    n_theta: int = 0
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_r < 1:
            raise ValueError("empty quadrature grid")
        if not self.n_theta:
            self.n_theta = 8 * int(np.ceil(np.pi * self.n_r / 4))
        if self.n_theta % 2:
            raise ValueError("n_theta must be even")
        dr = self.radius / self.n_r
        dth = 2 * np.pi / self.n_theta
        r = (np.arange(self.n_r) + 0.5) * dr
        th = np.arange(self.n_theta) * dth
        self.nodes = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
        self.weights = np.repeat(r * dr * dth, self.n_theta)

    @classmethod
    def from_h(cls, h, radius=1.0):
        return cls(radius, int(round(radius / h)))

    @property
    def h(self):
        return self.radius / self.n_r

    @property
    def dtheta(self):
        return 2 * np.pi / self.n_theta

    @property
    def size(self):
        return self.nodes.size

    def key(self):
        return (self.radius, self.n_r, self.n_theta)


@dataclass
class ChartField:
    """Samples of a function (or form component) at the nodes of a DiscGrid.

    ``func``, when given, is the exact callable the samples came from and is used
    for off-grid evaluation; otherwise values are interpolated bilinearly in (r, theta).
    """

    grid: DiscGrid
    values: np.ndarray
    func: object = None

    @classmethod
    def from_function(cls, grid, f):
        return cls(grid, np.asarray(f(grid.nodes), dtype=complex).reshape(grid.size), f)

    def at(self, points):
        points = np.asarray(points, dtype=complex)
        if self.func is not None:
            return np.asarray(self.func(points), dtype=complex)
        return self._interpolate(points)

    def _interpolate(self, points):
        g = self.grid
        dr = g.h
        vals = self.values.reshape(g.n_r, g.n_theta)
        r = np.abs(points)
        th = np.mod(np.angle(points), 2 * np.pi) / g.dtheta
        x = np.clip(r / dr - 0.5, 0.0, g.n_r - 1.0)
        i0 = np.minimum(np.floor(x).astype(int), g.n_r - 2) if g.n_r > 1 else np.zeros_like(x, dtype=int)
        fx = x - i0 if g.n_r > 1 else np.zeros_like(x)
        j0 = np.floor(th).astype(int) % g.n_theta
        fy = th - np.floor(th)
        j1 = (j0 + 1) % g.n_theta
        i1 = np.minimum(i0 + 1, g.n_r - 1)
        out = ((1 - fx) * (1 - fy) * vals[i0, j0] + (1 - fx) * fy * vals[i0, j1]
               + fx * (1 - fy) * vals[i1, j0] + fx * fy * vals[i1, j1])
        return np.where(r <= g.radius, out, 0.0)

    def __add__(self, other):
        return ChartField(self.grid, self.values + other.values)

    def __mul__(self, c):
        return ChartField(self.grid, self.values * c)

    __rmul__ = __mul__


def disc_kernel_integral(points, radius):
    """(1/pi) int_{|t|<R} dA / (a - t): conj(a) inside the disc, R^2 / a outside."""
    a = np.asarray(points, dtype=complex)
    inside = np.abs(a) < radius
    safe = np.where(inside, 1.0, a)
    return np.where(inside, np.conj(a), radius**2 / safe)


def dbar_fd(f, points, step=1e-5):
    """Central-difference dbar of a callable (used for the subtraction slope)."""
    a = np.asarray(points, dtype=complex)
    gx = (np.asarray(f(a + step), dtype=complex) - np.asarray(f(a - step), dtype=complex)) / (2 * step)
    gy = (np.asarray(f(a + 1j * step), dtype=complex) - np.asarray(f(a - 1j * step), dtype=complex)) / (2 * step)
    return 0.5 * (gx + 1j * gy)


def _slope_integral(points, radius):
    """(1/pi) int_{|t|<R} (tbar - abar) / (a - t) dA: -abar^2/2 inside, R^4/(2a^2) - abar R^2/a outside."""
    a = np.asarray(points, dtype=complex)
    inside = np.abs(a) < radius
    safe = np.where(inside, 1.0, a)
    ab = np.conj(a)
    return np.where(inside, -ab**2 / 2, radius**4 / (2 * safe**2) - ab * radius**2 / safe)


def subtraction_band(grid):
    """Targets closer than this to the disc (from outside) also get the subtracted rule."""
    return 4 * grid.h


def cauchy_transform_values(grid, node_values, points, point_values, point_dbar=None):
    """Cauchy transform of several fields at once.

    node_values: (N, K) samples at grid nodes.  point_values / point_dbar: (M, K) values
    of the integrands and of their dbar at the targets.  Inside the disc these must be
    the integrands themselves; in the band just outside they may be a smooth extension
    (or 0).  Beyond the band they are ignored.  point_dbar may be None for
    zeroth-order subtraction.  Returns (M, K).
    """
    points = np.asarray(points, dtype=complex).ravel()
    node_values = np.asarray(node_values, dtype=complex).reshape(grid.size, -1)
    k = node_values.shape[1]
    point_values = np.asarray(point_values, dtype=complex).reshape(points.size, -1)
    near = (np.abs(points) < grid.radius + subtraction_band(grid))[:, None]
    pv = np.where(near, point_values, 0.0)
    pv = np.where(np.isfinite(pv), pv, 0.0)
    e0 = disc_kernel_integral(points, grid.radius)[:, None]
    if point_dbar is None:
        s = cauchy_sum(grid.nodes, grid.weights, node_values, points, pv)
        return s / np.pi + pv * e0
    q = np.where(near, np.asarray(point_dbar, dtype=complex).reshape(points.size, -1), 0.0)
    q = np.where(np.isfinite(q), q, 0.0)
    vals = np.concatenate([node_values, np.conj(grid.nodes)[:, None]], axis=1)
    tv = np.concatenate([pv, np.conj(points)[:, None]], axis=1)
    s = cauchy_sum(grid.nodes, grid.weights, vals, points, tv)
    out = (s[:, :k] - q * s[:, k:k + 1]) / np.pi + pv * e0
    return out + q * _slope_integral(points, grid.radius)[:, None]


def cauchy_transform(g, points):
    """I g at ``points`` for a ChartField ``g``; returns a complex array shaped like points.

    When ``g.func`` is set it doubles as the smooth extension used just outside the disc.
    """
    points = np.asarray(points, dtype=complex)
    flat = points.ravel()
    lim = g.grid.radius + (subtraction_band(g.grid) if g.func is not None else 0.0)
    near = np.abs(flat) < lim
    pv = np.zeros(flat.shape, dtype=complex)
    q = np.zeros(flat.shape, dtype=complex)
    if np.any(near):
        pv[near] = g.at(flat[near])
        q[near] = dbar_fd(g.at, flat[near])
    out = cauchy_transform_values(g.grid, g.values, flat, pv, q)[:, 0]
    return out.reshape(points.shape)


def exterior_moments(g, n_modes):
    """c_j = (1/pi) int g t^{j-1} dA, j = 1..n_modes: I g(a) = sum_j c_j a^{-j} for |a| > R."""
    t = g.grid.nodes
    w = g.grid.weights * g.values
    return np.array([np.sum(w * t ** (j - 1)) for j in range(1, n_modes + 1)]) / np.pi


def dbar_polar(u, points, dr, dtheta, order=4):
    """Central-difference dbar u along a polar stencil of steps (dr, dtheta) at nonzero points.

    dbar = (e^{i theta} / 2)(d_r + (i / r) d_theta); ``order`` is 2 or 4.
    """
    a = np.asarray(points, dtype=complex)
    r = np.abs(a)
    ph = a / r
    rot = np.exp(1j * dtheta)
    if order == 2:
        ur = (u(a + dr * ph) - u(a - dr * ph)) / (2 * dr)
        uth = (u(a * rot) - u(a / rot)) / (2 * dtheta)
    elif order == 4:
        ur = (8 * (u(a + dr * ph) - u(a - dr * ph)) - (u(a + 2 * dr * ph) - u(a - 2 * dr * ph))) / (12 * dr)
        uth = (8 * (u(a * rot) - u(a / rot)) - (u(a * rot**2) - u(a / rot**2))) / (12 * dtheta)
    else:
        raise ValueError("order must be 2 or 4")
    return 0.5 * ph * (ur + 1j * uth / r)


def polar_gauss_rule(radius, n_r, n_theta, center=0.0):
    """Gauss-Legendre in r (with the r dr weight folded in) times trapezoid in theta."""
    x, wx = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (x + 1)
    wr = 0.5 * radius * wx * r
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    pts = center + (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    w = np.repeat(wr * 2 * np.pi / n_theta, n_theta)
    return pts, w


def bump(x):
    """C-infinity bump exp(1 - 1/(1 - x)) on [0, 1), zero for x >= 1; bump(0) = 1."""
    x = np.asarray(x, dtype=float)
    inside = x < 1
    safe = np.where(inside, 1 - x, 1.0)
    return np.where(inside, np.exp(1 - 1 / safe), 0.0)


def bump_derivative(x):
    x = np.asarray(x, dtype=float)
    inside = x < 1
    safe = np.where(inside, 1 - x, 1.0)
    return np.where(inside, -np.exp(1 - 1 / safe) / safe**2, 0.0)


def smooth_step(x, delta):
    """C-infinity step: 1 for x <= -delta, 0 for x >= delta, and step(x) + step(-x) = 1."""
    x = np.asarray(x, dtype=float)

    def f(y):
        pos = y > 0
        return np.where(pos, np.exp(-1 / np.where(pos, y, 1.0)), 0.0)

    a, b = f(delta - x), f(delta + x)
    return a / (a + b)


def smooth_step_derivative(x, delta):
    x = np.asarray(x, dtype=float)

    def f(y):
        pos = y > 0
        return np.where(pos, np.exp(-1 / np.where(pos, y, 1.0)), 0.0)

    def fp(y):
        pos = y > 0
        ys = np.where(pos, y, 1.0)
        return np.where(pos, np.exp(-1 / ys) / ys**2, 0.0)

    a, b = f(delta - x), f(delta + x)
    ap, bp = -fp(delta - x), fp(delta + x)
    return (ap * b - a * bp) / (a + b) ** 2

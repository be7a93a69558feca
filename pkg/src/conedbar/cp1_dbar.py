"""dbar on CP^1 with values in O(m), by two chart Cauchy transforms.

Charts: t on chart A, tau = 1/t on chart B, both over the closed unit disc.
Sections satisfy f_a(t) = t^m f_b(1/t); (0,1)-forms satisfy
g_a(t) = t^m (-1/tbar^2) g_b(1/t).

The solution is u_a(t) = I g_a(t) + t^m I g_b(1/t) corrected by the chart
mismatch.  Outside the unit disc I g(a) = sum_j c_j a^{-j}; the modes c_j are
read off by trapezoidal contour quadrature on |a| = 2.  Modes that would put a
pole in either chart are moved to the other chart; for m <= -2 the modes
t^{-1} .. t^{m+1} cannot be moved and form the Cech obstruction.
"""
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .basefunc import TB, Sym, T, dbar_values
from .kernels import cauchy_sum
from .quadrature import (
    ChartField,
    DiscGrid,
    bump,
    bump_derivative,
    cauchy_transform_values,
    dbar_polar,
    polar_gauss_rule,
    subtraction_band,
    smooth_step,
    smooth_step_derivative,
)

N_MODES = 60
CONTOUR_RADIUS = 2.0
N_CONTOUR = 128
# cutoff in the chart-B variable carrying the obstructed modes: 1 on |tau| <= 0.3, 0 on |tau| >= 0.6
_CUT_CENTER, _CUT_HALF = 0.45, 0.15


def _as_callable(f):
    if isinstance(f, ChartField):
        return f.at
    return f


def _zero(t):
    return np.zeros(np.shape(t), dtype=complex)


@dataclass
class BundleForm:
    """(0,1)-form on CP^1 with values in O(m); g_a, g_b are vectorized callables (or ChartFields)."""

    m: int
    g_a: object = _zero
    g_b: object = _zero

    def __post_init__(self):
        self.g_a = _as_callable(self.g_a)
        self.g_b = _as_callable(self.g_b)

    def transition_defect(self, n=64, radii=(1.0,)):
        """Max of |g_a(t) - t^m (-1/tbar^2) g_b(1/t)| over circles, relative to max |g|."""
        t = np.concatenate([r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n) for r in radii])
        ga = np.asarray(self.g_a(t), dtype=complex)
        gb = t**self.m * (-1 / np.conj(t) ** 2) * np.asarray(self.g_b(1 / t), dtype=complex)
        scale = max(np.max(np.abs(ga)), np.max(np.abs(gb)), 1e-300)
        return float(np.max(np.abs(ga - gb)) / scale) if scale > 1e-300 else 0.0

    def chart_a_global(self, t):
        """The form's dtbar coefficient on all of C: g_a on |t| <= 1, transformed g_b outside."""
        t = np.asarray(t, dtype=complex)
        out = np.zeros(t.shape, dtype=complex)
        inner = np.abs(t) <= 1
        if np.any(inner):
            out[inner] = self.g_a(t[inner])
        if np.any(~inner):
            to = t[~inner]
            out[~inner] = to**self.m * (-1 / np.conj(to) ** 2) * self.g_b(1 / to)
        return out

    def lp_norm(self, p, n_r=64):
        """Flat chart L^p norm over the two unit discs."""
        grid = DiscGrid(1.0, n_r)
        va = np.abs(self.g_a(grid.nodes)) ** p
        vb = np.abs(self.g_b(grid.nodes)) ** p
        return float((np.sum(grid.weights * (va + vb))) ** (1 / p))

    def __add__(self, other):
        if other.m != self.m:
            raise ValueError("bundle degrees differ")
        a1, a2, b1, b2 = self.g_a, other.g_a, self.g_b, other.g_b
        return BundleForm(self.m, lambda t: a1(t) + a2(t), lambda t: b1(t) + b2(t))

    def scale(self, c):
        a, b = self.g_a, self.g_b
        return BundleForm(self.m, lambda t: c * a(t), lambda t: c * b(t))


@dataclass
class BundleSection:
    """Section of O(m) given by chart callables with f_a(t) = t^m f_b(1/t)."""

    m: int
    f_a: object
    f_b: object

    def __post_init__(self):
        self.f_a = _as_callable(self.f_a)
        self.f_b = _as_callable(self.f_b)

    def transition_defect(self, n=64, radii=(0.95, 1.0, 1.05)):
        t = np.concatenate([r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n) for r in radii])
        fa = np.asarray(self.f_a(t), dtype=complex)
        fb = t**self.m * np.asarray(self.f_b(1 / t), dtype=complex)
        scale = max(np.max(np.abs(fa)), np.max(np.abs(fb)), 1e-300)
        return float(np.max(np.abs(fa - fb)) / scale)

    def sample(self, grid):
        return ChartField.from_function(grid, self.f_a), ChartField.from_function(grid, self.f_b)

    def chart_a_global(self, t):
        """f_a on |t| <= 1 and t^m f_b(1/t) outside: the section as the two discs glue it."""
        t = np.asarray(t, dtype=complex)
        out = np.zeros(t.shape, dtype=complex)
        inner = np.abs(t) <= 1
        if np.any(inner):
            out[inner] = self.f_a(t[inner])
        if np.any(~inner):
            to = t[~inner]
            out[~inner] = to**self.m * self.f_b(1 / to)
        return out


@dataclass
class CechObstruction:
    """Laurent modes t^{-1} .. t^{m+1} of the chart mismatch, for m <= -2."""

    m: int
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if len(self.values) != max(0, -self.m - 1):
            raise ValueError(f"O({self.m}) obstruction must have {max(0, -self.m - 1)} entries")

    @property
    def dimension(self):
        return len(self.values)

    def is_zero(self, tol):
        return bool(np.all(np.abs(self.values) <= tol))

    def norm(self):
        return float(np.max(np.abs(self.values), initial=0.0))


def contour_exterior_modes(values_on_circle, radius, n_modes):
    """c_j, j = 1..n_modes, of F(a) = sum_j c_j a^{-j} from samples on |a| = radius."""
    n = len(values_on_circle)
    a = radius * np.exp(2j * np.pi * np.arange(n) / n)
    return np.array([np.mean(values_on_circle * a**j) for j in range(1, n_modes + 1)])


def obstruction_cutoff(tau):
    """1 on |tau| <= 0.3, 0 on |tau| >= 0.6; carries obstructed modes in chart B."""
    return smooth_step(np.abs(tau) - _CUT_CENTER, _CUT_HALF)


def obstruction_cutoff_dbar(tau):
    tau = np.asarray(tau, dtype=complex)
    r = np.abs(tau)
    d = smooth_step_derivative(r - _CUT_CENTER, _CUT_HALF)
    live = d != 0
    out = np.zeros(tau.shape, dtype=complex)
    out[live] = d[live] * tau[live] / (2 * r[live])
    return out


class TwoChartSolution:
    """Chart-wise Cauchy transforms of a BundleForm with the mismatch split.

    Evaluates the section (f_a, f_b) anywhere; for m <= -2 the obstructed modes are
    cut off in chart B, so the section solves dbar u = g - representative.
    """

    def __init__(self, g, n_r=64, n_modes=N_MODES):
        self.form = g
        self.m = int(g.m)
        self.grid = DiscGrid(1.0, n_r)
        nodes = self.grid.nodes
        va = np.asarray(g.g_a(nodes), dtype=complex)
        vb = np.asarray(g.g_b(nodes), dtype=complex)
        self._node_values = np.stack([va, vb], axis=1)
        self._node_values[~np.isfinite(self._node_values)] = 0.0
        self.g_scale = float(np.max(np.abs(self._node_values), initial=0.0))
        circle = CONTOUR_RADIUS * np.exp(2j * np.pi * np.arange(N_CONTOUR) / N_CONTOUR)
        ext = cauchy_transform_values(self.grid, self._node_values, circle, np.zeros((N_CONTOUR, 2)))
        self.modes_a = contour_exterior_modes(ext[:, 0], CONTOUR_RADIUS, n_modes)
        self.modes_b = contour_exterior_modes(ext[:, 1], CONTOUR_RADIUS, n_modes)
        q = max(0, -self.m - 1)
        # o_i = c^a_i - c^b_{-m-i}, i = 1..q: coefficient of t^{-i} left after the chart-A split.
        # The split uses the modes of the midpoint sums so it cancels them exactly; the
        # reported class uses a Gauss-Legendre radial rule, spectrally accurate for smooth g.
        self._split = np.array(
            [self.modes_a[i - 1] - self.modes_b[-self.m - i - 1] for i in range(1, q + 1)], dtype=complex
        )
        values = np.zeros(0, dtype=complex)
        if q:
            pts, w = polar_gauss_rule(1.0, max(128, 2 * n_r), self.grid.n_theta)
            gv = np.stack([np.asarray(g.g_a(pts), dtype=complex), np.asarray(g.g_b(pts), dtype=complex)], axis=1)
            gv[~np.isfinite(gv)] = 0.0
            hi = cauchy_sum(pts, w, gv, circle, np.zeros((N_CONTOUR, 2))) / np.pi
            ma = contour_exterior_modes(hi[:, 0], CONTOUR_RADIUS, q)
            mb = contour_exterior_modes(hi[:, 1], CONTOUR_RADIUS, q)
            values = np.array([ma[i - 1] - mb[-self.m - i - 1] for i in range(1, q + 1)])
        self.obstruction = CechObstruction(self.m, values)

    # I g_a and I g_b at arbitrary points (exterior via the mode series far out)
    def _transform(self, which, pts):
        pts = np.asarray(pts, dtype=complex).ravel()
        out = np.empty(pts.shape, dtype=complex)
        far = np.abs(pts) >= CONTOUR_RADIUS
        modes = self.modes_a if which == 0 else self.modes_b
        if np.any(far):
            inv = 1 / pts[far]
            out[far] = np.polyval(np.concatenate([modes[::-1], [0.0]]), inv)
        near = ~far
        if np.any(near):
            p = pts[near]
            inside = np.abs(p) < 1 + subtraction_band(self.grid)
            pv = np.zeros(p.size, dtype=complex)
            q = np.zeros(p.size, dtype=complex)
            if np.any(inside):
                fn = self.form.g_a if which == 0 else self.form.g_b
                pv[inside] = fn(p[inside])
                q[inside] = dbar_values(fn, p[inside])
            col = cauchy_transform_values(self.grid, self._node_values[:, which:which + 1], p, pv, q)
            out[near] = col[:, 0]
        return out

    def _other_series(self, modes, x):
        """sum_{j >= max(1, -m)} c_j x^{m+j}: the other chart's transform with poles removed."""
        j0 = max(1, -self.m)
        out = np.zeros(x.shape, dtype=complex)
        for j in range(len(modes), j0 - 1, -1):
            out = out * x + modes[j - 1]
        return out * x ** (self.m + j0)

    def f_a(self, t):
        t = np.asarray(t, dtype=complex)
        flat = t.ravel()
        out = self._transform(0, flat)
        q = self.obstruction.dimension
        small = np.abs(flat) <= 0.5
        if np.any(small):
            out[small] += self._other_series(self.modes_b, flat[small])
        big = ~small
        if np.any(big):
            tb = flat[big]
            part = tb**self.m * self._transform(1, 1 / tb)
            for i in range(1, q + 1):
                part -= self.modes_b[-self.m - i - 1] * tb ** (-i)
            chi = obstruction_cutoff(1 / tb)
            for i in range(1, q + 1):
                part -= chi * self._split[i - 1] * tb ** (-i)
            out[big] += part
        return out.reshape(t.shape)

    def f_b(self, tau):
        tau = np.asarray(tau, dtype=complex)
        flat = tau.ravel()
        out = self._transform(1, flat)
        q = self.obstruction.dimension
        o = self._split
        chi = obstruction_cutoff(flat)
        small = np.abs(flat) <= 0.5
        if np.any(small):
            x = flat[small]
            part = self._other_series(self.modes_a, x)
            for i in range(1, q + 1):
                part += (1 - chi[small]) * o[i - 1] * x ** (self.m + i)
            out[small] += part
        big = ~small
        if np.any(big):
            x = flat[big]
            part = x**self.m * self._transform(0, 1 / x)
            for i in range(1, q + 1):
                part -= (self.modes_b[-self.m - i - 1] + chi[big] * o[i - 1]) * x ** (self.m + i)
            out[big] += part
        return out.reshape(tau.shape)

    def section(self):
        return BundleSection(self.m, self.f_a, self.f_b)

    def representative(self):
        """The form removed from g by the partial solution (zero when m >= -1)."""
        m, o = self.m, self._split.copy()

        def rep_b(tau):
            tau = np.asarray(tau, dtype=complex)
            d = obstruction_cutoff_dbar(tau)
            out = np.zeros(tau.shape, dtype=complex)
            for i in range(1, len(o) + 1):
                out += d * o[i - 1] * tau ** (m + i)
            return out

        def rep_a(t):
            t = np.asarray(t, dtype=complex)
            return t**m * (-1 / np.conj(t) ** 2) * rep_b(1 / t)

        return BundleForm(m, rep_a, rep_b)


def check_seam(g, tol):
    defect = g.transition_defect(radii=(1.0,))
    if defect > tol:
        raise ValueError(f"incompatible seam data: relative transition mismatch {defect:.3e} > {tol:.1e}")


def solve_scalar_cp1(g, n_r=64, seam_tol=1e-6):
    """The operator S on O(0)-valued forms: Sg = I g_a(t) + I g_b(1/t)."""
    if g.m != 0:
        raise ValueError("solve_scalar_cp1 takes forms with m = 0")
    check_seam(g, seam_tol)
    return TwoChartSolution(g, n_r).section()


def solve_bundle_cp1(g, n_r=64):
    if g.m <= -2:
        raise ValueError(f"H^1(CP^1, O({g.m})) != 0: use cech_obstruction for m <= -2")
    return TwoChartSolution(g, n_r).section()


def cech_obstruction(g, n_r=64):
    """(obstruction, partial section) for m <= -2; the partial solves dbar u = g - representative."""
    if g.m > -2:
        raise ValueError("cech_obstruction is for m <= -2")
    sol = TwoChartSolution(g, n_r)
    return sol.obstruction, sol.section()


def obstruction_dimension(m, n_r=32, rank_tol=1e-8):
    """Rank of the obstruction map on a spanning family of forms of degree m.

    The family: dbar(chi) t^{-i}, i = 1..max(1, -m-1) + 1, with chi a cutoff vanishing
    near 0 and equal to 1 near the seam, plus two smooth bumps.
    """
    if m >= -1:
        return 0
    forms = [cocycle_form(m, i) for i in range(1, -m + 1)]
    forms.append(BundleForm(m, lambda t: bump(np.abs(t - 0.2) ** 2 / 0.25), _zero))
    vecs = np.array([TwoChartSolution(f, n_r).obstruction.values for f in forms])
    sv = np.linalg.svd(vecs, compute_uv=False)
    return int(np.sum(sv > rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0


_COC_IN, _COC_OUT = 0.5, 0.8


def cocycle_cutoff(t):
    """0 on |t| <= 0.5, 1 on |t| >= 0.8."""
    r = np.abs(np.asarray(t, dtype=complex))
    c, h = 0.5 * (_COC_IN + _COC_OUT), 0.5 * (_COC_OUT - _COC_IN)
    return 1 - smooth_step(r - c, h)


def cocycle_form(m, power=1):
    """g_a = dbar(chi) t^{-power}, g_b = 0: smears the Cech cocycle t^{-power} off the annulus.

    For 1 <= power <= -m-1 its class is the unit vector at mode t^{-power}.
    """
    c, h = 0.5 * (_COC_IN + _COC_OUT), 0.5 * (_COC_OUT - _COC_IN)

    def g_a(t):
        t = np.asarray(t, dtype=complex)
        r = np.abs(t)
        d = -smooth_step_derivative(r - c, h)
        live = d != 0
        out = np.zeros(t.shape, dtype=complex)
        out[live] = d[live] * t[live] / (2 * r[live]) * t[live] ** (-power)
        return out

    return BundleForm(m, g_a, _zero)


def manufactured_section(m, seed, d=None):
    """Random smooth section of O(m) and its dbar, as sympy-backed callables.

    f_a(t) = sum c_pq t^p tbar^q / (1 + |t|^2)^d with p <= m + d, q <= d, which keeps
    f_b(tau) = tau^m f_a(1/tau) smooth at tau = 0.
    """
    rng = np.random.default_rng(seed)
    if d is None:
        d = max(2, -m + 1)
    expr = 0
    for p in range(0, m + d + 1):
        for q in range(0, d + 1):
            c = complex(*np.round(rng.normal(size=2), 3))
            expr += sp.nsimplify(c.real) * T**p * TB**q + sp.I * sp.nsimplify(c.imag) * T**p * TB**q
    fa = expr / (1 + T * TB) ** d
    fb = sp.cancel(sp.expand(T**m * fa.subs({T: 1 / T, TB: 1 / TB}, simultaneous=True)))
    # normalize so that sup |dbar f| over both chart discs is about 1
    nodes = DiscGrid(1.0, 16).nodes
    peak = max(np.max(np.abs(Sym(fa).dbar()(nodes))), np.max(np.abs(Sym(fb).dbar()(nodes))))
    scale = sp.Rational(1) / sp.nsimplify(round(float(peak), 3)) if peak > 0 else 1
    sa, sb = Sym(fa * scale), Sym(fb * scale)
    section = BundleSection(m, sa, sb)
    form = BundleForm(m, sa.dbar(), sb.dbar())
    return section, form


def aligned_points(n_base=32, r_max=0.875, r_min=0.125):
    """Sample points at cell corners r = k/n_base and angles k pi/4.

    They sit at the same relative position in every grid with n_r a multiple of
    n_base, which keeps the quadrature error smooth along the FD stencil.
    """
    r = np.arange(int(round(r_min * n_base)), int(round(r_max * n_base)) + 1) / n_base
    th = np.arange(8) * np.pi / 4
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


def fd_residual(section, form, grid, points=None):
    """max |dbar u - g| over both charts, by a polar stencil aligned with ``grid``."""
    pts = aligned_points() if points is None else points
    ra = dbar_polar(section.f_a, pts, grid.h, grid.dtheta) - form.g_a(pts)
    rb = dbar_polar(section.f_b, pts, grid.h, grid.dtheta) - form.g_b(pts)
    return float(max(np.max(np.abs(ra)), np.max(np.abs(rb))))


@dataclass
class PlanarBump:
    """phi(t) = bump(|t - c|^2 / r^2), a smooth test function on the chart-A plane."""

    center: complex
    radius: float

    def value(self, t):
        return bump(np.abs(t - self.center) ** 2 / self.radius**2)

    def dbar(self, t):
        x = np.abs(t - self.center) ** 2 / self.radius**2
        return bump_derivative(x) * (t - self.center) / self.radius**2


def seam_battery(n=24, seed=0):
    """Test functions on the chart-A plane: a third on the seam |t| = 1, the rest inside or outside."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        kind = k % 3
        ang = 2 * np.pi * rng.random()
        if kind == 0:
            out.append(PlanarBump(np.exp(1j * ang), 0.3))
        elif kind == 1:
            out.append(PlanarBump((0.35 + 0.3 * rng.random()) * np.exp(1j * ang), 0.25))
        else:
            out.append(PlanarBump((1.4 + 0.5 * rng.random()) * np.exp(1j * ang), 0.3))
    return out


def _annular_rule(center, radius, n=40, split=1.0):
    """Gauss-Legendre on the polar box about 0 covering the disc |t - center| < radius.

    The radial interval is split at |t| = split so a kink there does not spoil the rule.
    """
    rc = abs(center)
    lo, hi = rc - radius, rc + radius
    half = np.arcsin(min(1.0, radius / rc))
    x, w = np.polynomial.legendre.leggauss(n)
    segs = [(lo, split), (split, hi)] if lo < split < hi else [(lo, hi)]
    th = np.angle(center) + half * x
    wth = half * w
    pts, wts = [], []
    for a, b in segs:
        r = 0.5 * (b - a) * (x + 1) + a
        wr = 0.5 * (b - a) * w * r
        pts.append((r[:, None] * np.exp(1j * th)[None, :]).ravel())
        wts.append((wr[:, None] * wth[None, :]).ravel())
    return np.concatenate(pts), np.concatenate(wts)


def weak_residual_cp1(f_global, g_global, battery=None, n=40):
    """max over bumps of |int f dbar(phi) + int g phi| / ||phi||_L1 on the chart-A plane.

    For dbar f = g in the distribution sense the pairing vanishes.
    """
    battery = seam_battery() if battery is None else battery
    worst = 0.0
    for phi in battery:
        pts, w = _annular_rule(phi.center, phi.radius, n)
        val = np.sum(w * (f_global(pts) * phi.dbar(pts) + g_global(pts) * phi.value(pts)))
        worst = max(worst, abs(val) / np.sum(w * phi.value(pts)))
    return float(worst)


def holder_quotient_cp1(section, alpha, n_pairs=4000, seed=0, radius=1.0):
    """max |u(z) - u(w)| / |z - w|^alpha over seeded pairs in both chart discs.

    Half the pairs are close (|z - w| < 0.05) so the quotient probes small scales.
    """
    rng = np.random.default_rng(seed)
    q = 0.0
    for f in (section.f_a, section.f_b):
        z = radius * np.sqrt(rng.random(n_pairs)) * np.exp(2j * np.pi * rng.random(n_pairs))
        far = radius * np.sqrt(rng.random(n_pairs // 2)) * np.exp(2j * np.pi * rng.random(n_pairs // 2))
        near = z[n_pairs // 2:] + 0.05 * rng.random(n_pairs - n_pairs // 2) * np.exp(2j * np.pi * rng.random(n_pairs - n_pairs // 2))
        w = np.concatenate([far, near])
        keep = (np.abs(w) <= radius) & (np.abs(z - w) > 0)
        du = np.abs(f(z[keep]) - f(w[keep]))
        q = max(q, float(np.max(du / np.abs(z[keep] - w[keep]) ** alpha)))
    return q


def holomorphic_section_dimension(m, n_r=32, extra=3, tol=1e-6):
    """Count chart-A monomials t^j that extend to holomorphic sections of O(m).

    A candidate passes when its chart-B form tau^{m-j} has a vanishing dbar residual
    and obeys the maximum principle on the unit disc grid.
    """
    grid = DiscGrid(1.0, n_r)
    pts = aligned_points()
    count = 0
    for j in range(0, max(m, 0) + extra + 1):
        fb = lambda x, j=j: x ** (m - j)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.abs(fb(grid.nodes))
            edge = np.max(np.abs(fb(np.exp(2j * np.pi * np.arange(64) / 64))))
            res = np.max(np.abs(dbar_polar(fb, pts, grid.h, grid.dtheta)))
        if np.all(np.isfinite(vals)) and np.max(vals) <= edge * (1 + tol) and res < 1e-3:
            count += 1
    return count

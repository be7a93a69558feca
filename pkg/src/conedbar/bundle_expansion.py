"""dbar on the disc bundle D in O(-e) over CP^1, by fiber integration and series expansion.

D is {|s| < rho(t)} in chart A and {|sigma| < rho(tau)} in chart B, with
(tau, sigma) = (1/t, t^e s) and rho(t) = eps / sqrt(sum_j |t|^{2j}), so that D is
the preimage of the ball {|z| < eps} on the cone.

A (0,1)-form w = beta dtbar + gamma dsbar with weight k (|s^-k w| bounded) is
solved in four steps:

1. eta_P = s^k P(s^-k gamma), P the Cauchy transform along each fiber disc.
   It removes the dsbar component exactly.
2. What is left, (beta - d eta_P / dtbar) dtbar, is holomorphic in s, so it
   expands as sum_{mu >= k} a_mu(t) s^mu dtbar.  The coefficients are read off
   by trapezoidal contour quadrature on |s| = 0.7 rho(t); each a_mu is a
   (0,1)-form on CP^1 with values in O(e mu).
3. Each a_mu is solved on CP^1; for e mu <= -2 its Cech class is reported and
   only the part orthogonal to it is solved.
4. eta = eta_P + sum_mu c_mu s^mu.

Functions on D are FiberExpansions per chart, so the fiber direction is exact
and only the base direction carries quadrature error.
"""
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .basefunc import TB, BaseFunc, LogRadialStep, Numeric, Sym, T, cauchy_t
from .cp1_dbar import N_MODES, BundleForm, CechObstruction, TwoChartSolution
from .fiber import FiberExpansion, OneForm
from .quadrature import DiscGrid

CONTOUR_FRACTION = 0.7
N_FIBER_CONTOUR = 64
MU_MAX = 12
LOCAL_RADIUS = 1.5
PARTITION_DELTA = float(np.log(1.3))


class PreconditionError(ValueError):
    """Input form violates a precondition of the solver (weight, closedness)."""


class TruncationError(ValueError):
    """The fiber series has modes beyond mu_max above tolerance."""


def fiber_radius(e, eps=1.0):
    """rho(t) = eps / sqrt(sum_{j=0}^e |t|^{2j}) as a closed-form coefficient."""
    x = T * TB
    return Sym(sp.nsimplify(eps) / sp.sqrt(sum(x**j for j in range(e + 1))))


def _sample_base(radius=1.0, n_r=6, n_theta=16):
    """Polar sample points, with extra rings across the gluing annulus around |t| = 1."""
    r = radius * (np.arange(n_r) + 0.5) / n_r
    ring = np.linspace(np.exp(-PARTITION_DELTA), np.exp(PARTITION_DELTA), 9)
    r = np.concatenate([r, ring[ring < radius]])
    th = 2 * np.pi * (np.arange(n_theta) + 0.25) / n_theta
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


def prune(f, points=None, rel_tol=1e-12):
    """Drop terms whose coefficient is numerically zero on sample base points."""
    points = _sample_base(LOCAL_RADIUS) if points is None else points
    vals = {key: np.max(np.abs(np.nan_to_num(c(points))), initial=0.0) for key, c in f.terms.items()}
    scale = max(vals.values(), default=0.0)
    if scale == 0:
        return FiberExpansion()
    return FiberExpansion({key: f.terms[key] for key, v in vals.items() if v > rel_tol * scale})


def non_holomorphic_terms(f):
    return [key for key in f.terms if key[0] != key[1]]


@dataclass
class DiscFunction:
    """Scalar function on D: one FiberExpansion per chart."""

    e: int
    a: FiberExpansion = field(default_factory=FiberExpansion)
    b: FiberExpansion = field(default_factory=FiberExpansion)

    @classmethod
    def from_chart_a(cls, e, fa):
        return cls(e, fa, fa.convert_chart(e))

    def chart(self, which):
        return self.a if which == "A" else self.b

    def __add__(self, other):
        return DiscFunction(self.e, self.a + other.a, self.b + other.b)

    def __neg__(self):
        return DiscFunction(self.e, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-other)

    def evaluate(self, chart, base, fiber):
        return self.chart(chart).evaluate(np.asarray(base, dtype=complex), np.asarray(fiber, dtype=complex))

    def at(self, base, fiber):
        """Value at chart-A coordinates, switching to chart B for |t| > 1."""
        t = np.asarray(base, dtype=complex).ravel()
        s = np.asarray(fiber, dtype=complex).ravel()
        out = np.empty(t.shape, dtype=complex)
        inner = np.abs(t) <= 1
        if np.any(inner):
            out[inner] = self.a.evaluate(t[inner], s[inner])
        if np.any(~inner):
            to = t[~inner]
            out[~inner] = self.b.evaluate(1 / to, to**self.e * s[~inner])
        return out.reshape(np.shape(base))

    def transition_defect(self, n=48, radii=(0.97, 1.0, 1.03), fiber_fraction=0.5, eps=1.0):
        t = np.concatenate([r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n) for r in radii])
        s = fiber_fraction * fiber_radius(self.e, eps)(t) * np.exp(0.7j)
        va = self.a.evaluate(t, s)
        vb = self.b.evaluate(1 / t, t**self.e * s)
        scale = max(np.max(np.abs(va)), 1e-300)
        return float(np.max(np.abs(va - vb)) / scale)


@dataclass
class BundleAreaForm:
    """(0,1)-form on D with weight k: base * dtbar + fiber * dsbar in each chart."""

    k: int
    e: int
    a: OneForm = field(default_factory=OneForm)
    b: OneForm = field(default_factory=OneForm)
    eps: float = 1.0

    @classmethod
    def from_chart_a(cls, k, e, form_a, eps=1.0):
        return cls(k, e, form_a, form_a.convert_chart(e), eps)

    @property
    def rho(self):
        return fiber_radius(self.e, self.eps)

    def chart(self, which):
        return self.a if which == "A" else self.b

    @property
    def is_zero(self):
        return self.a.is_zero and self.b.is_zero

    def __add__(self, other):
        return BundleAreaForm(self.k, self.e, self.a + other.a, self.b + other.b, self.eps)

    def __sub__(self, other):
        return BundleAreaForm(self.k, self.e, self.a - other.a, self.b - other.b, self.eps)

    def scale(self, c):
        return BundleAreaForm(self.k, self.e, self.a.scale(c), self.b.scale(c), self.eps)

    def with_weight(self, k):
        return BundleAreaForm(k, self.e, self.a, self.b, self.eps)

    def sample_points(self, which="A", n_t=(6, 16), n_s=(4, 12), radius=1.0):
        """(t, s) sample grid over the chart piece of D, shape (M, L)."""
        t = _sample_base(radius, *n_t)
        rs = (np.arange(n_s[0]) + 0.5) / n_s[0]
        ph = np.exp(2j * np.pi * (np.arange(n_s[1]) + 0.3) / n_s[1])
        frac = (rs[:, None] * ph[None, :]).ravel()
        return t, self.rho(t)[:, None] * frac[None, :]

    def transition_defect(self, n=48, radii=(0.97, 1.0, 1.03), fiber_fraction=0.5):
        """Relative mismatch of the two charts' components on the overlap."""
        t = np.concatenate([r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n) for r in radii])
        s = fiber_fraction * self.rho(t) * np.exp(0.7j)
        conv = self.b.convert_chart(self.e)
        ba, fa = self.a.evaluate(t, s)
        bb, fb = conv.evaluate(t, s)
        scale = max(np.max(np.abs(ba)), np.max(np.abs(fa)), 1e-300)
        return float(max(np.max(np.abs(ba - bb)), np.max(np.abs(fa - fb))) / scale)

    def weighted_sup(self):
        """max of |s^-k| times the components over chart samples (finite iff the weight holds)."""
        best = 0.0
        for which in "AB":
            t, s = self.sample_points(which)
            for comp in self.chart(which).evaluate(t, s):
                with np.errstate(divide="ignore", invalid="ignore"):
                    v = np.abs(comp * np.abs(s) ** (-self.k))
                best = max(best, float(np.max(v)))
        return best

    def sup_norm(self):
        """Flat chart sup of the components over samples."""
        best = 0.0
        for which in "AB":
            t, s = self.sample_points(which)
            for comp in self.chart(which).evaluate(t, s):
                best = max(best, float(np.max(np.abs(comp))))
        return best


def split_components(w):
    """(w_I, w_II): the dtbar part and the dsbar part; w = w_I + w_II term by term."""
    wi = BundleAreaForm(w.k, w.e, OneForm(w.a.base, None), OneForm(w.b.base, None), w.eps)
    wii = BundleAreaForm(w.k, w.e, OneForm(None, w.a.fiber), OneForm(None, w.b.fiber), w.eps)
    return wi, wii


def _fiber_solve(gamma, k, rho):
    if k > 0 and not gamma.is_zero and gamma.min_exponent() < k:
        raise PreconditionError(f"dsbar component does not vanish to order {k} on the zero section")
    return gamma.shift(-k, -k).cauchy_fiber(rho).shift(k, k)


def fiber_cauchy_P(w_ii, k=None):
    """eta = s^k P(s^-k gamma) in each chart; d eta / dsbar = gamma exactly."""
    k = w_ii.k if k is None else k
    if not (w_ii.a.base.is_zero and w_ii.b.base.is_zero):
        raise PreconditionError("fiber_cauchy_P takes forms with only a dsbar component")
    rho = w_ii.rho
    return DiscFunction(w_ii.e, _fiber_solve(w_ii.a.fiber, k, rho), _fiber_solve(w_ii.b.fiber, k, rho))


class ContourModes:
    """Fourier modes of F(t, .) on |s| = r(t), divided by r^mu: the s^mu coefficients."""

    def __init__(self, f, rho, fraction=CONTOUR_FRACTION, n_theta=N_FIBER_CONTOUR):
        self.f = f
        self.rho = rho
        self.fraction = fraction
        self.n_theta = n_theta
        self._phase = np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
        self._cache = {}

    def radius(self, t):
        return self.fraction * np.real(self.rho(t))

    def modes(self, t):
        """(M, n_theta) array of FFT modes at radius r(t), not yet divided by r^mu."""
        t = np.asarray(t, dtype=complex).ravel()
        key = (t.shape, t.tobytes())
        hit = self._cache.get(key)
        if hit is None:
            s = self.radius(t)[:, None] * self._phase[None, :]
            vals = self.f.evaluate(t, s)
            hit = np.fft.fft(vals, axis=1) / self.n_theta
            self._cache[key] = hit
            if len(self._cache) > 6:
                self._cache.pop(next(iter(self._cache)))
        return hit

    def coefficient(self, mu, t):
        t = np.asarray(t, dtype=complex)
        flat = t.ravel()
        c = self.modes(flat)[:, mu % self.n_theta] / self.radius(flat) ** mu
        return c.reshape(t.shape)

    def basefunc(self, mu):
        return ContourCoefficient(self, mu)

    def dbar_modes(self):
        """Modes of dbar_t F at fixed s, or None when F has no closed-form dbar.

        For F holomorphic in s the s^mu coefficient commutes with dbar_t, so these
        are the dbar of the coefficients.
        """
        if not hasattr(self, "_dbar_modes"):
            try:
                self._dbar_modes = ContourModes(self.f.dbar_base(), self.rho, self.fraction, self.n_theta)
            except NotImplementedError:
                self._dbar_modes = None
        return self._dbar_modes


class ContourCoefficient(BaseFunc):
    """The s^mu coefficient a_mu(t) read off by ContourModes."""

    def __init__(self, modes, mu):
        super().__init__()
        self.modes = modes
        self.mu = mu

    def _eval(self, t):
        return self.modes.coefficient(self.mu, t)

    def dbar(self):
        d = self.modes.dbar_modes()
        if d is None:
            raise NotImplementedError("coefficient has no closed-form dbar")
        return ContourCoefficient(d, self.mu)


@dataclass
class FiberSeries:
    """Coefficients a_mu, k <= mu <= mu_max, of a fiber-holomorphic dtbar form."""

    k: int
    mu_max: int
    e: int
    coeffs: dict
    tail_bound: float
    beyond: float
    contour_a: object = None
    contour_b: object = None

    def reassemble(self, which, t, s):
        t = np.asarray(t, dtype=complex)
        s = np.asarray(s, dtype=complex)
        out = np.zeros(np.broadcast_shapes(s.shape, t.shape + (1,) * (s.ndim - t.ndim)), dtype=complex)
        for mu, form in self.coeffs.items():
            g = form.g_a if which == "A" else form.g_b
            cv = np.asarray(g(t), dtype=complex)
            out = out + cv.reshape(cv.shape + (1,) * (s.ndim - t.ndim)) * s**mu
        return out


def series_coefficients(w_i, k=None, mu_max=MU_MAX, n_theta=N_FIBER_CONTOUR, check_tol=1e-8):
    """Contour-quadrature coefficients a_mu of w_i = sum a_mu s^mu dtbar, as BundleForms of degree e mu."""
    k = w_i.k if k is None else k
    if not (w_i.a.fiber.is_zero and w_i.b.fiber.is_zero):
        raise PreconditionError("series_coefficients takes forms with only a dtbar component")
    if mu_max < k:
        raise ValueError("mu_max must be at least k")
    if 2 * max(abs(k), abs(mu_max)) >= n_theta:
        raise ValueError("n_theta too small for the requested mode range")
    rho = w_i.rho
    ca = ContourModes(w_i.a.base, rho, n_theta=n_theta)
    cb = ContourModes(w_i.b.base, rho, n_theta=n_theta)
    t = _sample_base(1.0)
    scale, beyond, tail = 0.0, 0.0, 0.0
    for which, cm in (("A", ca), ("B", cb)):
        modes = cm.modes(t)
        scale = max(scale, float(np.max(np.abs(modes), initial=0.0)))
        # a second contour radius exposes s-dependence that is not holomorphic
        other = ContourModes(cm.f, rho, fraction=0.5 * CONTOUR_FRACTION, n_theta=n_theta)
        r1, r2 = cm.radius(t), other.radius(t)
        m2 = other.modes(t)
        lo, hi = min(k, 0) - 2, mu_max + 2
        for mu in range(-n_theta // 2 + 1, n_theta // 2):
            if mu > mu_max:
                beyond = max(beyond, float(np.max(np.abs(modes[:, mu % n_theta]))))
            if not lo <= mu <= hi:
                continue
            a1 = modes[:, mu % n_theta] / r1**mu
            a2 = m2[:, mu % n_theta] / r2**mu
            # compare at the outer radius scale so high modes are not amplified
            gap = np.abs(a1 - a2) * r1**mu
            worst = int(np.argmax(gap))
            if scale > 0 and gap[worst] > check_tol * max(scale, 1e-300):
                raise PreconditionError(
                    f"chart {which}: dtbar coefficient is not holomorphic in s "
                    f"(mode {mu}, t = {t[worst]:.4f}, defect {gap[worst]:.3e})"
                )
            if mu < k and scale > 0 and np.max(np.abs(modes[:, mu % n_theta])) > check_tol * scale:
                raise PreconditionError(f"chart {which}: mode s^{mu} present below the weight k = {k}")
        tail = max(tail, float(np.max(np.abs(modes[:, mu_max % n_theta]))))
    coeffs = {mu: BundleForm(w_i.e * mu, ca.basefunc(mu), cb.basefunc(mu)) for mu in range(k, mu_max + 1)}
    return FiberSeries(k, mu_max, w_i.e, coeffs, tail, beyond, ca, cb)


@dataclass
class ObstructionReport:
    entries: dict = field(default_factory=dict)
    tol: float = 1e-6
    solved: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    tail_bound: float = 0.0
    mu_max: int = MU_MAX

    @property
    def clean(self):
        return all(o.is_zero(self.tol) for o in self.entries.values())

    def as_dict(self):
        return {str(mu): [[float(v.real), float(v.imag)] for v in o.values] for mu, o in sorted(self.entries.items())}


def _negligible(series, mu, rel_tol=1e-12):
    """Mode mu is roundoff: its contour magnitude (before dividing by r^mu) is tiny in both charts."""
    t = _sample_base(1.0)
    n = series.contour_a.n_theta
    va = np.abs(series.contour_a.modes(t)[:, mu % n])
    vb = np.abs(series.contour_b.modes(t)[:, mu % n])
    scale = max(np.max(np.abs(series.contour_a.modes(t))), np.max(np.abs(series.contour_b.modes(t))), 1e-300)
    return max(np.max(va), np.max(vb)) <= rel_tol * scale


def solve_dbar_k(w, k=None, mu_max=MU_MAX, n_r=64, obstruction_tol=1e-6, truncation_tol=1e-10):
    """Solve dbar eta = w on D with eta in weight k; returns (eta, ObstructionReport).

    For obstructed degrees the partial CP^1 solution is used, so then dbar eta
    equals w minus the reported representatives.
    """
    k = w.k if k is None else k
    if w.is_zero:
        return DiscFunction(w.e), ObstructionReport(tol=obstruction_tol, mu_max=mu_max)
    w_i, w_ii = split_components(w)
    eta = fiber_cauchy_P(w_ii, k)
    rest = BundleAreaForm(
        k, w.e,
        OneForm(prune(w_i.a.base - eta.a.dbar_base(), _sample_base(1.0)), None),
        OneForm(prune(w_i.b.base - eta.b.dbar_base(), _sample_base(1.0)), None),
        w.eps,
    )
    report = ObstructionReport(tol=obstruction_tol, mu_max=mu_max)
    if rest.is_zero:
        return eta, report
    series = series_coefficients(rest, k, mu_max)
    report.tail_bound = series.tail_bound
    if series.beyond > truncation_tol * max(series.tail_bound, 1.0):
        raise TruncationError(f"modes above mu_max = {mu_max} reach {series.beyond:.3e}")
    fa, fb = FiberExpansion(), FiberExpansion()
    for mu, form in series.coeffs.items():
        m = w.e * mu
        if _negligible(series, mu):
            report.skipped.append(mu)
            if m <= -2:
                report.entries[mu] = CechObstruction(m, np.zeros(-m - 1, dtype=complex))
            continue
        sol = TwoChartSolution(form, n_r, n_modes=N_MODES)
        if m <= -2:
            report.entries[mu] = sol.obstruction
        report.solved.append(mu)
        fa = fa + FiberExpansion.holomorphic(mu, Numeric(sol.f_a))
        fb = fb + FiberExpansion.holomorphic(mu, Numeric(sol.f_b))
    return eta + DiscFunction(w.e, fa, fb), report


# ---- regularization of bounded forms -------------------------------------------


def local_solve(form, rho, grid):
    """A solution of dbar eta = form on {|t| < grid.radius} x fiber discs, in one chart.

    P removes the dsbar part; the rest is holomorphic in s and is solved term by
    term with the planar Cauchy transform in t.
    """
    eta = form.fiber.cauchy_fiber(rho) if not form.fiber.is_zero else FiberExpansion()
    rest = prune(form.base - eta.dbar_base(), _sample_base(grid.radius))
    bad = non_holomorphic_terms(rest)
    if bad:
        raise PreconditionError(f"form is not dbar-closed in the fiber direction: terms {bad}")
    keys = list(rest.terms)
    transforms = cauchy_t(grid, [rest.terms[key] for key in keys])
    return eta + FiberExpansion(dict(zip(keys, transforms)))


def drop_trace(f):
    """f(t, s) - f(t, 0): removes the s-independent term."""
    return FiberExpansion({key: c for key, c in f.terms.items() if key != (0, 0)})


@dataclass
class Regularization:
    u0: DiscFunction
    u1: DiscFunction
    omega0: BundleAreaForm
    omega1: BundleAreaForm
    delta: float
    grid: DiscGrid

    @property
    def correction(self):
        """u0 - u1, with dbar(u0 - u1) = w - omega1."""
        return self.u0 - self.u1


def _glue(e, fa, fb, delta):
    """Partition-of-unity sum and its dbar-cutoff defect, in both charts.

    chi_A(t) + chi_B(1/t) = 1 with chi_B = chi_A as functions of their own variable.
    """
    chi = LogRadialStep(delta, 1)
    dchi = chi.dbar()
    fb_in_a = fb.convert_chart(e)
    fa_in_b = fa.convert_chart(e)
    glued = DiscFunction(
        e,
        fa.scale(chi) + fb_in_a.scale(chi.inverted()),
        fb.scale(chi) + fa_in_b.scale(chi.inverted()),
    )
    defect_a = (fa - fb_in_a).scale(dchi)
    defect_b = (fb - fa_in_b).scale(dchi)
    return glued, defect_a, defect_b


def regularize_pullback(w, n_r=64, radius=LOCAL_RADIUS, delta=PARTITION_DELTA):
    """Two regularization steps: returns u0, u1 and omega1 in weight 1 with dbar(u0 - u1) = w - omega1."""
    if np.exp(delta) >= radius:
        raise ValueError("partition cutoff must be supported inside the local discs")
    grid = DiscGrid(radius, n_r)
    rho = w.rho
    # step 1: local solutions minus their trace on the zero section
    ea = drop_trace(local_solve(w.a, rho, grid))
    eb = drop_trace(local_solve(w.b, rho, grid))
    u0, da, db = _glue(w.e, ea, eb, delta)
    omega0 = BundleAreaForm(1, w.e, OneForm(da, None), OneForm(db, None), w.eps)
    # step 2: divide by the fiber coordinate, solve, multiply back
    pts = _sample_base(radius)
    ga = prune(da, pts).shift(-1, -1)
    gb = prune(db, pts).shift(-1, -1)
    e0a = local_solve(OneForm(ga, None), rho, grid).shift(1, 1)
    e0b = local_solve(OneForm(gb, None), rho, grid).shift(1, 1)
    u1, d1a, d1b = _glue(w.e, e0a, e0b, delta)
    omega1 = BundleAreaForm(1, w.e, OneForm(prune(d1a, pts), None), OneForm(prune(d1b, pts), None), w.eps)
    return Regularization(u0, u1, omega0, omega1, delta, grid)


# ---- residual oracles ----------------------------------------------------------


def _dbar_fiber_fd(u, s, step):
    """Fourth-order central differences for d/dsbar at the points s."""
    def d(direction):
        return (8 * (u(s + step * direction) - u(s - step * direction))
                - (u(s + 2 * step * direction) - u(s - 2 * step * direction))) / (12 * step)

    return 0.5 * (d(1.0) + 1j * d(1j))


def fd_residual_disc(eta, w, h, dtheta, points=None, fractions=(0.2, 0.5, 0.8), phase=0.4, fiber_step=1e-3):
    """max |dbar eta - w| over both charts at (t, f rho(t) e^{i phase}) for t in ``points``.

    The t-derivative uses the polar stencil with steps (h, dtheta) at fixed s;
    the s-derivative uses a small Cartesian stencil.
    """
    from .cp1_dbar import aligned_points
    from .quadrature import dbar_polar

    pts = aligned_points() if points is None else np.asarray(points, dtype=complex)
    rho = w.rho(pts)
    worst = 0.0
    for which in "AB":
        f = eta.chart(which)
        form = w.chart(which)
        for frac in fractions:
            s0 = frac * rho * np.exp(1j * phase)
            base, fiber = form.evaluate(pts, s0)
            dt = dbar_polar(lambda t: f.evaluate(t, s0), pts, h, dtheta)
            ds = _dbar_fiber_fd(lambda s: f.evaluate(pts, s), s0, fiber_step * np.real(rho))
            worst = max(worst, float(np.max(np.abs(dt - base))), float(np.max(np.abs(ds - fiber))))
    return worst

"""End-to-end dbar pipelines on the punctured cone {0 < |z| < eps} in Y_e.

Forms on the cone are carried by their pullbacks to the disc bundle D; ambient
data is written as sums of terms c z^a zbar^b |z|^{2 beta}, which pull back to
finite fiber expansions with closed-form coefficients in each chart.

* solve_l2: pull back, solve in weight -k0 = -1, report any obstruction.
* solve_bounded: two regularization steps, then solve in weight 1; the
  solution vanishes on the exceptional curve, so it is continuous at the apex.

Norms on the cone use the induced metric: volumes carry det G (G the Gram
matrix of the chart parametrization) and (0,1)-forms are measured with G^-1.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from . import bundle_expansion as bx
from .basefunc import TB, Sym, T
from .cp1_dbar import manufactured_section
from .fiber import FiberExpansion, OneForm
from .geometry import ConeModel, blowup_map, distance_bounds, distortion_profile, gram_matrix, volume_distortion
from .obstruction import HOLDS, CurveSpec, hypothesis_check
from .quadrature import bump, bump_derivative, polar_gauss_rule

KINDS = ("exact_smooth", "exact_singular", "bounded_random")


# ---- ambient functions -----------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """c z^a zbar^b |z|^{2 beta}; a, b are exponent tuples of length e + 1."""

    c: complex
    a: tuple
    b: tuple
    beta: Fraction = Fraction(0)


@dataclass
class AmbientFunction:
    e: int
    terms: list = field(default_factory=list)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        n2 = np.sum(np.abs(z) ** 2, axis=-1)
        out = np.zeros(z.shape[:-1], dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for tm in self.terms:
                v = tm.c * np.prod(z ** np.array(tm.a) * np.conj(z) ** np.array(tm.b), axis=-1)
                if tm.beta:
                    v = v * n2 ** float(tm.beta)
                out = out + v
        return out

    def dbar(self):
        """Coefficients f_j of sum_j f_j dzbar_j = dbar of this function."""
        out = [AmbientFunction(self.e) for _ in range(self.e + 1)]
        for tm in self.terms:
            for j in range(self.e + 1):
                if tm.b[j]:
                    b = list(tm.b)
                    b[j] -= 1
                    out[j].terms.append(Term(tm.c * tm.b[j], tm.a, tuple(b), tm.beta))
                if tm.beta:
                    a = list(tm.a)
                    a[j] += 1
                    out[j].terms.append(Term(tm.c * complex(tm.beta), tuple(a), tm.b, tm.beta - 1))
        return out

    def chart_expansion(self, chart):
        """Pullback as a FiberExpansion: z_j = s t^j (chart A) or sigma tau^{e-j} (chart B)."""
        e = self.e
        idx = np.arange(e + 1) if chart == "A" else np.arange(e, -1, -1)
        q = sum((T * TB) ** j for j in range(e + 1))
        out = {}
        for tm in self.terms:
            na, nb = sum(tm.a), sum(tm.b)
            pa = int(np.dot(idx, tm.a))
            pb = int(np.dot(idx, tm.b))
            coeff = sp.nsimplify(tm.c.real) + sp.I * sp.nsimplify(tm.c.imag)
            expr = coeff * T**pa * TB**pb
            if tm.beta:
                expr = expr * q ** sp.Rational(tm.beta.numerator, tm.beta.denominator)
            key = (na - nb, Fraction(na + nb) + 2 * tm.beta)
            out[key] = out.get(key, 0) + expr
        return FiberExpansion({k: Sym(v) for k, v in out.items()})


def pullback_terms(e, coeffs, chart):
    """Pullback of sum_j f_j dzbar_j (ambient f_j) as a OneForm in the given chart.

    Chart A: dzbar_j = tbar^j dsbar + j sbar tbar^{j-1} dtbar; chart B mirrors j -> e - j.
    """
    base, fiber = FiberExpansion(), FiberExpansion()
    for j, f in enumerate(coeffs):
        if not f.terms:
            continue
        p = j if chart == "A" else e - j
        g = f.chart_expansion(chart)
        fiber = fiber + g.scale(Sym(TB**p))
        if p:
            base = base + g.scale(Sym(p * TB ** (p - 1))).shift(-1, 1)
    return OneForm(base, fiber)


def pullback_function(f):
    return bx.DiscFunction(f.e, f.chart_expansion("A"), f.chart_expansion("B"))


# ---- cone forms ----------------------------------------------------------------------


@dataclass
class ConeForm:
    """A dbar-closed (0,1)-form on {0 < |z| < eps} in Y_e, stored through its pullback."""

    cone: ConeModel
    upstairs: bx.BundleAreaForm
    eps: float = 1.0
    kind: str = "custom"
    seed: object = None
    potential: object = None  # DiscFunction with dbar(potential) = form, when known
    ambient: object = None  # list of AmbientFunction coefficients, when known

    @classmethod
    def from_ambient(cls, cone, coeffs, k=0, eps=1.0, **kw):
        e = cone.degree
        up = bx.BundleAreaForm(k, e, pullback_terms(e, coeffs, "A"), pullback_terms(e, coeffs, "B"), eps)
        return cls(cone, up, eps, ambient=coeffs, **kw)

    @property
    def e(self):
        return self.cone.degree

    def scale(self, c):
        pot = None
        if self.potential is not None:
            pot = bx.DiscFunction(self.e, self.potential.a.scale(Sym(c)), self.potential.b.scale(Sym(c)))
        return ConeForm(self.cone, self.upstairs.scale(Sym(c)), self.eps, self.kind, self.seed, pot)


def _random_poly_potential(e, rng, n_terms=3, max_deg=2):
    terms = []
    for _ in range(n_terms):
        a = np.zeros(e + 1, dtype=int)
        b = np.zeros(e + 1, dtype=int)
        for _ in range(rng.integers(0, max_deg + 1)):
            a[rng.integers(0, e + 1)] += 1
        for _ in range(rng.integers(1, max_deg + 1)):
            b[rng.integers(0, e + 1)] += 1
        c = complex(*np.round(rng.normal(size=2), 3))
        terms.append(Term(c, tuple(int(x) for x in a), tuple(int(x) for x in b)))
    return AmbientFunction(e, terms)


def generate_test_form(kind, seed=0, degree=2, eps=1.0):
    """Seeded dbar-closed test form with its potential.

    exact_smooth: dbar of a random polynomial in z and zbar.
    exact_singular: dbar of sum_j c_j zbar_j |z|^{-1/2} plus a polynomial; the
        form grows like |z|^{-1/2} at the apex and is square integrable.
    bounded_random: sum_{mu=1,2} a_mu s^mu dtbar with a_mu = dbar of random smooth
        sections of O(e mu); bounded in the induced metric since mu >= 1.
    """
    cone = ConeModel(degree)
    e = degree
    rng = np.random.default_rng(seed)
    if kind == "exact_smooth":
        u = _random_poly_potential(e, rng)
    elif kind == "exact_singular":
        u = _random_poly_potential(e, rng, n_terms=1)
        for j in range(e + 1):
            c = complex(*np.round(rng.normal(size=2), 3))
            b = tuple(1 if i == j else 0 for i in range(e + 1))
            u.terms.append(Term(c, (0,) * (e + 1), b, Fraction(-1, 4)))
    elif kind == "bounded_random":
        fa, fb, ga, gb = {}, {}, {}, {}
        for mu in (1, 2):
            sec, form = manufactured_section(e * mu, int(rng.integers(0, 2**31)))
            fa[(mu, mu)], fb[(mu, mu)] = sec.f_a, sec.f_b
            ga[(mu, mu)], gb[(mu, mu)] = form.g_a, form.g_b
        up = bx.BundleAreaForm(0, e, OneForm(FiberExpansion(ga), None), OneForm(FiberExpansion(gb), None), eps)
        pot = bx.DiscFunction(e, FiberExpansion(fa), FiberExpansion(fb))
        return ConeForm(cone, up, eps, kind, seed, pot)
    else:
        raise ValueError(f"unknown test form kind {kind!r}; expected one of {KINDS}")
    k = -1 if kind == "exact_singular" else 0
    form = ConeForm.from_ambient(cone, u.dbar(), k=k, eps=eps, kind=kind, seed=seed)
    form.potential = pullback_function(u)
    return form


# ---- quadrature over the cone ----------------------------------------------------------


@dataclass
class ConeQuadrature:
    """Tensor rule over D: polar Gauss in t on the unit disc of each chart, polar Gauss in s on |s| < rho(t)."""

    e: int
    eps: float = 1.0
    n_t: int = 16
    n_s: int = 12

    def __post_init__(self):
        self.t, self.wt = polar_gauss_rule(1.0, self.n_t, 2 * self.n_t)
        unit, self.ws_unit = polar_gauss_rule(1.0, self.n_s, 2 * self.n_s)
        rho = np.real(bx.fiber_radius(self.e, self.eps)(self.t))
        self.s = rho[:, None] * unit[None, :]
        self.w = self.wt[:, None] * self.ws_unit[None, :] * rho[:, None] ** 2

    def charts(self):
        return ("A", "B")


def _induced_form_norm_sq(cone, chart, t, s, g_base, g_fiber):
    """|w|^2 in the induced metric for w = g_base dtbar + g_fiber dsbar: g^T conj(G)^-1 conj(g)."""
    tt = np.broadcast_to(t[:, None], s.shape)
    G = gram_matrix(cone, chart, tt, s)
    M = np.conj(G)
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    inv00, inv11 = M[..., 1, 1] / det, M[..., 0, 0] / det
    inv01, inv10 = -M[..., 0, 1] / det, -M[..., 1, 0] / det
    gb, gf = g_base, g_fiber
    val = (gb * (inv00 * np.conj(gb) + inv01 * np.conj(gf)) + gf * (inv10 * np.conj(gb) + inv11 * np.conj(gf)))
    return np.real(val)


def lp_norm(obj, p=2, quad=None, cone=None):
    """L^2 or L^inf norm on the cone of a ConeForm or a DiscFunction (needs ``cone``)."""
    if isinstance(obj, ConeForm):
        cone = obj.cone
        eps = obj.eps
    elif cone is None:
        raise ValueError("scalar fields need the cone")
    else:
        eps = getattr(quad, "eps", 1.0)
    quad = quad or ConeQuadrature(cone.degree, eps)
    total, peak = 0.0, 0.0
    for chart in quad.charts():
        tt = np.broadcast_to(quad.t[:, None], quad.s.shape)
        if isinstance(obj, ConeForm):
            gb, gf = obj.upstairs.chart(chart).evaluate(quad.t, quad.s)
            val = _induced_form_norm_sq(cone, chart, quad.t, quad.s, gb, gf)
        else:
            val = np.abs(obj.evaluate(chart, quad.t, quad.s)) ** 2
        val = np.nan_to_num(val, nan=0.0, posinf=0.0)
        jac = volume_distortion(cone, chart, tt, quad.s)
        total += float(np.sum(quad.w * jac * val))
        peak = max(peak, float(np.max(val)))
    if p == 2:
        return float(np.sqrt(total))
    if p in (np.inf, "inf"):
        return float(np.sqrt(peak))
    raise ValueError("p must be 2 or inf")


def apex_growth(form, fractions=None, n_t=24, n_phase=8):
    """Growth rate a with sup |w| ~ |z|^-a near the apex, fitted on fiber rings |s| = frac rho(t)."""
    fractions = 2.0 ** -np.arange(4, 14) if fractions is None else np.asarray(fractions)
    t, _ = polar_gauss_rule(1.0, n_t // 4, 8)
    rho = np.real(bx.fiber_radius(form.e, form.eps)(t))
    ph = np.exp(2j * np.pi * (np.arange(n_phase) + 0.5) / n_phase)
    sups = []
    for f in fractions:
        s = rho[:, None] * f * ph[None, :]
        peak = 0.0
        for chart in ("A", "B"):
            gb, gf = form.upstairs.chart(chart).evaluate(t, s)
            peak = max(peak, float(np.max(_induced_form_norm_sq(form.cone, chart, t, s, gb, gf))))
        sups.append(np.sqrt(peak))
    sups = np.asarray(sups)
    if not np.all(np.isfinite(sups)):
        return float("inf")
    if np.max(sups) == 0:
        return 0.0
    return float(-np.polyfit(np.log(fractions), np.log(np.maximum(sups, 1e-300)), 1)[0])


# ---- weak residual ----------------------------------------------------------------------


@dataclass(frozen=True)
class TestBump:
    """phi(t, s) = bump(|t - t0|^2 / rt^2) bump(|s - s0|^2 / rs^2) in chart A coordinates."""

    t0: complex
    rt: float
    s0: complex
    rs: float


def test_battery(e, eps=1.0, n=20, n_centers=4, seed=0):
    """Bumps in chart A grouped by base center so that each center's t-grid is shared.

    Even centers sit on the seam |t| = 1.  Per center the first two bumps are
    centered on the exceptional curve s = 0 (so they cross it) and the rest sit
    off it.
    """
    rng = np.random.default_rng(seed)
    per = -(-n // n_centers)
    out = []
    for i in range(n_centers):
        r = 1.0 if i % 2 == 0 else rng.uniform(0.1, 0.7)
        t0 = complex(r * np.exp(2j * np.pi * rng.uniform()))
        rt = float(rng.uniform(0.15, 0.3))
        rho_min = float(np.real(bx.fiber_radius(e, eps)(np.array([abs(t0) + rt]))[0]))
        for j in range(per):
            if j < 2:
                out.append(TestBump(t0, rt, 0j, (0.6 - 0.3 * j) * rho_min))
            else:
                s0 = complex(rng.uniform(0.2, 0.4) * rho_min * np.exp(2j * np.pi * rng.uniform()))
                out.append(TestBump(t0, rt, s0, 0.25 * rho_min))
    return out[:n]


def _bump_parts(z, z0, r):
    x = np.abs(z - z0) ** 2 / r**2
    return bump(x), bump_derivative(x) * (z - z0) / r**2


def weak_dbar_residual(f, g, battery, n=16):
    """max over bumps of |int f dphi/dzbar_k + int g_k phi| / int (|phi| + |dbar phi|), k = t, s.

    ``f`` is a DiscFunction (or a callable (t, s) in chart A coordinates), ``g`` a
    BundleAreaForm or ConeForm; f = 0 or g = 0 are allowed (pass None).
    """
    if isinstance(g, ConeForm):
        g = g.upstairs
    worst = 0.0
    for b in battery:
        t, wt = polar_gauss_rule(b.rt, n, 2 * n, b.t0)
        s_rel, ws = polar_gauss_rule(b.rs, n, 2 * n, 0.0)
        s = b.s0 + s_rel
        pt, dpt = _bump_parts(t, b.t0, b.rt)
        ps, dps = _bump_parts(s, b.s0, b.rs)
        W = wt[:, None] * ws[None, :]
        phi = pt[:, None] * ps[None, :]
        dphi_t = dpt[:, None] * ps[None, :]
        dphi_s = pt[:, None] * dps[None, :]
        if f is None:
            fv = 0.0
        elif isinstance(f, bx.DiscFunction):
            fv = _chart_a_scalar(f, t, s)
        else:
            fv = f(t[:, None], s[None, :])
        if g is None:
            gt = gs = 0.0
        else:
            gt, gs = _chart_a_global(g, t, s)
        norm = float(np.sum(W * (np.abs(phi) + np.abs(dphi_t) + np.abs(dphi_s))))
        rt = np.sum(W * (np.nan_to_num(fv * dphi_t) + np.nan_to_num(gt * phi)))
        rs = np.sum(W * (np.nan_to_num(fv * dphi_s) + np.nan_to_num(gs * phi)))
        worst = max(worst, abs(rt) / norm, abs(rs) / norm)
    return float(worst)


def _chart_a_scalar(f, t, s):
    """f on the t x s product grid in chart A coordinates, via chart B where |t| > 1."""
    inner = np.abs(t) <= 1
    out = np.zeros((t.size, s.size), dtype=complex)
    S = np.broadcast_to(s[None, :], (t.size, s.size))
    if np.any(inner):
        out[inner] = f.a.evaluate(t[inner], S[inner])
    if np.any(~inner):
        to = t[~inner]
        out[~inner] = f.b.evaluate(1 / to, to[:, None] ** f.e * S[~inner])
    return out


def _chart_a_global(g, t, s):
    """Chart-A components of g at (t, s) grids, via chart B where |t| > 1."""
    inner = np.abs(t) <= 1
    gt = np.zeros((t.size, s.size), dtype=complex)
    gs = np.zeros_like(gt)
    if np.any(inner):
        gt[inner], gs[inner] = g.a.evaluate(t[inner], np.broadcast_to(s[None, :], (int(inner.sum()), s.size)))
    if np.any(~inner):
        to = t[~inner]
        conv = g.b.convert_chart(g.e)
        gt[~inner], gs[~inner] = conv.evaluate(to, np.broadcast_to(s[None, :], (to.size, s.size)))
    return gt, gs


# ---- Hoelder quotients and apex behavior -----------------------------------------------


@dataclass
class ConeSample:
    """Shared sample pool on the cone for Hoelder quotients and apex oscillation.

    Per chart: base points t (with a twin at distance 1e-4..3e-2 for close
    pairs) and fiber points s = frac * rho(t) * phase with log-spaced fracs;
    the second half of the fiber samples is -lam times the first half, which
    lands on the opposite side of the apex on the same ruling.  Evaluating a
    field on the pool touches each base point once.
    """

    cone: ConeModel
    eps: float = 1.0
    n_base: int = 48
    n_fiber: int = 24
    seed: int = 0

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        e = self.cone.degree
        rho = bx.fiber_radius(e, self.eps)
        self.t, self.s, self.z = {}, {}, {}
        fracs = 10 ** rng.uniform(-3, np.log10(0.98), size=self.n_fiber)
        phases = np.exp(2j * np.pi * rng.uniform(size=self.n_fiber))
        lam = rng.uniform(0.1, 1.0, size=self.n_fiber)
        for chart in ("A", "B"):
            t = 0.999 * np.sqrt(rng.uniform(size=self.n_base)) * np.exp(2j * np.pi * rng.uniform(size=self.n_base))
            d = 10 ** rng.uniform(-4, -1.5, size=self.n_base)
            twin = t + d * np.exp(2j * np.pi * rng.uniform(size=self.n_base))
            tt = np.concatenate([t, twin])
            r = np.real(rho(tt))[:, None]
            base_s = fracs[None, :] * phases[None, :]
            jitter = np.concatenate([np.zeros((self.n_base, 1)), d[:, None]], axis=0)
            s1 = r * base_s + jitter * r * np.exp(2j * np.pi * rng.uniform(size=(2 * self.n_base, self.n_fiber)))
            s1 = np.where(np.abs(s1) < 0.99 * r, s1, 0.99 * r * s1 / np.abs(s1))
            s = np.concatenate([s1, -lam[None, :] * s1], axis=1)
            self.t[chart], self.s[chart] = tt, s
            self.z[chart] = blowup_map(self.cone, chart, tt[:, None], s)

    def values(self, eta):
        return {c: eta.evaluate(c, self.t[c], self.s[c]) for c in ("A", "B")}

    def pairs(self, n_pairs, seed=0):
        """Index pairs ((chart, i, j), (chart, i, j)) grouped as close, straddling, random, apex."""
        rng = np.random.default_rng(seed)
        nb, nf = self.n_base, self.n_fiber
        per = max(1, n_pairs // 4)
        out = {}
        ch = rng.integers(0, 2, size=per)
        i = rng.integers(0, nb, size=per)
        j = rng.integers(0, 2 * nf, size=per)
        out["close"] = ((ch, i, j), (ch, i + nb, j))
        i = rng.integers(0, 2 * nb, size=per)
        j = rng.integers(0, nf, size=per)
        out["straddle"] = ((ch, i, j), (ch, i, j + nf))
        ch2 = rng.integers(0, 2, size=per)
        i2 = rng.integers(0, 2 * nb, size=per)
        j2 = rng.integers(0, 2 * nf, size=per)
        i1 = rng.integers(0, 2 * nb, size=per)
        j1 = rng.integers(0, 2 * nf, size=per)
        out["random"] = ((ch, i1, j1), (ch2, i2, j2))
        n_apex = n_pairs - 3 * per
        ch = rng.integers(0, 2, size=n_apex)
        out["apex"] = ((ch, rng.integers(0, 2 * nb, size=n_apex), rng.integers(0, 2 * nf, size=n_apex)), None)
        return out

    def _pick(self, table, idx):
        ch, i, j = idx
        return np.where(ch == 0, table["A"][i, j], table["B"][i, j])

    def _pick_z(self, idx):
        ch, i, j = idx
        return np.where((ch == 0)[:, None], self.z["A"][i, j], self.z["B"][i, j])


def holder_quotient(eta, cone=None, alpha=0.5, n_pairs=10000, seed=0, eps=1.0, apex_value=0.0, use_upper=False, sample=None):
    """max |eta(z) - eta(w)| / d(z, w)^alpha over n_pairs sampled pairs.

    d is the chord, a lower bound for the intrinsic distance (so the quotient
    bounds the intrinsic one from above), or with ``use_upper`` the through-apex
    upper bound.  Pairs are split between close pairs, pairs straddling the
    apex on one ruling, random pairs, and points paired with the apex itself.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    sample = sample or ConeSample(cone, eps, seed=seed)
    vals = sample.values(eta) if not isinstance(eta, dict) else eta
    diffs, za, zb = [], [], []
    for name, (p, q) in sample.pairs(n_pairs, seed).items():
        zp = sample._pick_z(p)
        if q is None:
            diffs.append(sample._pick(vals, p) - apex_value)
            za.append(zp)
            zb.append(np.zeros_like(zp))
        else:
            diffs.append(sample._pick(vals, p) - sample._pick(vals, q))
            za.append(zp)
            zb.append(sample._pick_z(q))
    diff = np.concatenate(diffs)
    lower, upper = distance_bounds(np.concatenate(za), np.concatenate(zb))
    dist = upper if use_upper else lower
    keep = dist > 0
    return float(np.max(np.abs(diff[keep]) / dist[keep] ** alpha, initial=0.0))


def apex_oscillation(eta, cone=None, deltas=(0.5, 0.25, 0.125), eps=1.0, apex_value=0.0, sample=None, seed=0):
    """sup |eta(z) - apex_value| over pool points with |z| < delta, per delta."""
    sample = sample or ConeSample(cone, eps, seed=seed)
    vals = sample.values(eta) if not isinstance(eta, dict) else eta
    out = []
    for delta in deltas:
        worst = 0.0
        for c in ("A", "B"):
            inside = np.linalg.norm(sample.z[c], axis=-1) < delta
            worst = max(worst, float(np.max(np.abs(vals[c][inside] - apex_value), initial=0.0)))
        out.append(worst)
    return np.array(out)


def decay_exponent(deltas, osc):
    """Least-squares slope of log osc against log delta."""
    deltas, osc = np.asarray(deltas, dtype=float), np.asarray(osc, dtype=float)
    keep = osc > 0
    if keep.sum() < 2:
        return float("inf")
    return float(np.polyfit(np.log(deltas[keep]), np.log(osc[keep]), 1)[0])


# ---- Jacobian weight ------------------------------------------------------------------


def norm_transfer_check(cone, funcs, n=24):
    """[min, max] of ||g||^2_{L^2(Pi(W))} / ||s^k0 Pi^* g||^2_{flat W} over the test functions.

    W = {|t| <= 1, |s| <= 1} in chart A.  Returns (interval, skipped) where
    skipped counts functions vanishing on W.
    """
    t, wt = polar_gauss_rule(1.0, n, 2 * n)
    s, ws = polar_gauss_rule(1.0, n, 2 * n)
    tt = np.broadcast_to(t[:, None], (t.size, s.size))
    ss = np.broadcast_to(s[None, :], (t.size, s.size))
    W = wt[:, None] * ws[None, :]
    z = blowup_map(cone, "A", tt, ss)
    jac = volume_distortion(cone, "A", tt, ss)
    k0 = cone.sing_order
    ratios, skipped = [], 0
    for g in funcs:
        gv = np.abs(np.asarray(g(z), dtype=complex)) ** 2
        flat = float(np.sum(W * np.abs(ss) ** (2 * k0) * gv))
        if flat <= 1e-300:
            skipped += 1
            continue
        ratios.append(float(np.sum(W * jac * gv)) / flat)
    if not ratios:
        return None, skipped
    return (min(ratios), max(ratios)), skipped


def random_ambient_functions(e, n, seed=0):
    rng = np.random.default_rng(seed)
    return [_random_poly_potential(e, rng, n_terms=3, max_deg=2) for _ in range(n)]


# ---- pipelines -------------------------------------------------------------------------


@dataclass
class SolutionReport:
    eta: object
    l2_in: float = float("nan")
    l2_out: float = float("nan")
    sup_in: float = float("nan")
    sup_out: float = float("nan")
    holder_quotient: float = float("nan")
    residual: float = float("nan")
    fd_residual: float = float("nan")
    constant_estimate: float = float("nan")
    obstruction: object = None
    clean: bool = True
    oscillation: object = None
    decay_exponent: float = float("nan")
    n_r: int = 0
    notes: list = field(default_factory=list)

    def as_dict(self):
        out = {
            "n_r": self.n_r,
            "l2_in": self.l2_in,
            "l2_out": self.l2_out,
            "sup_in": self.sup_in,
            "sup_out": self.sup_out,
            "holder_quotient": self.holder_quotient,
            "residual": self.residual,
            "fd_residual": self.fd_residual,
            "constant_estimate": self.constant_estimate,
            "clean": self.clean,
            "decay_exponent": self.decay_exponent,
            "notes": list(self.notes),
        }
        if self.obstruction is not None:
            out["obstruction"] = self.obstruction.as_dict()
        if self.oscillation is not None:
            out["oscillation"] = [float(x) for x in self.oscillation]
        return out


def _zero_report(n_r):
    return SolutionReport(bx.DiscFunction(0), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, n_r=n_r)


def check_l2_weight(w, k0=1):
    """|s|^k0 times the components must be finite on samples (pi^* w in weight -k0)."""
    v = w.with_weight(-k0).weighted_sup()
    if not np.isfinite(v):
        raise bx.PreconditionError("pulled-back form is not in the weight -k0 class on samples")
    return v


def solve_l2(form, mu_max=bx.MU_MAX, n_r=64, battery=None, quad=None, obstruction_tol=1e-4):
    """Weight -k0 pipeline; returns a SolutionReport (not clean when an obstruction is found)."""
    cone = form.cone
    k = -cone.sing_order
    w = form.upstairs.with_weight(k)
    if w.is_zero:
        rep = _zero_report(n_r)
        rep.eta = bx.DiscFunction(cone.degree)
        return rep
    l2_in = lp_norm(form, 2, quad)
    if not np.isfinite(l2_in):
        raise bx.PreconditionError("form is not square integrable on the quadrature")
    check_l2_weight(w, cone.sing_order)
    eta, report = bx.solve_dbar_k(w, k, mu_max, n_r=n_r, obstruction_tol=obstruction_tol)
    battery = battery or test_battery(cone.degree, form.eps)
    out = SolutionReport(eta, n_r=n_r, obstruction=report, clean=report.clean)
    out.l2_in = l2_in
    out.l2_out = lp_norm(eta, 2, quad or ConeQuadrature(cone.degree, form.eps), cone)
    out.constant_estimate = out.l2_out / l2_in if l2_in > 0 else float("nan")
    out.residual = weak_dbar_residual(eta, w, battery)
    if not report.clean:
        out.notes.append("obstruction present: eta solves dbar eta = w minus the reported representatives")
    return out


def solve_bounded(form, mu_max=8, n_r=64, battery=None, quad=None, genus=0, deltas=None, n_pairs=10000, seed=0, use_upper=False):
    """Bounded pipeline: regularize twice, solve in weight 1, report C^0 and Hoelder data."""
    cone = form.cone
    verdict, _ = hypothesis_check("T14", CurveSpec(genus, cone.degree))
    if verdict != HOLDS:
        raise bx.PreconditionError(f"hypothesis of the bounded solver is {verdict}")
    w = form.upstairs.with_weight(0)
    if w.is_zero:
        rep = _zero_report(n_r)
        rep.eta = bx.DiscFunction(cone.degree)
        return rep
    sup_in = lp_norm(form, np.inf, quad)
    growth = apex_growth(form)
    if not np.isfinite(sup_in) or growth > 0.05:
        raise bx.PreconditionError(f"unbounded form rejected: |w| grows like |z|^-{growth:.2f} at the apex")
    reg = bx.regularize_pullback(w, n_r=n_r)
    u2, report = bx.solve_dbar_k(reg.omega1, 1, mu_max, n_r=n_r)
    eta = reg.correction + u2
    battery = battery or test_battery(cone.degree, form.eps)
    out = SolutionReport(eta, n_r=n_r, obstruction=report, clean=report.clean)
    out.sup_in = sup_in
    out.sup_out = lp_norm(eta, np.inf, quad or ConeQuadrature(cone.degree, form.eps), cone)
    out.constant_estimate = out.sup_out / sup_in if sup_in > 0 else float("nan")
    out.residual = weak_dbar_residual(eta, w, battery)
    deltas = np.asarray(deltas if deltas is not None else form.eps * 0.5 ** np.arange(1, 6))
    sample = ConeSample(cone, form.eps, seed=seed)
    vals = sample.values(eta)
    out.oscillation = apex_oscillation(vals, deltas=deltas, sample=sample)
    out.decay_exponent = decay_exponent(deltas, out.oscillation)
    out.holder_quotient = holder_quotient(vals, alpha=0.5, n_pairs=n_pairs, sample=sample, seed=seed, use_upper=use_upper)
    return out


def distortion_bounds(cone, region_radius=1.0):
    prof = distortion_profile(cone, region_radius)
    return prof.c_min, prof.c_max

"""Invariant checks run by the verify-suite experiment.

Each check takes an ExperimentConfig and returns (value, threshold, passed).
"""
import numpy as np

from . import bundle_expansion as bx
from .cone_solver import KINDS, generate_test_form
from .cp1_dbar import TwoChartSolution, cocycle_form, manufactured_section
from .obstruction import obstruction_table, rr_dims, CurveSpec

CHART_TOL = 1e-12
LINEARITY_TOL = 1e-10


def chart_compatibility(cfg):
    """Worst relative chart mismatch over seeded test forms, their potentials and CP^1 data."""
    worst = 0.0
    for kind in KINDS:
        for seed in (0, 1):
            f = generate_test_form(kind, seed, cfg.degree, cfg.eps)
            worst = max(worst, f.upstairs.transition_defect())
            if f.potential is not None:
                worst = max(worst, f.potential.transition_defect(eps=cfg.eps))
    for m in (-3, 0, 2):
        sec, form = manufactured_section(m, 0)
        worst = max(worst, sec.transition_defect(), form.transition_defect(radii=(0.9, 1.0, 1.1)))
    return worst, CHART_TOL, worst <= CHART_TOL


def riemann_roch(cfg):
    """Count of determinate rows violating h0 - h1 = deg + 1 - g, over genus 0..4 and |deg| <= 20."""
    bad = 0
    for g in range(5):
        for deg in range(-20, 21):
            for hint in (None, True, False):
                h0, h1 = rr_dims(g, deg, hint)
                if h0 is not None and h0 - h1 != deg + 1 - g:
                    bad += 1
        for e in range(1, 5):
            bad += len(obstruction_table(CurveSpec(g, e), k=-2, mu_range=range(-4, 6)).riemann_roch_defects())
    return bad, 0, bad == 0


def _rel(x, y):
    return float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300))


def linearity_cp1(cfg):
    # exact data plus a cocycle so the obstruction part is not pure roundoff
    _, g1 = manufactured_section(-3, 1)
    g2 = cocycle_form(-3, 1) + manufactured_section(-3, 2)[1]
    a, b = 0.7 - 0.2j, -1.3
    s1, s2 = TwoChartSolution(g1, cfg.n_r), TwoChartSolution(g2, cfg.n_r)
    s12 = TwoChartSolution(g1.scale(a) + g2.scale(b), cfg.n_r)
    t = 0.9 * np.exp(2j * np.pi * np.arange(17) / 17) * np.linspace(0.1, 1.0, 17)
    err = max(_rel(s12.f_a(t), a * s1.f_a(t) + b * s2.f_a(t)), _rel(s12.f_b(t), a * s1.f_b(t) + b * s2.f_b(t)),
              _rel(s12.obstruction.values, a * s1.obstruction.values + b * s2.obstruction.values))
    return err, LINEARITY_TOL, err <= LINEARITY_TOL


def _disc_points(e, eps):
    t = np.array([0.1 + 0.2j, -0.5 + 0.3j, 0.8j, 0.95])
    s = 0.4 * bx.fiber_radius(e, eps)(t)[:, None] * np.exp(1j * np.array([0.3, 2.0, 4.1]))[None, :]
    return t, s


def linearity_bundle(cfg):
    """solve_dbar_k and the regularization are linear in the data."""
    from .bundle_expansion import regularize_pullback, solve_dbar_k

    f1 = generate_test_form("exact_smooth", 1, cfg.degree, cfg.eps)
    f2 = generate_test_form("bounded_random", 2, cfg.degree, cfg.eps)
    a, b = 1.5 + 0.5j, -0.25
    w1, w2 = f1.upstairs.with_weight(-1), f2.upstairs.with_weight(-1)
    w12 = w1.scale(a) + w2.scale(b)
    t, s = _disc_points(cfg.degree, cfg.eps)
    e1, _ = solve_dbar_k(w1, -1, cfg.mu_max, n_r=cfg.n_r)
    e2, _ = solve_dbar_k(w2, -1, cfg.mu_max, n_r=cfg.n_r)
    e12, _ = solve_dbar_k(w12, -1, cfg.mu_max, n_r=cfg.n_r)
    err = 0.0
    for chart in ("A", "B"):
        err = max(err, _rel(e12.evaluate(chart, t, s), a * e1.evaluate(chart, t, s) + b * e2.evaluate(chart, t, s)))
    r1 = regularize_pullback(w1.with_weight(0), n_r=cfg.n_r)
    r2 = regularize_pullback(w2.with_weight(0), n_r=cfg.n_r)
    r12 = regularize_pullback(w12.with_weight(0), n_r=cfg.n_r)
    for chart in ("A", "B"):
        lhs = r12.correction.evaluate(chart, t, s)
        rhs = a * r1.correction.evaluate(chart, t, s) + b * r2.correction.evaluate(chart, t, s)
        err = max(err, _rel(lhs, rhs))
    return err, LINEARITY_TOL, err <= LINEARITY_TOL


def exact_nullity(cfg):
    """Largest obstruction entry over exact inputs solved in weight -1."""
    from .bundle_expansion import solve_dbar_k

    worst = 0.0
    for kind in ("exact_smooth", "exact_singular"):
        for seed in (0, 1):
            f = generate_test_form(kind, seed, cfg.degree, cfg.eps)
            _, rep = solve_dbar_k(f.upstairs.with_weight(-1), -1, cfg.mu_max, n_r=cfg.n_r)
            for o in rep.entries.values():
                worst = max(worst, o.norm())
    return worst, cfg.obstruction_tol, worst <= cfg.obstruction_tol


SUITE = (
    ("chart_compatibility", chart_compatibility),
    ("riemann_roch", riemann_roch),
    ("linearity_cp1", linearity_cp1),
    ("linearity_bundle", linearity_bundle),
    ("exact_nullity", exact_nullity),
)

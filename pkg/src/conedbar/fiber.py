"""Exact fiber bookkeeping on the line bundle O(-e) over CP^1.

A function on a chart is stored as a finite sum

    F(t, s) = sum_{(n, g)} c_{n,g}(t) e^{i n arg s} |s|^g,

with integer n, rational g and BaseFunc coefficients.  Multiplication by s or
sbar, the fiber derivatives, and the fiber Cauchy transform over |s| < R(t)
act on the monomials in closed form, so the fiber direction carries no
discretization error.
"""
from fractions import Fraction

import numpy as np
import sympy as sp

from .basefunc import TB, ZERO, BaseFunc, Sym, T, add, as_basefunc, mul


class LogTermError(ValueError):
    """The fiber Cauchy transform of this monomial produces a log |s| term."""


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x).limit_denominator(10**6)


def monomial(n, g, s):
    """e^{i n arg s} |s|^g, with the continuous value at s = 0 where it exists."""
    s = np.asarray(s, dtype=complex)
    r = np.abs(s)
    zero = r == 0
    rs = np.where(zero, 1.0, r)
    ph = np.where(zero, 1.0, s / rs)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = ph**n * rs ** float(g)
    if np.any(zero):
        if g > 0:
            at0 = 0.0
        elif g == 0 and n == 0:
            at0 = 1.0
        else:
            at0 = np.nan
        val = np.where(zero, at0, val)
    return val


class FiberExpansion:
    def __init__(self, terms=None):
        self.terms = {}
        for (n, g), c in (terms or {}).items():
            c = as_basefunc(c)
            if not c.is_zero:
                key = (int(n), _frac(g))
                self.terms[key] = add(self.terms[key], c) if key in self.terms else c

    @classmethod
    def monomial_term(cls, n, g, coeff=1):
        return cls({(n, g): coeff})

    @classmethod
    def holomorphic(cls, mu, coeff):
        """coeff(t) * s^mu."""
        return cls({(mu, mu): coeff})

    def copy(self):
        return FiberExpansion(dict(self.terms))

    @property
    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = add(out[k], c) if k in out else c
        return FiberExpansion(out)

    def __neg__(self):
        return FiberExpansion({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = as_basefunc(c)
        return FiberExpansion({k: mul(c, v) for k, v in self.terms.items()})

    def shift(self, dn, dg):
        """Multiply by e^{i dn arg s} |s|^dg: s is (1, 1), sbar is (-1, 1)."""
        dg = _frac(dg)
        return FiberExpansion({(n + dn, g + dg): c for (n, g), c in self.terms.items()})

    def times_s_power(self, k):
        return self.shift(k, k)

    def dbar_fiber(self):
        """d/dsbar: (n, g) -> ((g - n)/2) (n + 1, g - 1)."""
        out = {}
        for (n, g), c in self.terms.items():
            f = (g - n) / 2
            if f != 0:
                out[(n + 1, g - 1)] = mul(Sym(sp.Rational(f.numerator, f.denominator)), c)
        return FiberExpansion(out)

    def d_fiber(self):
        """d/ds: (n, g) -> ((g + n)/2) (n - 1, g - 1)."""
        out = {}
        for (n, g), c in self.terms.items():
            f = (g + n) / 2
            if f != 0:
                out[(n - 1, g - 1)] = mul(Sym(sp.Rational(f.numerator, f.denominator)), c)
        return FiberExpansion(out)

    def dbar_base(self):
        return FiberExpansion({k: c.dbar() for k, c in self.terms.items()})

    def cauchy_fiber(self, radius):
        """Fiber Cauchy transform over |s| < radius(t); radius is a number or a BaseFunc.

        For kappa = g + 2 - n != 0:
          n <= 0: (n, g) -> (2/kappa) (n-1, g+1)
          n >= 1: (n, g) -> (2/kappa) (n-1, g+1) - (2 R^kappa / kappa) (n-1, n-1)
        """
        rad = radius if isinstance(radius, BaseFunc) else Sym(sp.nsimplify(radius))
        out = FiberExpansion()
        for (n, g), c in self.terms.items():
            kappa = g + 2 - n
            if kappa == 0:
                raise LogTermError(f"monomial (n={n}, g={g}) has a logarithmic fiber transform")
            if n <= 0 and g <= -2:
                raise ValueError(f"monomial (n={n}, g={g}) is not integrable at s = 0")
            k = sp.Rational(kappa.numerator, kappa.denominator)
            out = out + FiberExpansion({(n - 1, g + 1): mul(Sym(2 / k), c)})
            if n >= 1:
                rk = _radius_power(rad, k)
                out = out + FiberExpansion({(n - 1, n - 1): mul(mul(Sym(-2 / k), rk), c)})
        return out

    def coefficient(self, n, g):
        return self.terms.get((n, _frac(g)), ZERO)

    def holomorphic_part(self):
        return FiberExpansion({k: c for k, c in self.terms.items() if k[0] == k[1]})

    def min_exponent(self):
        return min((g for _, g in self.terms), default=None)

    def evaluate(self, t, s):
        """Values at t (shape (M,)) and s (shape (M,) or (M, L))."""
        t = np.asarray(t, dtype=complex)
        s = np.asarray(s, dtype=complex)
        out = np.zeros(np.broadcast_shapes(s.shape, t.shape + (1,) * (s.ndim - t.ndim)), dtype=complex)
        for (n, g), c in self.terms.items():
            cv = c(t)
            cv = cv.reshape(cv.shape + (1,) * (s.ndim - t.ndim))
            out = out + cv * monomial(n, g, s)
        return out

    def convert_chart(self, e):
        """Rewrite in the other chart: (tau, sigma) = (1/t, t^e s) maps (n, g) terms to

        c(1/t') * t'^{en} |t'|^{e(g - n)} (n, g) in the new base coordinate t'.
        """
        out = {}
        for (n, g), c in self.terms.items():
            ex = sp.Rational((e * (g - n)).numerator, (e * (g - n)).denominator) / 2
            factor = Sym(T ** (e * n) * (T * TB) ** ex)
            out[(n, g)] = mul(c.inverted(), factor)
        return FiberExpansion(out)

    def __repr__(self):
        inner = ", ".join(f"({n},{g}): {c!r}" for (n, g), c in sorted(self.terms.items()))
        return f"FiberExpansion({{{inner}}})"


def _radius_power(rad, k):
    if isinstance(rad, Sym):
        return Sym(rad.expr**k)
    return _PowerOf(rad, k)


class _PowerOf(BaseFunc):
    def __init__(self, f, k):
        super().__init__()
        self.f = f
        self.k = float(k)

    def _eval(self, t):
        return self.f(t) ** self.k


class OneForm:
    """(0,1)-form base * dtbar + fiber * dsbar on one chart."""

    def __init__(self, base=None, fiber=None):
        self.base = base if base is not None else FiberExpansion()
        self.fiber = fiber if fiber is not None else FiberExpansion()

    def __add__(self, other):
        return OneForm(self.base + other.base, self.fiber + other.fiber)

    def __neg__(self):
        return OneForm(-self.base, -self.fiber)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return OneForm(self.base.scale(c), self.fiber.scale(c))

    def times_s_power(self, k):
        return OneForm(self.base.times_s_power(k), self.fiber.times_s_power(k))

    @property
    def is_zero(self):
        return self.base.is_zero and self.fiber.is_zero

    def convert_chart(self, e):
        """beta dtau-bar + gamma dsigma-bar in the other chart.

        dtau-bar = -dtbar / tbar^2 and dsigma-bar = e tbar^{e-1} sbar dtbar + tbar^e dsbar.
        """
        b = self.base.convert_chart(e)
        g = self.fiber.convert_chart(e)
        base = b.scale(Sym(-1 / TB**2)) + g.scale(Sym(e * TB ** (e - 1))).shift(-1, 1)
        fiber = g.scale(Sym(TB**e))
        return OneForm(base, fiber)

    def closedness_defect(self):
        """d/dtbar(fiber) - d/dsbar(base): the dtbar ^ dsbar coefficient of dbar of the form."""
        return self.fiber.dbar_base() - self.base.dbar_fiber()

    def evaluate(self, t, s):
        return self.base.evaluate(t, s), self.fiber.evaluate(t, s)


def dbar_scalar(f):
    """dbar of a scalar FiberExpansion as a OneForm."""
    return OneForm(f.dbar_base(), f.dbar_fiber())

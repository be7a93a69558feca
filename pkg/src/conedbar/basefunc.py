"""Functions of the base coordinate t that know their own dbar.

These are the coefficients of fiber expansions on the disc bundle.  Symbolic
coefficients (sympy in t and tbar, treated as independent) stay exact through
differentiation and chart changes; numerical ones (Cauchy transforms, contour
coefficients) are evaluated by quadrature and cached per evaluation point set.
"""
from collections import OrderedDict

import numpy as np
import sympy as sp

from .quadrature import cauchy_transform_values, dbar_fd, subtraction_band, smooth_step, smooth_step_derivative

T, TB = sp.symbols("t tb")

_CACHE_SIZE = 6


def _points_key(t):
    return (t.shape, t.tobytes())


class BaseFunc:
    """Abstract complex function of t with a dbar operator."""

    compact = False  # vanishes identically outside a known region; evaluate it first in products

    def __init__(self):
        self._cache = OrderedDict()

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        flat = t.ravel()
        key = _points_key(flat)
        hit = self._cache.get(key)
        if hit is None:
            hit = np.broadcast_to(np.asarray(self._eval(flat), dtype=complex), flat.shape).copy()
            self._cache[key] = hit
            if len(self._cache) > _CACHE_SIZE:
                self._cache.popitem(last=False)
        return hit.reshape(t.shape)

    def _eval(self, t):
        raise NotImplementedError

    def dbar(self):
        raise NotImplementedError(f"dbar not available for {type(self).__name__}")

    def dbar_or_none(self):
        """Cached dbar(), or None when it is not available in closed form."""
        if not hasattr(self, "_dbar_obj"):
            try:
                self._dbar_obj = self.dbar()
            except NotImplementedError:
                self._dbar_obj = None
        return self._dbar_obj

    @property
    def is_zero(self):
        return False

    def inverted(self):
        """The function t -> self(1/t)."""
        return Inverted(self)

    def __add__(self, other):
        return add(self, as_basefunc(other))

    __radd__ = __add__

    def __neg__(self):
        return mul(Sym(-1), self)

    def __sub__(self, other):
        return add(self, -as_basefunc(other))

    def __rsub__(self, other):
        return add(as_basefunc(other), -self)

    def __mul__(self, other):
        return mul(self, as_basefunc(other))

    __rmul__ = __mul__


class Sym(BaseFunc):
    """Closed-form coefficient given by a sympy expression in t and tb = conj(t)."""

    def __init__(self, expr):
        super().__init__()
        self.expr = sp.sympify(expr)
        self._fn = None

    def _eval(self, t):
        if self._fn is None:
            self._fn = sp.lambdify((T, TB), self.expr, modules="numpy")
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._fn(t, np.conj(t))

    def dbar(self):
        return Sym(sp.diff(self.expr, TB))

    @property
    def is_zero(self):
        return self.expr == 0

    def inverted(self):
        return Sym(self.expr.subs({T: 1 / T, TB: 1 / TB}, simultaneous=True))

    def __repr__(self):
        return f"Sym({self.expr})"


ZERO = Sym(0)
ONE = Sym(1)


def dbar_values(f, t):
    """dbar f at t: closed form when the function provides one, else central differences."""
    d = f.dbar_or_none() if isinstance(f, BaseFunc) else None
    if d is None:
        return dbar_fd(f, t)
    return d(t)


def as_basefunc(x):
    if isinstance(x, BaseFunc):
        return x
    return Sym(x)


class Sum(BaseFunc):
    def __init__(self, terms):
        super().__init__()
        self.terms = list(terms)
        self.compact = all(f.compact for f in self.terms)

    def _eval(self, t):
        out = np.zeros(t.shape, dtype=complex)
        for f in self.terms:
            out = out + f(t)
        return out

    def dbar(self):
        return add(*[f.dbar() for f in self.terms])


class Product(BaseFunc):
    """a * b, evaluating b only where a is nonzero (a is the compact factor if any)."""

    def __init__(self, a, b):
        super().__init__()
        if b.compact and not a.compact:
            a, b = b, a
        self.a, self.b = a, b
        self.compact = a.compact or b.compact

    def _eval(self, t):
        av = self.a(t)
        out = np.zeros(t.shape, dtype=complex)
        live = av != 0
        if np.all(live):
            return av * self.b(t)
        if np.any(live):
            out[live] = av[live] * self.b(t[live])
        return out

    def dbar(self):
        return add(mul(self.a.dbar(), self.b), mul(self.a, self.b.dbar()))


def add(*fs):
    syms, rest = [], []
    for f in fs:
        if isinstance(f, Sum):
            for g in f.terms:
                (syms if isinstance(g, Sym) else rest).append(g)
        elif isinstance(f, Sym):
            syms.append(f)
        else:
            rest.append(f)
    terms = list(rest)
    if syms:
        s = Sym(sp.Add(*[g.expr for g in syms]))
        if not s.is_zero:
            terms.insert(0, s)
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Sum(terms)


def mul(a, b):
    if a.is_zero or b.is_zero:
        return ZERO
    if isinstance(a, Sym) and isinstance(b, Sym):
        return Sym(a.expr * b.expr)
    if isinstance(a, Sym) and a.expr == 1:
        return b
    if isinstance(b, Sym) and b.expr == 1:
        return a
    return Product(a, b)


class Inverted(BaseFunc):
    """t -> f(1/t); dbar picks up d(1/tbar)/dtbar = -1/tbar^2."""

    def __init__(self, f):
        super().__init__()
        self.f = f

    def _eval(self, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.f(1 / t)

    def dbar(self):
        return mul(Sym(-1 / TB**2), self.f.dbar().inverted())

    def inverted(self):
        return self.f


class Numeric(BaseFunc):
    """Wrap a vectorized callable; ``dbar_fn`` (a BaseFunc or callable) is optional."""

    def __init__(self, fn, dbar_fn=None, compact=False):
        super().__init__()
        self.fn = fn
        self._dbar = dbar_fn
        self.compact = compact

    def _eval(self, t):
        return self.fn(t)

    def dbar(self):
        if self._dbar is None:
            return super().dbar()
        return self._dbar if isinstance(self._dbar, BaseFunc) else Numeric(self._dbar)


class Indicator(BaseFunc):
    compact = True

    def __init__(self, radius):
        super().__init__()
        self.radius = radius

    def _eval(self, t):
        return (np.abs(t) < self.radius).astype(complex)


class LogRadialStep(BaseFunc):
    """chi(t) = step(sign * log|t|): the chart-A cutoff of the two-chart partition of unity.

    With sign = +1 this is 1 for |t| <= e^-delta and 0 for |t| >= e^delta; and
    chi_A(t) + chi_A(1/t) = 1, so the same function serves chart B in its own coordinate.
    """

    compact = True

    def __init__(self, delta, sign=1):
        super().__init__()
        self.delta = delta
        self.sign = sign

    def _eval(self, t):
        with np.errstate(divide="ignore"):
            x = self.sign * np.log(np.abs(t))
        return smooth_step(x, self.delta).astype(complex)

    def dbar(self):
        return LogRadialStepDbar(self.delta, self.sign)

    def inverted(self):
        return LogRadialStep(self.delta, -self.sign)


class LogRadialStepDbar(BaseFunc):
    compact = True

    def __init__(self, delta, sign):
        super().__init__()
        self.delta = delta
        self.sign = sign

    def _eval(self, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            x = self.sign * np.log(np.abs(t))
            d = smooth_step_derivative(x, self.delta)
            live = d != 0
            out = np.zeros(t.shape, dtype=complex)
            out[live] = self.sign * d[live] / (2 * np.conj(t[live]))
        return out

    def dbar(self):
        return LogRadialStepDbar2(self.delta, self.sign)


class LogRadialStepDbar2(BaseFunc):
    """dbar of LogRadialStepDbar: d'(x) / (4 tbar^2) - sign d(x) / (2 tbar^2), x = sign log|t|."""

    compact = True

    def __init__(self, delta, sign):
        super().__init__()
        self.delta = delta
        self.sign = sign

    def _eval(self, t):
        h = 1e-3 * self.delta
        with np.errstate(divide="ignore", invalid="ignore"):
            x = self.sign * np.log(np.abs(t))
            d = smooth_step_derivative(x, self.delta)
            # fourth-order stencil in x; d is a cheap closed form
            dd = (8 * (smooth_step_derivative(x + h, self.delta) - smooth_step_derivative(x - h, self.delta))
                  - (smooth_step_derivative(x + 2 * h, self.delta) - smooth_step_derivative(x - 2 * h, self.delta))) / (12 * h)
            live = (np.abs(x) < self.delta + 2 * h) & np.isfinite(x)
            out = np.zeros(t.shape, dtype=complex)
            tb2 = np.conj(t[live]) ** 2
            out[live] = dd[live] / (4 * tb2) - self.sign * d[live] / (2 * tb2)
        return out


class CauchyBatch:
    """Cauchy transforms of several BaseFuncs over one grid, computed together.

    Node samples are taken once; evaluation at a point set produces all columns in a
    single kernel call, cached per point set.
    """

    def __init__(self, grid, funcs):
        self.grid = grid
        self.funcs = list(funcs)
        self._nodes = None
        self._cache = OrderedDict()

    def node_values(self):
        if self._nodes is None:
            self._nodes = np.stack([f(self.grid.nodes) for f in self.funcs], axis=1)
            self._nodes[~np.isfinite(self._nodes)] = 0.0
        return self._nodes

    def evaluate(self, t):
        key = _points_key(t)
        hit = self._cache.get(key)
        if hit is None:
            inside = np.abs(t) < self.grid.radius + subtraction_band(self.grid)
            pv = np.zeros((t.size, len(self.funcs)), dtype=complex)
            q = np.zeros_like(pv)
            if np.any(inside):
                ti = t[inside]
                pv[inside] = np.stack([f(ti) for f in self.funcs], axis=1)
                q[inside] = np.stack([dbar_values(f, ti) for f in self.funcs], axis=1)
            hit = cauchy_transform_values(self.grid, self.node_values(), t, pv, q)
            self._cache[key] = hit
            if len(self._cache) > _CACHE_SIZE:
                self._cache.popitem(last=False)
        return hit

    def members(self):
        return [CauchyT(self, k) for k in range(len(self.funcs))]


class CauchyT(BaseFunc):
    """Column k of a CauchyBatch: the Cauchy transform of funcs[k] over the batch grid."""

    def __init__(self, batch, k):
        super().__init__()
        self.batch = batch
        self.k = k

    def _eval(self, t):
        return self.batch.evaluate(t)[:, self.k]

    def dbar(self):
        return mul(Indicator(self.batch.grid.radius), self.batch.funcs[self.k])


def cauchy_t(grid, funcs):
    """Cauchy transforms of ``funcs`` over ``grid`` as BaseFuncs sharing one batch."""
    funcs = list(funcs)
    out = [None] * len(funcs)
    live = [i for i, f in enumerate(funcs) if not f.is_zero]
    if live:
        members = CauchyBatch(grid, [funcs[i] for i in live]).members()
        for i, m in zip(live, members):
            out[i] = m
    return [ZERO if f is None else f for f in out]

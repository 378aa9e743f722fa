"""Forward-mode automatic differentiation with truncated multivariate Taylor jets.

A :class:`Jet` holds the Taylor coefficients ``c[alpha] = d^alpha f / alpha!`` of a
function of ``n`` chart coordinates, truncated at total degree ``order``.  The
coefficient array carries trailing batch axes, so one jet can represent the same
expression evaluated at many points at once.

Jets of different orders may be combined; the result is truncated to the lower
order.  Taking a partial derivative lowers the order by one, which is how the
geometry code tracks how many derivatives of the metric are still available.

Field callables written against the helpers in this module (``exp``, ``log``,
``sqrt``...) work unchanged on floats, numpy arrays and jets.
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "JetSpace",
    "variables",
    "univariate",
    "d",
    "value",
    "order_of",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "arctan",
    "arcsinh",
    "arccosh",
    "power",
    "taylor_apply",
    "antiderivative",
]


class JetSpace:
    """Index tables for the monomials of degree <= ``order`` in ``n`` variables.

    Monomials are graded by total degree, so the space of a lower order is a
    prefix of the space of a higher order.  Instances are cached.
    """

    def __init__(self, n: int, order: int):
        self.n = n
        self.order = order
        multis = [m for m in product(range(order + 1), repeat=n) if sum(m) <= order]
        multis.sort(key=lambda m: (sum(m), tuple(-k for k in m)))
        self.multis = multis
        self.index = {m: i for i, m in enumerate(multis)}
        self.size = len(multis)
        self.factorial = np.array([math.prod(math.factorial(k) for k in m) for m in multis], dtype=float)

        mi, mj, mk = [], [], []
        for i, a in enumerate(multis):
            for j, b in enumerate(multis):
                s = tuple(x + y for x, y in zip(a, b))
                k = self.index.get(s)
                if k is not None:
                    mi.append(i)
                    mj.append(j)
                    mk.append(k)
        self._mi = np.array(mi, dtype=np.intp)
        self._mj = np.array(mj, dtype=np.intp)
        scatter = np.zeros((self.size, len(mk)))
        scatter[mk, np.arange(len(mk))] = 1.0
        self._scatter = scatter

        # d/dx_v maps the monomial alpha + e_v of this space onto alpha of the space below
        self._deriv = []
        if order >= 1:
            lower = [m for m in multis if sum(m) <= order - 1]
            for v in range(n):
                src, fac = [], []
                for m in lower:
                    up = tuple(k + (1 if i == v else 0) for i, k in enumerate(m))
                    src.append(self.index[up])
                    fac.append(up[v])
                self._deriv.append((np.array(src, dtype=np.intp), np.array(fac, dtype=float)))

    @staticmethod
    @lru_cache(maxsize=None)
    def get(n: int, order: int) -> "JetSpace":
        return JetSpace(n, order)

    def __repr__(self):
        return f"JetSpace(n={self.n}, order={self.order})"


def _expand(c: np.ndarray, ndim: int) -> np.ndarray:
    """Append singleton axes so a batch-shaped array broadcasts against coefficients."""
    return c.reshape(c.shape + (1,) * (ndim - c.ndim)) if c.ndim < ndim else c


def _align(c: np.ndarray, shape: tuple) -> np.ndarray:
    """View coefficients ``(size, *batch)`` with batch axes right-aligned to ``shape``."""
    batch = c.shape[1:]
    extra = len(shape) - len(batch)
    if extra > 0:
        c = c.reshape((c.shape[0],) + (1,) * extra + batch)
    return c


class Jet:
    """Truncated Taylor expansion of a scalar function around a point (or a batch of points)."""

    __slots__ = ("space", "c")
    __array_ufunc__ = None  # make numpy defer to the reflected operators below

    def __init__(self, space: JetSpace, c: np.ndarray):
        self.space = space
        self.c = c

    # -- bookkeeping ---------------------------------------------------------
    @property
    def order(self) -> int:
        return self.space.order

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def batch_shape(self) -> tuple:
        return self.c.shape[1:]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        sp = JetSpace.get(self.n, order)
        return Jet(sp, self.c[: sp.size])

    def coefficient(self, alpha: Sequence[int]) -> np.ndarray:
        return self.c[self.space.index[tuple(alpha)]]

    def partial(self, alpha: Sequence[int]) -> np.ndarray:
        """The mixed partial derivative ``d^alpha f`` at the expansion point."""
        i = self.space.index[tuple(alpha)]
        return self.c[i] * self.space.factorial[i]

    def d(self, var: int) -> "Jet":
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = self.space._deriv[var]
        sp = JetSpace.get(self.n, self.order - 1)
        return Jet(sp, self.c[src] * _expand(fac, self.c.ndim))

    def _const(self, other) -> "Jet":
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.batch_shape, other.shape)
        c = np.zeros((self.space.size,) + shape)
        c[0] = other
        return Jet(self.space, c)

    def _pair(self, other: "Jet"):
        if other.n != self.n:
            raise ValueError("jets over different numbers of variables")
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        shape = np.broadcast_shapes(a.batch_shape, b.batch_shape)
        return a.space, _align(a.c, shape), _align(b.c, shape)

    # -- arithmetic ------------------------------------------------------------
    def __neg__(self):
        return Jet(self.space, -self.c)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            sp, a, b = self._pair(other)
            return Jet(sp, a + b)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.batch_shape, other.shape)
        c = np.array(np.broadcast_to(_align(self.c, shape), (self.space.size,) + shape))
        c[0] = c[0] + other
        return Jet(self.space, c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            sp, a, b = self._pair(other)
            if sp.size == 1:
                return Jet(sp, a * b)
            prod = a[sp._mi] * b[sp._mj]
            out = np.tensordot(sp._scatter, prod, axes=1)
            return Jet(sp, out)
        other = np.asarray(other, dtype=float)
        if other.ndim == 0:
            return Jet(self.space, self.c * other)
        shape = np.broadcast_shapes(self.batch_shape, other.shape)
        return Jet(self.space, _align(self.c, shape) * other[None, ...])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            out = self._const(1.0)
            base = self
            while k:
                if k & 1:
                    out = out * base
                k >>= 1
                if k:
                    base = base * base
            return out
        return power(self, float(k))

    def reciprocal(self) -> "Jet":
        return power(self, -1.0)

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, batch={self.batch_shape}, value={self.value!r})"

    # -- univariate composition ------------------------------------------------
    def compose(self, taylor: Sequence[np.ndarray]) -> "Jet":
        """Evaluate ``sum_k taylor[k] * (self - self.value)**k`` by Horner's rule.

        ``taylor[k]`` is ``f^(k)(value) / k!`` for the outer function ``f``.
        """
        h_c = self.c.copy()
        h_c[0] = 0.0
        h = Jet(self.space, h_c)
        out = self._const(taylor[self.order])
        for k in range(self.order - 1, -1, -1):
            out = out * h + taylor[k]
        return out


def variables(p, order: int) -> list[Jet]:
    """Coordinate jets ``x_i = p_i + e_i`` at the point(s) ``p`` of shape ``(n, *batch)``."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    sp = JetSpace.get(n, order)
    out = []
    for i in range(n):
        c = np.zeros((sp.size,) + p.shape[1:])
        c[0] = p[i]
        if order >= 1:
            c[sp.index[tuple(1 if j == i else 0 for j in range(n))]] = 1.0
        out.append(Jet(sp, c))
    return out


def univariate(t0, order: int) -> Jet:
    """The one-variable coordinate jet ``t0 + s``."""
    return variables(np.asarray(t0, dtype=float)[None, ...], order)[0]


# -- scalar helpers that accept floats, arrays and jets -------------------------

def d(v, var: int):
    """Partial derivative of a jet; plain numbers are constants."""
    return v.d(var) if isinstance(v, Jet) else 0.0


def value(v):
    return v.value if isinstance(v, Jet) else v


def order_of(v) -> float:
    return v.order if isinstance(v, Jet) else math.inf


def taylor_apply(a, derivatives: Callable[[np.ndarray, int], list], fallback: Callable):
    """Apply a univariate function given its derivative list ``[f, f', ..., f^(N)]`` at ``a0``."""
    if not isinstance(a, Jet):
        return fallback(a)
    ders = derivatives(np.asarray(a.value, dtype=float), a.order)
    taylor = [dk / math.factorial(k) for k, dk in enumerate(ders)]
    return a.compose(taylor)


def _cyclic(fs):
    def derivatives(a0, order):
        vals = [f(a0) for f in fs]
        return [vals[k % len(fs)] for k in range(order + 1)]
    return derivatives


def exp(a):
    def ders(a0, order):
        e = np.exp(a0)
        return [e] * (order + 1)
    return taylor_apply(a, ders, np.exp)


def log(a):
    def ders(a0, order):
        out = [np.log(a0)]
        for k in range(1, order + 1):
            out.append((-1.0) ** (k + 1) * math.factorial(k - 1) / a0**k)
        return out
    return taylor_apply(a, ders, np.log)


def power(a, alpha: float):
    def ders(a0, order):
        out = []
        coef = 1.0
        for k in range(order + 1):
            out.append(coef * a0 ** (alpha - k))
            coef *= alpha - k
        return out
    return taylor_apply(a, ders, lambda x: np.asarray(x, dtype=float) ** alpha)


def sqrt(a):
    return power(a, 0.5)


def sin(a):
    return taylor_apply(a, _cyclic([np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)]), np.sin)


def cos(a):
    return taylor_apply(a, _cyclic([np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin]), np.cos)


def sinh(a):
    return taylor_apply(a, _cyclic([np.sinh, np.cosh]), np.sinh)


def cosh(a):
    return taylor_apply(a, _cyclic([np.cosh, np.sinh]), np.cosh)


def antiderivative(a, value_fn: Callable, integrand: Callable):
    """Compose ``a`` with a function ``F`` known through ``F(a0)`` and a jet-capable ``F'``.

    ``value_fn(a0)`` gives ``F`` at the expansion point; the higher Taylor
    coefficients come from expanding ``integrand`` (that is ``F'``) as a
    one-variable jet of order ``N - 1`` and integrating term by term.
    """
    if not isinstance(a, Jet):
        return value_fn(a)
    a0 = np.asarray(a.value, dtype=float)
    taylor = [np.asarray(value_fn(a0), dtype=float)]
    if a.order >= 1:
        inner = integrand(univariate(a0, a.order - 1))
        if isinstance(inner, Jet):
            coeffs = inner.c
        else:
            coeffs = np.zeros((a.order,) + np.shape(a0))
            coeffs[0] = inner
        for k in range(1, a.order + 1):
            taylor.append(coeffs[k - 1] / k)
    return a.compose(taylor)


def arctan(a):
    return antiderivative(a, np.arctan, lambda t: (1.0 + t * t).reciprocal())


def arcsinh(a):
    return antiderivative(a, np.arcsinh, lambda t: power(1.0 + t * t, -0.5))


def arccosh(a):
    return antiderivative(a, np.arccosh, lambda t: power(t * t - 1.0, -0.5))

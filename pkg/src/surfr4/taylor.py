"""Truncated bivariate Taylor arithmetic.

A :class:`Taylor` value stores the Taylor coefficients of a function of
``(u, v)`` about a base point, truncated at total degree 2 or 3.  Arithmetic
and the common numpy ufuncs propagate the coefficients exactly, so evaluating
a coordinate formula on two seeded variables yields every partial derivative
up to the truncation order with no step-size error.

Coefficients carry trailing batch dimensions, so one evaluation can cover
many base points at once.
"""

from __future__ import annotations

from math import factorial

import numpy as np

# monomials u^i v^j ordered by total degree
_MONOMIALS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
              (3, 0), (2, 1), (1, 2), (0, 3)]
_SIZE = {2: 6, 3: 10}


def _product_table(degree):
    index = {m: k for k, m in enumerate(_MONOMIALS[:_SIZE[degree]])}
    table = []
    for i, (a1, b1) in enumerate(_MONOMIALS[:_SIZE[degree]]):
        for j, (a2, b2) in enumerate(_MONOMIALS[:_SIZE[degree]]):
            m = (a1 + a2, b1 + b2)
            if m in index:
                table.append((i, j, index[m]))
    return table


_TABLES = {d: _product_table(d) for d in (2, 3)}


class Taylor:
    """Truncated Taylor polynomial in two variables.

    ``coef[k]`` is the coefficient of monomial ``_MONOMIALS[k]``.  Only total
    degree ``degree`` (2 or 3) is retained.
    """

    __slots__ = ("coef", "degree")
    __array_priority__ = 100

    def __init__(self, coef, degree=3):
        self.coef = np.asarray(coef, dtype=float)
        self.degree = degree

    # construction -------------------------------------------------------
    @classmethod
    def variable(cls, value, which, degree=3):
        """Seed variable ``u`` (which=0) or ``v`` (which=1) at ``value``."""
        value = np.asarray(value, dtype=float)
        coef = np.zeros((_SIZE[degree],) + value.shape)
        coef[0] = value
        coef[1 + which] = 1.0
        return cls(coef, degree)

    @classmethod
    def constant(cls, value, degree=3, shape=()):
        value = np.broadcast_to(np.asarray(value, dtype=float), shape)
        coef = np.zeros((_SIZE[degree],) + value.shape)
        coef[0] = value
        return cls(coef, degree)

    def _lift(self, other):
        if isinstance(other, Taylor):
            return other
        other = np.asarray(other, dtype=float)
        coef = np.zeros((self.coef.shape[0],) + np.broadcast_shapes(other.shape, self.coef.shape[1:]))
        coef[0] = other
        return Taylor(coef, self.degree)

    # read-out -----------------------------------------------------------
    @property
    def value(self):
        return self.coef[0]

    def derivative(self, i, j):
        """Partial derivative d^(i+j) / du^i dv^j at the base point."""
        k = _MONOMIALS.index((i, j))
        if k >= self.coef.shape[0]:
            raise ValueError(f"derivative order {i + j} exceeds truncation degree {self.degree}")
        return self.coef[k] * factorial(i) * factorial(j)

    # arithmetic ---------------------------------------------------------
    def __neg__(self):
        return Taylor(-self.coef, self.degree)

    def __add__(self, other):
        a, b = _align(self, self._lift(other))
        return Taylor(a + b, self.degree)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = _align(self, self._lift(other))
        return Taylor(a - b, self.degree)

    def __rsub__(self, other):
        return self._lift(other) - self

    def _scaled(self, other, op):
        other = np.asarray(other, dtype=float)
        batch = self.coef.shape[1:]
        extra = max(other.ndim - len(batch), 0)
        coef = self.coef.reshape((self.coef.shape[0],) + (1,) * extra + batch)
        return Taylor(op(coef, other), self.degree)

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return self._scaled(other, np.multiply)
        a, b = self.coef, other.coef
        if a.ndim < b.ndim:
            a = a.reshape((a.shape[0],) + (1,) * (b.ndim - a.ndim) + a.shape[1:])
        elif b.ndim < a.ndim:
            b = b.reshape((b.shape[0],) + (1,) * (a.ndim - b.ndim) + b.shape[1:])
        out = np.zeros((a.shape[0],) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
        for i, j, k in _TABLES[self.degree]:
            out[k] += a[i] * b[j]
        return Taylor(out, self.degree)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return self._scaled(other, np.divide)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = self._lift(1.0)
            for _ in range(int(p)):
                out = out * self
            return out
        x = self.value
        return self.compose([x ** p, p * x ** (p - 1), p * (p - 1) * x ** (p - 2),
                             p * (p - 1) * (p - 2) * x ** (p - 3)])

    def reciprocal(self):
        x = self.value
        return self.compose([1 / x, -1 / x ** 2, 2 / x ** 3, -6 / x ** 4])

    def compose(self, derivs):
        """Apply a scalar function given its derivatives at the base value.

        ``derivs[n]`` is the n-th derivative of the outer function evaluated at
        ``self.value``; entries past the truncation degree are ignored.
        """
        delta = Taylor(self.coef.copy(), self.degree)
        delta.coef[0] = 0.0
        out = self._lift(derivs[0])
        power = None
        for n in range(1, self.degree + 1):
            power = delta if power is None else power * delta
            out = out + power * (np.asarray(derivs[n]) / factorial(n))
        return out

    # numpy interop --------------------------------------------------------
    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        if ufunc in _BINARY:
            a, b = inputs
            return _BINARY[ufunc](a, b)
        if ufunc in _UNARY and len(inputs) == 1:
            return _UNARY[ufunc](inputs[0])
        return NotImplemented

    def __repr__(self):
        return f"Taylor(value={self.value!r}, degree={self.degree})"


def _align(s, t):
    a, b = s.coef, t.coef
    if a.ndim < b.ndim:
        a = a.reshape((a.shape[0],) + (1,) * (b.ndim - a.ndim) + a.shape[1:])
    elif b.ndim < a.ndim:
        b = b.reshape((b.shape[0],) + (1,) * (a.ndim - b.ndim) + b.shape[1:])
    return a, b


def _unary(fn):
    def apply(t):
        return t.compose(fn(t.value))
    return apply


def _sqrt_derivs(x):
    r = np.sqrt(x)
    return [r, 0.5 / r, -0.25 / r ** 3, 0.375 / r ** 5]


def _atan_derivs(x):
    d = 1.0 + x * x
    return [np.arctan(x), 1 / d, -2 * x / d ** 2, (6 * x * x - 2) / d ** 3]


def _tanh_derivs(x):
    t = np.tanh(x)
    s = 1 - t * t
    return [t, s, -2 * t * s, s * (6 * t * t - 2)]


_UNARY = {
    np.sin: _unary(lambda x: [np.sin(x), np.cos(x), -np.sin(x), -np.cos(x)]),
    np.cos: _unary(lambda x: [np.cos(x), -np.sin(x), -np.cos(x), np.sin(x)]),
    np.exp: _unary(lambda x: [np.exp(x)] * 4),
    np.log: _unary(lambda x: [np.log(x), 1 / x, -1 / x ** 2, 2 / x ** 3]),
    np.sqrt: _unary(_sqrt_derivs),
    np.sinh: _unary(lambda x: [np.sinh(x), np.cosh(x), np.sinh(x), np.cosh(x)]),
    np.cosh: _unary(lambda x: [np.cosh(x), np.sinh(x), np.cosh(x), np.sinh(x)]),
    np.tanh: _unary(_tanh_derivs),
    np.arctan: _unary(_atan_derivs),
    np.negative: lambda t: -t,
    np.square: lambda t: t * t,
    np.absolute: lambda t: t * np.sign(t.value),
    np.reciprocal: lambda t: t.reciprocal(),
}


_BINARY = {
    np.add: lambda a, b: a + b if isinstance(a, Taylor) else b + a,
    np.subtract: lambda a, b: a - b if isinstance(a, Taylor) else (-b) + a,
    np.multiply: lambda a, b: a * b if isinstance(a, Taylor) else b * a,
    np.true_divide: lambda a, b: a / b if isinstance(a, Taylor) else b.__rtruediv__(a),
    np.power: lambda a, b: a ** b,
}


def apply_derivatives(x, derivs):
    """Compose ``x`` with a function known only through its derivatives.

    ``x`` may be a :class:`Taylor` (result is a Taylor) or a plain array, in
    which case ``derivs[0]`` is returned.
    """
    if isinstance(x, Taylor):
        return x.compose(derivs)
    return np.asarray(derivs[0], dtype=float)


def univariate_derivatives(fn, x, order=3):
    """Derivatives ``[f, f', ..., f^(order)]`` of a scalar formula at ``x``."""
    t = fn(Taylor.variable(x, 0, degree=3))
    if not isinstance(t, Taylor):
        value = np.broadcast_to(np.asarray(t, dtype=float), np.shape(x))
        return [value] + [np.zeros_like(value)] * order
    return [t.derivative(n, 0) for n in range(order + 1)]

"""Hyper-dual numbers for exact first and second derivatives.

A hyper-dual number is ``v + d1*e1 + d2*e2 + d12*e1e2`` with ``e1**2 = e2**2 = 0``
and ``e1*e2 != 0``.  Seeding ``d1`` and ``d2`` with two unit directions makes
``d12`` the exact mixed second derivative along those directions.

The value part is always a Python float; the three sensitivity parts may be
floats or equally-shaped numpy arrays.  The array form lets one evaluation
carry every (i, j) seed pair of a jet at once.
"""

from __future__ import annotations

import math

import numpy as np


class HyperDual:
    __slots__ = ("value", "d1", "d2", "d12")

    def __init__(self, value, d1=0.0, d2=0.0, d12=0.0):
        self.value = float(value)
        self.d1 = d1
        self.d2 = d2
        self.d12 = d12

    def __repr__(self):
        return f"HyperDual({self.value!r}, {self.d1!r}, {self.d2!r}, {self.d12!r})"

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.value + other.value, self.d1 + other.d1,
                             self.d2 + other.d2, self.d12 + other.d12)
        return HyperDual(self.value + other, self.d1, self.d2, self.d12)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.value, -self.d1, -self.d2, -self.d12)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.value - other.value, self.d1 - other.d1,
                             self.d2 - other.d2, self.d12 - other.d12)
        return HyperDual(self.value - other, self.d1, self.d2, self.d12)

    def __rsub__(self, other):
        return HyperDual(other - self.value, -self.d1, -self.d2, -self.d12)

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.value * other.value,
                self.value * other.d1 + self.d1 * other.value,
                self.value * other.d2 + self.d2 * other.value,
                self.value * other.d12 + self.d1 * other.d2
                + self.d2 * other.d1 + self.d12 * other.value,
            )
        return HyperDual(self.value * other, self.d1 * other,
                         self.d2 * other, self.d12 * other)

    __rmul__ = __mul__

    def reciprocal(self):
        return _chain(self, 1.0 / self.value, -1.0 / self.value ** 2,
                      2.0 / self.value ** 3)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            # quotient rule keeps the value part bit-identical to real division
            b = other.value
            q = self.value / b
            q1 = (self.d1 - q * other.d1) / b
            q2 = (self.d2 - q * other.d2) / b
            q12 = (self.d12 - q1 * other.d2 - q2 * other.d1 - q * other.d12) / b
            return HyperDual(q, q1, q2, q12)
        return HyperDual(self.value / other, self.d1 / other,
                         self.d2 / other, self.d12 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, HyperDual):
            return exp(exponent * log(self))
        p = float(exponent)
        v = self.value
        if p == 0.0:
            return HyperDual(1.0, 0.0 * self.d1, 0.0 * self.d2, 0.0 * self.d12)
        if p.is_integer():
            k = int(p)
            f0 = v ** k
            f1 = k * v ** (k - 1) if k != 0 else 0.0
            f2 = k * (k - 1) * v ** (k - 2) if k not in (0, 1) else 0.0
            return _chain(self, f0, f1, f2)
        if v <= 0.0:
            # real power of a non-positive base has no real derivative
            raise ValueError("non-integer power of a non-positive value")
        return _chain(self, v ** p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0))

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def is_finite(self):
        return bool(math.isfinite(self.value)
                    and np.all(np.isfinite(self.d1))
                    and np.all(np.isfinite(self.d2))
                    and np.all(np.isfinite(self.d12)))


def _chain(x, f0, f1, f2):
    """Apply a scalar function with value f0, derivative f1, second derivative f2."""
    return HyperDual(f0, f1 * x.d1, f1 * x.d2, f1 * x.d12 + f2 * x.d1 * x.d2)


# -- elementary functions: accept floats or HyperDual -------------------------

def sin(x):
    if isinstance(x, HyperDual):
        s, c = math.sin(x.value), math.cos(x.value)
        return _chain(x, s, c, -s)
    return math.sin(x)


def cos(x):
    if isinstance(x, HyperDual):
        s, c = math.sin(x.value), math.cos(x.value)
        return _chain(x, c, -s, -c)
    return math.cos(x)


def tan(x):
    if isinstance(x, HyperDual):
        t = math.tan(x.value)
        sec2 = 1.0 + t * t
        return _chain(x, t, sec2, 2.0 * t * sec2)
    return math.tan(x)


def sinh(x):
    if isinstance(x, HyperDual):
        s, c = math.sinh(x.value), math.cosh(x.value)
        return _chain(x, s, c, s)
    return math.sinh(x)


def cosh(x):
    if isinstance(x, HyperDual):
        s, c = math.sinh(x.value), math.cosh(x.value)
        return _chain(x, c, s, c)
    return math.cosh(x)


def tanh(x):
    if isinstance(x, HyperDual):
        t = math.tanh(x.value)
        sech2 = 1.0 - t * t
        return _chain(x, t, sech2, -2.0 * t * sech2)
    return math.tanh(x)


def exp(x):
    if isinstance(x, HyperDual):
        e = math.exp(x.value)
        return _chain(x, e, e, e)
    return math.exp(x)


def log(x):
    if isinstance(x, HyperDual):
        v = x.value
        return _chain(x, math.log(v), 1.0 / v, -1.0 / (v * v))
    return math.log(x)


def sqrt(x):
    if isinstance(x, HyperDual):
        r = math.sqrt(x.value)
        if r == 0.0:
            raise ValueError("sqrt is not differentiable at 0")
        return _chain(x, r, 0.5 / r, -0.25 / (r * x.value))
    return math.sqrt(x)


FUNCTIONS = {
    "sin": sin, "cos": cos, "tan": tan,
    "sinh": sinh, "cosh": cosh, "tanh": tanh,
    "sqrt": sqrt, "exp": exp, "log": log,
}


def second_derivative(f, t):
    """d^2 f / dt^2 at a real point t, via a single hyper-dual evaluation."""
    out = f(HyperDual(t, 1.0, 1.0, 0.0))
    return out.d12 if isinstance(out, HyperDual) else 0.0

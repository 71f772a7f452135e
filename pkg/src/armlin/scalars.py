"""Coefficient helpers shared by the exact and floating backends.

Exact coefficients are ``int``/``Fraction`` or :class:`GaussianRational`
(a complex number with rational parts).  Floating coefficients are plain
``complex``.  Arithmetic between an exact and a floating value degrades to
``complex``, so a computation is exact iff every input was.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction


class GaussianRational:
    """Complex number ``re + i*im`` with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # construction helpers -------------------------------------------------
    @staticmethod
    def _lift(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x, 0)
        return None

    def _norm(self):
        # collapse to Fraction when the imaginary part vanishes so that hashing
        # and equality agree with the real exact values
        if self.im == 0:
            return self.re
        return self

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def conjugate(self):
        return GaussianRational(self.re, -self.im)._norm()

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return math.sqrt(self.abs2())

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) + other
        return GaussianRational(self.re + o.re, self.im + o.im)._norm()

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) - other
        return GaussianRational(self.re - o.re, self.im - o.im)._norm()

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return other - complex(self)
        return GaussianRational(o.re - self.re, o.im - self.im)._norm()

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) * other
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )._norm()

    __rmul__ = __mul__

    def _inv(self):
        n = self.abs2()
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) / other
        return self * o._inv()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return other / complex(self)
        return o * self._inv()

    def __pow__(self, k):
        if not isinstance(k, int):
            return complex(self) ** k
        base = self if k >= 0 else self._inv()
        result = Fraction(1)
        for _ in range(abs(k)):
            result = result * base
        return result

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            if isinstance(other, numbers.Complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational)) and not isinstance(x, bool)


def parse_rational(s) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a Fraction."""
    if isinstance(s, str):
        return Fraction(s.strip())
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    raise TypeError(f"not a rational literal: {s!r}")


def exact(re, im=0):
    """Exact scalar from rational parts; Fraction when the imaginary part is 0."""
    re, im = parse_rational(re), parse_rational(im)
    if im == 0:
        return re
    return GaussianRational(re, im)


def to_exact(x):
    if isinstance(x, GaussianRational):
        return x._norm()
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact scalar")


def abs2(x):
    """Squared modulus; exact for exact inputs."""
    if isinstance(x, GaussianRational):
        return x.abs2()
    if isinstance(x, (int, Fraction)):
        return x * x
    x = complex(x)
    return x.real * x.real + x.imag * x.imag


def real_imag(x):
    if isinstance(x, GaussianRational):
        return x.re, x.im
    if isinstance(x, (int, Fraction)):
        return Fraction(x), Fraction(0)
    x = complex(x)
    return x.real, x.imag


def encode(x) -> dict:
    """JSON fields ``re``/``im``: rational strings when exact, floats otherwise."""
    re, im = real_imag(x)
    if is_exact(x):
        return {"re": str(re), "im": str(im)}
    return {"re": float(re), "im": float(im)}


def decode(re, im):
    if isinstance(re, str) or isinstance(im, str):
        return exact(re, im)
    return complex(float(re), float(im))


def div(x, y):
    """``x / y`` staying exact when both operands are exact."""
    if is_exact(x) and is_exact(y):
        if isinstance(x, int):
            x = Fraction(x)
        return x / y
    return complex(x) / complex(y)

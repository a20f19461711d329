"""Exact Gaussian-rational scalars.

Coefficients of group-algebra elements are kept exact so that kernel,
intertwiner and trace identities can be checked with ``==`` rather than
a tolerance.  Floats are accepted on input but converted through
:class:`fractions.Fraction`, so ``0.1`` becomes its exact binary value.
"""

from __future__ import annotations

import numbers
from fractions import Fraction


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot make an exact rational from {value!r}")


class Gaussian:
    """A number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("Gaussian is immutable")

    @classmethod
    def coerce(cls, value) -> "Gaussian":
        if isinstance(value, Gaussian):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(_frac(value), 0)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        try:
            o = Gaussian.coerce(other)
        except TypeError:
            return NotImplemented
        return Gaussian(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = Gaussian.coerce(other)
        except TypeError:
            return NotImplemented
        return Gaussian(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return Gaussian.coerce(other) - self

    def __mul__(self, other):
        try:
            o = Gaussian.coerce(other)
        except TypeError:
            return NotImplemented
        return Gaussian(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = Gaussian.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return self * Gaussian(o.re / n, -o.im / n)

    def __rtruediv__(self, other):
        return Gaussian.coerce(other) / self

    def conjugate(self) -> "Gaussian":
        return Gaussian(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # comparison / conversion -----------------------------------------------

    def __eq__(self, other):
        try:
            o = Gaussian.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"Gaussian({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_scalar(self)


def format_scalar(c: Gaussian) -> str:
    """Render in the expression grammar: ``3``, ``-1/2``, ``2i``, ``(1/2+3i)``."""
    re, im = c.re, c.im
    if im == 0:
        return str(re)
    if re == 0:
        return _imag_str(im)
    sign = "+" if im > 0 else "-"
    return f"({re}{sign}{_imag_str(abs(im))})"


def _imag_str(im: Fraction) -> str:
    if im == 1:
        return "i"
    if im == -1:
        return "-i"
    if im.denominator == 1:
        return f"{im.numerator}i"
    return f"{im.numerator}i/{im.denominator}"


ZERO = Gaussian(0)
ONE = Gaussian(1)
I = Gaussian(0, 1)

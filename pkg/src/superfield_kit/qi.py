"""Gaussian rationals: the field Q(i) with exact Fraction components.

This is the ground field for every coefficient in the library.  Values are
immutable; arithmetic never leaves the field.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import NotInvertible


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError("cannot build an exact rational from %r" % (x,))


class QI:
    """A number re + im*i with rational re, im."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("QI is immutable")

    # -- structure ---------------------------------------------------------

    def __eq__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return QI(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return QI(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return QI(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inv(self) -> "QI":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise NotInvertible("division by zero in Q(i)")
        return QI(self.re / n, -self.im / n)

    def __truediv__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = coerce_qi(other)
        if other is None:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        out = QI(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- rendering ---------------------------------------------------------

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return "%s*i" % self.im
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        imtxt = "i" if mag == 1 else "%s*i" % mag
        return "(%s%s%s)" % (self.re, sign, imtxt)

    def __repr__(self):
        return "QI(%r, %r)" % (str(self.re), str(self.im))


def coerce_qi(x):
    """Return x as a QI, or None if it is not scalar-like."""
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)):
        return QI(x)
    return None


QI_ZERO = QI(0)
QI_ONE = QI(1)
QI_I = QI(0, 1)

"""Exact Gaussian-rational scalars.

A :class:`GaussQ` is ``re + i*im`` with ``re`` and ``im`` stored as
``gmpy2.mpq`` (always reduced, positive denominator).  Float coefficients
are plain Python ``complex``; the two kinds are never mixed implicitly.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Integral, Rational

from gmpy2 import mpq

_ZERO = mpq(0)
_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def _to_mpq(value):
    if isinstance(value, type(_ZERO)):
        return value
    if isinstance(value, (Integral, Fraction)):
        return mpq(value)
    if isinstance(value, Rational):
        return mpq(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def parse_rational(text: str):
    """Parse ``p`` or ``p/q`` into an mpq; raises ValueError otherwise."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    if "/" in text:
        p, q = text.split("/")
        if int(q) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return mpq(int(p), int(q))
    return mpq(int(text))


def format_rational(q) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class GaussQ:
    """Gaussian rational ``re + i*im``; immutable and hashable."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def _raw(cls, re, im):
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def coerce(cls, value) -> "GaussQ":
        if isinstance(value, GaussQ):
            return value
        if isinstance(value, complex):
            raise TypeError("float complex values cannot become exact implicitly")
        if isinstance(value, float):
            raise TypeError("float values cannot become exact implicitly")
        return cls(value)

    @classmethod
    def parse(cls, text: str) -> "GaussQ":
        """Parse ``re`` or ``re,im`` where each part is ``p`` or ``p/q``."""
        parts = text.split(",")
        if len(parts) == 1:
            return cls(parse_rational(parts[0]))
        if len(parts) == 2:
            return cls(parse_rational(parts[0]), parse_rational(parts[1]))
        raise ValueError(f"bad Gaussian rational {text!r}")

    def format(self) -> str:
        return f"{format_rational(self.re)},{format_rational(self.im)}"

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, GaussQ):
            return GaussQ._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, int):
            return GaussQ._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussQ):
            return GaussQ._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, int):
            return GaussQ._raw(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, int):
            return GaussQ._raw(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussQ):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return GaussQ._raw(a * c, _ZERO)
            return GaussQ._raw(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, type(_ZERO))):
            return GaussQ._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, type(_ZERO))):
            if not other:
                raise ZeroDivisionError("division by zero")
            return GaussQ._raw(self.re / other, self.im / other)
        if isinstance(other, GaussQ):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, int):
            return self.inverse() * other
        return NotImplemented

    def inverse(self) -> "GaussQ":
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("division by zero")
        return GaussQ._raw(self.re / norm, -self.im / norm)

    def __neg__(self):
        return GaussQ._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "GaussQ":
        return GaussQ._raw(self.re, -self.im)

    def norm2(self):
        """Exact squared modulus."""
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussQ):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction, type(_ZERO))):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        if not self.im:
            return f"GaussQ({format_rational(self.re)})"
        return f"GaussQ({format_rational(self.re)}, {format_rational(self.im)})"


ZERO = GaussQ(0)
ONE = GaussQ(1)
I = GaussQ(0, 1)


def exact(value) -> GaussQ:
    """Shorthand constructor: ints, fractions, ``"p/q"`` strings or (re, im) pairs."""
    if isinstance(value, tuple):
        return GaussQ(*value)
    return GaussQ.coerce(value)

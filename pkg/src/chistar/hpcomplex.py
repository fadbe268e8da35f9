"""Arbitrary-precision complex numbers that carry their working precision."""

from __future__ import annotations

import re
from fractions import Fraction

import mpmath

MIN_PREC = 64


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def parse_tau(text: str) -> tuple[Fraction, Fraction]:
    """Parse "a+bi" with exact rationals a and b.

    Either part may be omitted and the imaginary part may be written as
    "6/5i", "6i/5" or "6/5*i".
    """
    t = text.replace(" ", "")
    if not t:
        raise ValueError("empty point")
    try:
        if "i" not in t:
            return Fraction(t), Fraction(0)
        at = t.index("i")
        tail = t[at + 1:]
        if t.count("i") != 1 or (tail and not re.fullmatch(r"/\d+", tail)):
            raise ValueError
        split = max(t.rfind("+", 0, at), t.rfind("-", 0, at))
        if split > 0:
            real_txt, im_txt = t[:split], t[split:]
        else:
            real_txt, im_txt = "0", t
        im_txt = im_txt.replace("*", "").replace("i", "")
        sign = ""
        if im_txt[:1] in ("+", "-"):
            sign, im_txt = im_txt[0], im_txt[1:]
        if im_txt == "" or im_txt.startswith("/"):
            im_txt = "1" + im_txt
        return Fraction(real_txt), Fraction(sign + im_txt)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse point {text!r}") from None


class ComplexHP:
    """A complex value together with the precision (bits) it was computed at."""

    __slots__ = ("value", "prec")

    def __init__(self, value, prec: int = 256):
        if prec < MIN_PREC:
            raise ValueError(f"precision must be at least {MIN_PREC} bits")
        self.prec = int(prec)
        with mpmath.workprec(self.prec):
            self.value = mpmath.mpc(value)

    @classmethod
    def from_rationals(cls, re_part, im_part, prec: int = 256) -> "ComplexHP":
        with mpmath.workprec(prec):
            re_part, im_part = Fraction(re_part), Fraction(im_part)
            v = mpmath.mpc(mpmath.mpf(re_part.numerator) / re_part.denominator,
                           mpmath.mpf(im_part.numerator) / im_part.denominator)
        return cls(v, prec)

    @classmethod
    def parse(cls, text: str, prec: int = 256) -> "ComplexHP":
        return cls.from_rationals(*parse_tau(text), prec=prec)

    @property
    def real(self):
        return self.value.real

    @property
    def imag(self):
        return self.value.imag

    def _binary(self, other, op):
        if isinstance(other, ComplexHP):
            prec = max(self.prec, other.prec)
            other = other.value
        else:
            prec = self.prec
        with mpmath.workprec(prec):
            return ComplexHP(op(self.value, other), prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        return ComplexHP(-self.value, self.prec)

    def __abs__(self):
        with mpmath.workprec(self.prec):
            return abs(self.value)

    def __complex__(self):
        return complex(self.value)

    def __repr__(self):
        return f"ComplexHP({self.format(20)}, prec={self.prec})"

    def format(self, digits: int | None = None) -> str:
        if digits is None:
            digits = max(15, int(self.prec * 0.30103) - 3)
        with mpmath.workprec(self.prec):
            re_s = mpmath.nstr(self.value.real, digits)
            im = self.value.imag
            sign = "-" if im < 0 else "+"
            im_s = mpmath.nstr(abs(im), digits)
        return f"{re_s} {sign} {im_s}i"

"""Integer 2x2 matrices, the representatives D_N, fundamental-domain reduction
and the action of upper-triangular matrices on q-series."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath

from .errors import NotPrimitive, PrecisionLoss
from .exactalg import divisors
from .hpcomplex import ComplexHP
from .qseries import AhmSeries, PuiseuxSeries

REDUCTION_CAP = 10_000


@dataclass(frozen=True)
class GL2Matrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not isinstance(getattr(self, name), int):
                object.__setattr__(self, name, int(getattr(self, name)))
        if self.det <= 0:
            raise ValueError(f"determinant of {self} must be positive")

    @classmethod
    def from_rationals(cls, a, b, c, d) -> "GL2Matrix":
        """Primitive integer matrix proportional to a rational one."""
        entries = [Fraction(x) for x in (a, b, c, d)]
        den = 1
        for x in entries:
            den = den * x.denominator // gcd(den, x.denominator)
        ints = [int(x * den) for x in entries]
        g = gcd(*ints)
        return cls(*(x // g for x in ints))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def content(self) -> int:
        return gcd(self.a, self.b, self.c, self.d)

    def is_primitive(self) -> bool:
        return self.content == 1

    def is_upper_triangular(self) -> bool:
        return self.c == 0

    def primitive_part(self) -> "GL2Matrix":
        g = self.content
        return GL2Matrix(self.a // g, self.b // g, self.c // g, self.d // g)

    def __mul__(self, other: "GL2Matrix") -> "GL2Matrix":
        return GL2Matrix(self.a * other.a + self.b * other.c,
                         self.a * other.b + self.b * other.d,
                         self.c * other.a + self.d * other.c,
                         self.c * other.b + self.d * other.d)

    def adjugate(self) -> "GL2Matrix":
        return GL2Matrix(self.d, -self.b, -self.c, self.a)

    def act(self, tau):
        """Moebius action on a complex number (mpc, complex or ComplexHP)."""
        if isinstance(tau, ComplexHP):
            with mpmath.workprec(tau.prec):
                return ComplexHP(self.act(tau.value), tau.prec)
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def cocycle(self, tau):
        """c tau + d."""
        return self.c * tau + self.d

    def tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __str__(self):
        return f"{self.a} {self.b} / {self.c} {self.d}"


IDENTITY = GL2Matrix(1, 0, 0, 1)
S_MATRIX = GL2Matrix(0, -1, 1, 0)


def translation(n: int) -> GL2Matrix:
    return GL2Matrix(1, n, 0, 1)


def enumerate_DN(N: int) -> list[GL2Matrix]:
    if N < 1:
        raise ValueError("N must be positive")
    out = []
    for a in divisors(N):
        d = N // a
        for b in range(d):
            if gcd(gcd(a, b), d) == 1:
                out.append(GL2Matrix(a, b, 0, d))
    return out


def dn_size(N: int) -> int:
    return len(enumerate_DN(N))


def decompose_to_DN(g: GL2Matrix) -> tuple[GL2Matrix, GL2Matrix]:
    """Return (gamma, g') with gamma in SL2(Z), g' in D_N and gamma * g' = g."""
    if not g.is_primitive():
        raise NotPrimitive(f"{g} has content {g.content}")
    N = g.det
    for h in enumerate_DN(N):
        m = g * h.adjugate()  # = N * gamma when gamma exists
        if all(x % N == 0 for x in m.tuple()):
            gamma = GL2Matrix(*(x // N for x in m.tuple()))
            return gamma, h
    raise AssertionError(f"no D_N representative found for {g}")  # pragma: no cover


def reduce_fundamental(tau, cap: int = REDUCTION_CAP):
    """Move tau into the closed fundamental domain.

    Returns (tau', gamma) with gamma in SL2(Z) and gamma(tau) = tau'.  Accepts
    ComplexHP (returned as ComplexHP) or an mpmath/complex value.
    """
    if isinstance(tau, ComplexHP):
        with mpmath.workprec(tau.prec):
            z, gamma = reduce_fundamental(tau.value, cap)
            return ComplexHP(z, tau.prec), gamma
    z = mpmath.mpc(tau)
    if z.imag <= 0:
        from .errors import DomainError
        raise DomainError("point is not in the upper half-plane")
    a, b, c, d = 1, 0, 0, 1
    for _ in range(cap):
        n = int(mpmath.nint(z.real))
        if n:
            z -= n
            a, b = a - n * c, b - n * d
        if abs(z) < 1:
            z = -1 / z
            a, b, c, d = -c, -d, a, b
        else:
            return z, GL2Matrix(a, b, c, d)
    raise PrecisionLoss(f"fundamental-domain reduction did not finish in {cap} steps")


def in_fundamental_domain(z, eps=None) -> bool:
    eps = eps if eps is not None else mpmath.mpf(2) ** (-mpmath.mp.prec // 2)
    return abs(z.real) <= mpmath.mpf(1) / 2 + eps and abs(z) >= 1 - eps


def act_series(g: GL2Matrix, s):
    """Series of F(g tau) from the series of F(tau), for upper-triangular g."""
    if not g.is_upper_triangular():
        raise ValueError(f"{g} is not upper triangular")
    a, b, d = g.a, g.b, g.d
    if a < 0:
        a, b, d = -a, -b, -d
    if isinstance(s, (AhmSeries, PuiseuxSeries)):
        return s.substitute_qaction(a, b % d, d)
    raise TypeError("act_series expects a PuiseuxSeries or AhmSeries")


def random_sl2(rng: random.Random, bound: int = 20) -> GL2Matrix:
    """Random element of SL2(Z) with all entries bounded by ``bound`` in size."""
    while True:
        a = rng.randint(-bound, bound)
        c = rng.randint(-bound, bound)
        if (a, c) == (0, 0) or gcd(a, c) != 1:
            continue
        # solve a d - b c = 1
        g, x, y = _egcd(a, c)
        d, b = x, -y
        # shift (b, d) by multiples of (a, c) to a random admissible solution
        options = []
        for t in range(-2 * bound, 2 * bound + 1):
            bb, dd = b + t * a, d + t * c
            if abs(bb) <= bound and abs(dd) <= bound:
                options.append((bb, dd))
        if options:
            bb, dd = rng.choice(options)
            return GL2Matrix(a, bb, c, dd)


def _egcd(a: int, b: int):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y

"""Truncated Puiseux series in q and their polynomial extension in Y.

A :class:`PuiseuxSeries` stores coefficients of q^(n/M) for
``val <= n < prec`` where ``M`` is the ramification.  Anything at or beyond
``prec / M`` is unknown, and asking for it raises :class:`OutOfTruncation`.

An :class:`AhmSeries` is a polynomial in the formal variable Y (standing for
3/(pi Im tau)) whose coefficients are Puiseux series.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

from gmpy2 import mpq, mpz

from . import exactalg
from .exactalg import CycloElement, convolve, cyclo_reduce, euler_phi, is_rational
from .errors import NonUnitLeading, NotInSubfield, OutOfTruncation


def _coeff_order(c) -> int:
    return c.order if isinstance(c, CycloElement) else 1


def _common_order(cs) -> int:
    order = 1
    for c in cs:
        if isinstance(c, CycloElement) and order % c.order:
            order = lcm(order, c.order)
    return order


def _components(cs, order, phi):
    """Split cyclotomic coefficients into ``phi`` rational coordinate lists."""
    comps = [[mpz(0)] * len(cs) for _ in range(phi)]
    for pos, c in enumerate(cs):
        if not c:
            continue
        if isinstance(c, CycloElement):
            c = c.lift(order)
            for i, v in enumerate(c.coeffs):
                if v:
                    comps[i][pos] = v
        else:
            comps[0][pos] = c
    return comps


def multiply_coefficients(a, b, n):
    """First ``n`` coefficients of the product of two coefficient lists."""
    order = lcm(_common_order(a), _common_order(b))
    if order == 1:
        return convolve(a, b, n)
    phi = euler_phi(order)
    stride = 2 * phi - 1
    ca = _components(a[:n], order, phi)
    cb = _components(b[:n], order, phi)
    # Flatten (position, zeta-power) so one convolution computes the whole product.
    fa = [mpz(0)] * (len(ca[0]) * stride)
    fb = [mpz(0)] * (len(cb[0]) * stride)
    for i in range(phi):
        for pos, v in enumerate(ca[i]):
            if v:
                fa[pos * stride + i] = v
        for pos, v in enumerate(cb[i]):
            if v:
                fb[pos * stride + i] = v
    flat = convolve(fa, fb, n * stride)
    out = []
    for pos in range(n):
        raw = flat[pos * stride:(pos + 1) * stride]
        if any(raw):
            c = CycloElement(order, raw)
            out.append(c.coeffs[0] if c.is_rational() else c)
        else:
            out.append(mpz(0))
    return out


class PuiseuxSeries:
    """Truncated series sum_{val <= n < prec} c_n q^(n/ram)."""

    __slots__ = ("ram", "val", "coeffs", "prec")

    def __init__(self, coeffs, val: int = 0, ram: int = 1, prec: int | None = None):
        coeffs = list(coeffs)
        if prec is None:
            prec = val + len(coeffs)
        coeffs = coeffs[: max(prec - val, 0)]
        coeffs += [mpz(0)] * (prec - val - len(coeffs))
        start = 0
        while start < len(coeffs) and not coeffs[start]:
            start += 1
        self.ram = ram
        self.val = val + start
        self.coeffs = coeffs[start:]
        self.prec = prec
        if self.val > prec:
            self.val = prec
        self._reduce_ramification()

    def _reduce_ramification(self):
        if self.ram == 1:
            return
        # the truncation must stay representable, or precision would be invented
        g = gcd(self.ram, self.prec)
        for i, c in enumerate(self.coeffs):
            if c:
                g = gcd(g, self.val + i)
                if g == 1:
                    return
        if g > 1:
            self.coeffs = self.coeffs[::g]
            self.val //= g
            self.prec //= g
            self.ram //= g
            self.coeffs = self.coeffs[: self.prec - self.val]
            self.coeffs += [mpz(0)] * (self.prec - self.val - len(self.coeffs))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, truncation, ram: int = 1) -> "PuiseuxSeries":
        prec = _to_positions(truncation, ram)
        return cls([], val=prec, ram=ram, prec=prec)

    @classmethod
    def monomial(cls, exponent, coeff=1, truncation=None) -> "PuiseuxSeries":
        exponent = Fraction(exponent)
        ram = exponent.denominator
        pos = exponent.numerator
        prec = pos + 1 if truncation is None else _to_positions(truncation, ram)
        ram2 = lcm(ram, Fraction(truncation).denominator) if truncation is not None else ram
        if ram2 != ram:
            pos *= ram2 // ram
            ram = ram2
            prec = _to_positions(truncation, ram)
        return cls([exactalg.QQ(coeff) if is_rational(coeff) else coeff], val=pos, ram=ram, prec=prec)

    # -- basic properties ---------------------------------------------------

    @property
    def valuation(self) -> Fraction:
        return Fraction(self.val, self.ram)

    @property
    def truncation(self) -> Fraction:
        return Fraction(self.prec, self.ram)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def exponent(self, i: int) -> Fraction:
        return Fraction(self.val + i, self.ram)

    def items(self):
        """Yield (exponent, coefficient) for the nonzero stored terms."""
        for i, c in enumerate(self.coeffs):
            if c:
                yield Fraction(self.val + i, self.ram), c

    def coefficient_at(self, exponent):
        exponent = Fraction(exponent)
        if exponent >= self.truncation:
            raise OutOfTruncation(
                f"exponent {exponent} is beyond the truncation {self.truncation}")
        scaled = exponent * self.ram
        if scaled.denominator != 1:
            return mpz(0)
        pos = int(scaled) - self.val
        if pos < 0:
            return mpz(0)
        return self.coeffs[pos]

    def leading_coefficient(self):
        if not self.coeffs:
            raise NonUnitLeading("series is zero to its truncation")
        return self.coeffs[0]

    def coefficient_order(self) -> int:
        return _common_order(self.coeffs)

    def has_integral_exponents(self) -> bool:
        return self.ram == 1 or all(not c or (self.val + i) % self.ram == 0
                                    for i, c in enumerate(self.coeffs))

    def descend(self) -> "PuiseuxSeries":
        """Rewrite in integral powers of q, for a series invariant under tau -> tau + 1.

        Invariance means the unknown fractional terms vanish, so the truncation
        rounds up to the next integer.
        """
        if self.ram == 1:
            return self
        if not self.has_integral_exponents():
            raise ValueError("series has fractional exponents")
        M = self.ram
        prec = -((-self.prec) // M)
        start = (-self.val) % M
        coeffs = self.coeffs[start::M]
        val = (self.val + start) // M if coeffs else prec
        return PuiseuxSeries(coeffs, val=val, ram=1, prec=prec)

    # -- conversion ---------------------------------------------------------

    def with_ram(self, ram: int) -> "PuiseuxSeries":
        """Same series written with ramification ``ram`` (a multiple of self.ram)."""
        if ram == self.ram:
            return self
        if ram % self.ram:
            raise ValueError(f"ramification {ram} is not a multiple of {self.ram}")
        step = ram // self.ram
        coeffs = [mpz(0)] * (len(self.coeffs) * step)
        coeffs[::step] = self.coeffs
        out = object.__new__(PuiseuxSeries)
        out.ram = ram
        out.val = self.val * step
        out.prec = self.prec * step
        out.coeffs = coeffs[: out.prec - out.val]
        out.coeffs += [mpz(0)] * (out.prec - out.val - len(out.coeffs))
        return out

    def _positions(self, start: int, stop: int):
        """Coefficients at positions start..stop-1 (all below prec)."""
        lo = start - self.val
        out = []
        for p in range(lo, stop - self.val):
            out.append(self.coeffs[p] if 0 <= p < len(self.coeffs) else mpz(0))
        return out

    def truncate(self, truncation) -> "PuiseuxSeries":
        prec = min(self.prec, _to_positions(truncation, self.ram))
        return PuiseuxSeries(self.coeffs, val=self.val, ram=self.ram, prec=prec)

    def map_coefficients(self, fn) -> "PuiseuxSeries":
        return PuiseuxSeries([fn(c) for c in self.coeffs], val=self.val, ram=self.ram, prec=self.prec)

    def rationalize(self) -> "PuiseuxSeries":
        """Rewrite cyclotomic coefficients as rationals; NotInSubfield if impossible."""
        return self.map_coefficients(lambda c: cyclo_reduce(c, 1) if isinstance(c, CycloElement) else c)

    def is_rational(self) -> bool:
        return all(not isinstance(c, CycloElement) or c.is_rational() for c in self.coeffs)

    # -- arithmetic ---------------------------------------------------------

    def _aligned(self, other: "PuiseuxSeries"):
        ram = lcm(self.ram, other.ram)
        return self.with_ram(ram), other.with_ram(ram), ram

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            if _is_scalar(other):
                return self + PuiseuxSeries.monomial(0, other, truncation=self.truncation)
            return NotImplemented
        a, b, ram = self._aligned(other)
        prec = min(a.prec, b.prec)
        val = min(a.val, b.val, prec)
        xa = a._positions(val, prec) if a.val < prec else [mpz(0)] * (prec - val)
        xb = b._positions(val, prec) if b.val < prec else [mpz(0)] * (prec - val)
        return PuiseuxSeries([x + y for x, y in zip(xa, xb)], val=val, ram=ram, prec=prec)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries([-c for c in self.coeffs], val=self.val, ram=self.ram, prec=self.prec)

    def __sub__(self, other):
        if isinstance(other, PuiseuxSeries) or _is_scalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            return PuiseuxSeries([c * other for c in self.coeffs], val=self.val,
                                 ram=self.ram, prec=self.prec)
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        a, b, ram = self._aligned(other)
        prec = min(a.val + b.prec, b.val + a.prec)
        val = a.val + b.val
        n = prec - val
        if n <= 0 or not a.coeffs or not b.coeffs:
            return PuiseuxSeries([], val=prec, ram=ram, prec=prec)
        coeffs = multiply_coefficients(a.coeffs, b.coeffs, n)
        return PuiseuxSeries(coeffs, val=val, ram=ram, prec=prec)

    __rmul__ = __mul__

    def invert(self) -> "PuiseuxSeries":
        """Multiplicative inverse; the leading stored coefficient must be a unit."""
        if not self.coeffs or not self.coeffs[0]:
            raise NonUnitLeading("cannot invert a series that is zero to its truncation")
        n = len(self.coeffs)
        lead = self.coeffs[0]
        inv_lead = 1 / lead if isinstance(lead, CycloElement) else 1 / exactalg.QQ(lead)
        if _common_order(self.coeffs) == 1:
            body = _newton_inverse(self.coeffs, n)
        else:
            body = [inv_lead]
            for k in range(1, n):
                s = 0
                for i in range(1, k + 1):
                    ai = self.coeffs[i]
                    if ai:
                        s = s + ai * body[k - i]
                body.append(-(s * inv_lead) if s else mpz(0))
        return PuiseuxSeries(body, val=-self.val, ram=self.ram, prec=-self.val + n)

    def __truediv__(self, other):
        if _is_scalar(other):
            inv = 1 / other if isinstance(other, CycloElement) else 1 / exactalg.QQ(other)
            return self * inv
        return self * other.invert()

    def __pow__(self, e: int):
        if e < 0:
            return self.invert() ** (-e)
        if e == 0:
            return PuiseuxSeries.monomial(0, 1, truncation=max(self.truncation - self.valuation, 1))
        out = None
        base = self
        while e:
            if e & 1:
                out = base if out is None else out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def theta(self) -> "PuiseuxSeries":
        """q d/dq, i.e. multiply the coefficient of q^e by e."""
        return PuiseuxSeries(
            [c * mpq(self.val + i, self.ram) if c else c for i, c in enumerate(self.coeffs)],
            val=self.val, ram=self.ram, prec=self.prec)

    def substitute_qaction(self, a: int, b: int, d: int) -> "PuiseuxSeries":
        """Replace tau by (a tau + b)/d: q^(n/M) -> zeta_(dM)^(bn) q^(an/(dM))."""
        if a < 1 or d < 1:
            raise ValueError("substitute_qaction needs a, d >= 1")
        M = self.ram
        order = d * M
        coeffs = [mpz(0)] * (len(self.coeffs) * a)
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            n = self.val + i
            twist = (b * n) % order
            if twist:
                c = CycloElement.zeta(order, twist) * c
                if c.is_rational():
                    c = c.coeffs[0]
            coeffs[i * a] = c
        return PuiseuxSeries(coeffs, val=self.val * a, ram=order, prec=self.prec * a)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            if _is_scalar(other):
                return self == PuiseuxSeries.monomial(0, other, truncation=self.truncation)
            return NotImplemented
        return (self.ram, self.val, self.prec) == (other.ram, other.val, other.prec) and all(
            x == y for x, y in zip(self.coeffs, other.coeffs))

    def agrees_with(self, other: "PuiseuxSeries") -> bool:
        """Equal on the exponents known to both."""
        t = min(self.truncation, other.truncation)
        return self.truncate(t) == other.truncate(t)

    def __hash__(self):
        return hash((self.ram, self.val, self.prec, tuple(self.coeffs)))

    def __repr__(self):
        terms = []
        for e, c in list(self.items())[:6]:
            terms.append(f"{c}*q^{e}")
        more = " + ..." if sum(1 for _ in self.items()) > 6 else ""
        return f"PuiseuxSeries({' + '.join(terms) or '0'}{more} + O(q^{self.truncation}))"


def _newton_inverse(coeffs, n):
    """Inverse of a rational power series with nonzero constant term, n terms."""
    inv = [1 / exactalg.QQ(coeffs[0])]
    k = 1
    while k < n:
        k = min(2 * k, n)
        e = convolve(coeffs[:k], inv, k)
        corr = convolve(inv, [-x for x in e[len(inv):k]], k - len(inv))
        inv = inv + corr[: k - len(inv)]
    return inv


def _is_scalar(x) -> bool:
    return is_rational(x) or isinstance(x, CycloElement)


def _to_positions(truncation, ram: int) -> int:
    t = Fraction(truncation) * ram
    return -((-t.numerator) // t.denominator)


def series_add(a, b):
    return a + b


def series_mul(a, b):
    return a * b


def series_invert(a):
    return a.invert()


def coefficient_at(s: PuiseuxSeries, exponent):
    return s.coefficient_at(exponent)


class AhmSeries:
    """Polynomial sum_k ycoeffs[k] * Y^k with PuiseuxSeries coefficients."""

    __slots__ = ("ycoeffs",)

    def __init__(self, ycoeffs):
        ycoeffs = [c if isinstance(c, PuiseuxSeries) else PuiseuxSeries.monomial(0, c) for c in ycoeffs]
        if not ycoeffs:
            raise ValueError("AhmSeries needs at least one Y-coefficient")
        ram = 1
        for c in ycoeffs:
            ram = lcm(ram, c.ram)
        trunc = min(c.truncation for c in ycoeffs)
        ycoeffs = [c.with_ram(ram).truncate(trunc) for c in ycoeffs]
        while len(ycoeffs) > 1 and ycoeffs[-1].is_zero():
            ycoeffs.pop()
        self.ycoeffs = ycoeffs

    @classmethod
    def from_series(cls, s: PuiseuxSeries) -> "AhmSeries":
        return cls([s])

    @property
    def truncation(self) -> Fraction:
        return self.ycoeffs[0].truncation

    @property
    def ram(self) -> int:
        return max(c.ram for c in self.ycoeffs)

    def descend(self) -> "AhmSeries":
        return AhmSeries([c.descend() for c in self.ycoeffs])

    @property
    def y_degree(self) -> int:
        if len(self.ycoeffs) == 1 and self.ycoeffs[0].is_zero():
            return -1
        return len(self.ycoeffs) - 1

    def coefficient(self, k: int) -> PuiseuxSeries:
        if 0 <= k < len(self.ycoeffs):
            return self.ycoeffs[k]
        return PuiseuxSeries.zero(self.truncation)

    @property
    def valuation(self) -> Fraction:
        return min(c.valuation for c in self.ycoeffs)

    def __add__(self, other):
        if isinstance(other, PuiseuxSeries) or _is_scalar(other):
            other = AhmSeries([other if isinstance(other, PuiseuxSeries)
                               else PuiseuxSeries.monomial(0, other, truncation=self.truncation)])
        if not isinstance(other, AhmSeries):
            return NotImplemented
        n = max(len(self.ycoeffs), len(other.ycoeffs))
        t = min(self.truncation, other.truncation)
        out = []
        for k in range(n):
            a = self.ycoeffs[k] if k < len(self.ycoeffs) else PuiseuxSeries.zero(t)
            b = other.ycoeffs[k] if k < len(other.ycoeffs) else PuiseuxSeries.zero(t)
            out.append(a + b)
        return AhmSeries(out)

    __radd__ = __add__

    def __neg__(self):
        return AhmSeries([-c for c in self.ycoeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other) or isinstance(other, PuiseuxSeries):
            return AhmSeries([c * other for c in self.ycoeffs])
        if not isinstance(other, AhmSeries):
            return NotImplemented
        out = [None] * (len(self.ycoeffs) + len(other.ycoeffs) - 1)
        for i, a in enumerate(self.ycoeffs):
            if a.is_zero() and len(self.ycoeffs) > 1:
                continue
            for k, b in enumerate(other.ycoeffs):
                term = a * b
                out[i + k] = term if out[i + k] is None else out[i + k] + term
        t = min(self.truncation + other.valuation, other.truncation + self.valuation)
        out = [PuiseuxSeries.zero(t) if c is None else c for c in out]
        return AhmSeries(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("AhmSeries only supports nonnegative powers")
        out = None
        base = self
        while e:
            if e & 1:
                out = base if out is None else out * base
            e >>= 1
            if e:
                base = base * base
        if out is None:
            return AhmSeries([PuiseuxSeries.monomial(0, 1, truncation=self.truncation - self.valuation * 0)])
        return out

    def substitute_qaction(self, a: int, b: int, d: int) -> "AhmSeries":
        """Action of tau -> (a tau + b)/d, including Y -> (d/a) Y."""
        scale = mpq(d, a)
        return AhmSeries([c.substitute_qaction(a, b, d) * (scale ** k)
                          for k, c in enumerate(self.ycoeffs)])

    def truncate(self, truncation) -> "AhmSeries":
        return AhmSeries([c.truncate(truncation) for c in self.ycoeffs])

    def rationalize(self) -> "AhmSeries":
        return AhmSeries([c.rationalize() for c in self.ycoeffs])

    def is_rational(self) -> bool:
        return all(c.is_rational() for c in self.ycoeffs)

    def has_integral_exponents(self) -> bool:
        return all(c.has_integral_exponents() for c in self.ycoeffs)

    def __eq__(self, other):
        if not isinstance(other, AhmSeries):
            return NotImplemented
        n = max(len(self.ycoeffs), len(other.ycoeffs))
        return all(self.coefficient(k) == other.coefficient(k) for k in range(n))

    def __hash__(self):
        return hash(tuple(self.ycoeffs))

    def __repr__(self):
        parts = [f"Y^{k}: {c!r}" for k, c in enumerate(self.ycoeffs)]
        return "AhmSeries(" + "; ".join(parts) + ")"


def substitute_qaction(s, a: int, b: int, d: int):
    return s.substitute_qaction(a, b, d)


__all__ = [
    "AhmSeries",
    "NonUnitLeading",
    "NotInSubfield",
    "OutOfTruncation",
    "PuiseuxSeries",
    "coefficient_at",
    "multiply_coefficients",
    "series_add",
    "series_invert",
    "series_mul",
    "substitute_qaction",
]

"""Exact coefficient arithmetic: rationals, cyclotomic fields, polynomials and
a fraction-free nullspace solver.

Rationals are ``gmpy2.mpq`` values, which are always kept in lowest terms with
a positive denominator.  Integer-valued coefficients may also appear as
``gmpy2.mpz``; both compare and hash like the corresponding Python numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm

import gmpy2
from gmpy2 import mpq, mpz

from .errors import NotInSubfield

Rational = mpq

_RATIONAL_TYPES = (int, type(mpz(0)), type(mpq(0)), Fraction)


def QQ(x) -> mpq:
    """Coerce ``x`` (int, Fraction, mpz, mpq or a string like ``"-3/4"``) to mpq."""
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def is_rational(x) -> bool:
    return isinstance(x, _RATIONAL_TYPES)


# ---------------------------------------------------------------------------
# Fast exact convolution
# ---------------------------------------------------------------------------

_NAIVE_CUTOFF = 16


def _naive_convolve(a, b, n):
    out = [0] * n
    for i, x in enumerate(a):
        if not x or i >= n:
            continue
        for k in range(min(len(b), n - i)):
            y = b[k]
            if y:
                out[i + k] += x * y
    return out


def _pack(xs, nbytes):
    zero = bytes(nbytes)
    pos = b"".join(int(x).to_bytes(nbytes, "little") if x > 0 else zero for x in xs)
    neg = b"".join(int(-x).to_bytes(nbytes, "little") if x < 0 else zero for x in xs)
    return mpz(int.from_bytes(pos, "little")) - mpz(int.from_bytes(neg, "little"))


def _unpack(value, nbytes, count):
    half = 1 << (8 * nbytes - 1)
    bias = int.from_bytes((bytes(nbytes - 1) + b"\x80") * count, "little")
    raw = int(value + bias).to_bytes(nbytes * count, "little")
    return [
        mpz(int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - half)
        for i in range(count)
    ]


def _int_convolve(a, b, n):
    if min(len(a), len(b)) <= _NAIVE_CUTOFF:
        return [mpz(c) for c in _naive_convolve(a, b, n)]
    la = min(len(a), n)
    lb = min(len(b), n)
    a, b = a[:la], b[:lb]
    bits_a = max(abs(mpz(x)).bit_length() for x in a)
    bits_b = max(abs(mpz(x)).bit_length() for x in b)
    if bits_a == 0 or bits_b == 0:
        return [mpz(0)] * n
    slot = bits_a + bits_b + min(la, lb).bit_length() + 2
    nbytes = (slot + 7) // 8
    count = min(n, la + lb - 1)
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    # Bits above slot*count belong to coefficients beyond ``n``; drop them.
    if count < la + lb - 1:
        prod = _low_slots(prod, nbytes, count)
    out = _unpack(prod, nbytes, count)
    return out + [mpz(0)] * (n - count)


def _low_slots(value, nbytes, count):
    # Signed value whose base-2^slot digits are c_0, c_1, ...; keep c_0..c_{count-1}.
    shift = 8 * nbytes * count
    bias = int.from_bytes((bytes(nbytes - 1) + b"\x80") * count, "little")
    low = (value + bias) % (mpz(1) << shift)
    return low - bias


def convolve(a, b, n=None):
    """First ``n`` coefficients of the product of two rational coefficient lists."""
    if n is None:
        n = len(a) + len(b) - 1 if a and b else 0
    if n <= 0 or not a or not b:
        return [mpz(0)] * max(n, 0)
    da = _common_denominator(a)
    db = _common_denominator(b)
    ia = a if da == 1 else [mpz(x * da) for x in a]
    ib = b if db == 1 else [mpz(x * db) for x in b]
    out = _int_convolve(ia, ib, n)
    den = da * db
    if den == 1:
        return out
    return [mpq(c, den) for c in out]


def _common_denominator(xs):
    den = mpz(1)
    for x in xs:
        if isinstance(x, type(mpq(0))):
            d = x.denominator
            if d != 1:
                den = gmpy2.lcm(den, d)
        elif isinstance(x, Fraction):
            den = gmpy2.lcm(den, x.denominator)
    return den


# ---------------------------------------------------------------------------
# Univariate rational polynomials
# ---------------------------------------------------------------------------


class QPolynomial:
    """Dense polynomial over Q, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [QQ(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls):
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self):
        return self.coeffs[-1] if self.coeffs else mpq(0)

    def __eq__(self, other):
        if isinstance(other, QPolynomial):
            return self.coeffs == other.coeffs
        if is_rational(other):
            return self == QPolynomial((other,))
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"QPolynomial({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and c == 1:
                terms.append(f"+ {mono}")
            elif mono and c == -1:
                terms.append(f"- {mono}")
            else:
                sign = "-" if c < 0 else "+"
                terms.append(f"{sign} {abs(c)}{mono}")
        out = " ".join(terms)
        return out[2:] if out.startswith("+ ") else "-" + out[2:]

    def _coerce(self, other):
        if isinstance(other, QPolynomial):
            return other
        if is_rational(other):
            return QPolynomial((other,))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return QPolynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return QPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return QPolynomial()
        return QPolynomial(convolve(list(self.coeffs), list(other.coeffs)))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = QPolynomial((1,))
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading()
        quo = [mpq(0)] * max(len(rem) - dq, 0)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            f = c / lead
            quo[i - dq] = f
            for k, oc in enumerate(other.coeffs):
                rem[i - dq + k] -= f * oc
        return QPolynomial(quo), QPolynomial(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self):
        return QPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def monic(self):
        if self.is_zero():
            return self
        lead = self.leading()
        return QPolynomial(c / lead for c in self.coeffs)

    def gcd(self, other):
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def xgcd(self, other):
        """Return (g, s, t) with s*self + t*other == g, g monic."""
        r0, r1 = self, self._coerce(other)
        s0, s1 = QPolynomial((1,)), QPolynomial()
        t0, t1 = QPolynomial(), QPolynomial((1,))
        while not r1.is_zero():
            q, r = divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        lead = r0.leading()
        return r0.monic(), s0 * (1 / lead), t0 * (1 / lead)


# ---------------------------------------------------------------------------
# Cyclotomic fields
# ---------------------------------------------------------------------------


def euler_phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(d: int) -> QPolynomial:
    """The monic d-th cyclotomic polynomial, via x^d - 1 = prod_{e | d} Phi_e."""
    if d < 1:
        raise ValueError(f"cyclotomic order must be positive, got {d}")
    poly = QPolynomial([-1] + [0] * (d - 1) + [1])
    for e in divisors(d)[:-1]:
        poly, rem = divmod(poly, cyclotomic_polynomial(e))
        assert rem.is_zero()
    return poly


@lru_cache(maxsize=None)
def _power_table(d: int) -> tuple:
    """Coordinates of zeta_d^s, 0 <= s < d, in the power basis mod Phi_d."""
    phi = cyclotomic_polynomial(d)
    m = phi.degree
    table = []
    vec = [mpq(0)] * m
    vec[0] = mpq(1)
    for _ in range(d):
        table.append(tuple(vec))
        # multiply by x and reduce with x^m = -sum_{i<m} phi_i x^i
        top = vec[-1]
        vec = [mpq(0)] + vec[:-1]
        if top:
            vec = [v - top * c for v, c in zip(vec, phi.coeffs[:m])]
    return tuple(table)


def _reduce_exponents(order: int, raw) -> tuple:
    """Reduce sum raw[s] * zeta^s (any length) into the power basis."""
    table = _power_table(order)
    m = len(table[0])
    out = [mpq(0)] * m
    for s, c in enumerate(raw):
        if not c:
            continue
        if s < m:
            out[s] += c
        else:
            for i, t in enumerate(table[s % order]):
                if t:
                    out[i] += c * t
    return tuple(out)


class CycloElement:
    """Element of Q(zeta_d), stored in the power basis modulo Phi_d."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        self.order = order
        m = euler_phi(order)
        cs = [QQ(c) for c in coeffs]
        if len(cs) <= m:
            self.coeffs = tuple(cs) + (mpq(0),) * (m - len(cs))
        else:
            self.coeffs = _reduce_exponents(order, cs)

    @classmethod
    def zeta(cls, order: int, k: int = 1) -> "CycloElement":
        return cls(order, _power_table(order)[k % order])

    @classmethod
    def from_rational(cls, order: int, value) -> "CycloElement":
        return cls(order, [value])

    def lift(self, order: int) -> "CycloElement":
        """Embed into Q(zeta_order); ``self.order`` must divide ``order``."""
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot embed order {self.order} into order {order}")
        step = order // self.order
        raw = [mpq(0)] * ((len(self.coeffs) - 1) * step + 1)
        for i, c in enumerate(self.coeffs):
            raw[i * step] = c
        return CycloElement(order, raw)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> mpq:
        if not self.is_rational():
            raise NotInSubfield(f"{self!r} is not rational")
        return self.coeffs[0]

    def _align(self, other):
        if isinstance(other, CycloElement):
            if other.order == self.order:
                return self, other
            order = lcm(self.order, other.order)
            return self.lift(order), other.lift(order)
        if is_rational(other):
            return self, CycloElement(self.order, [other])
        return None, None

    def __add__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return CycloElement(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycloElement(self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return CycloElement(a.order, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rational(other):
            return CycloElement(self.order, [c * other for c in self.coeffs])
        a, b = self._align(other)
        if a is None:
            return NotImplemented
        return CycloElement(a.order, _naive_convolve(a.coeffs, b.coeffs, 2 * len(a.coeffs) - 1))

    __rmul__ = __mul__

    def inverse(self) -> "CycloElement":
        if not self:
            raise ZeroDivisionError("inverse of zero in cyclotomic field")
        g, s, _ = QPolynomial(self.coeffs).xgcd(cyclotomic_polynomial(self.order))
        assert g.degree == 0
        return CycloElement(self.order, s.coeffs)

    def __truediv__(self, other):
        if is_rational(other):
            return CycloElement(self.order, [c / other for c in self.coeffs])
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = CycloElement(self.order, [1])
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, CycloElement):
            a, b = self._align(other)
            return a.coeffs == b.coeffs
        if is_rational(other):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def __repr__(self):
        terms = [f"{c}*z^{i}" if i else f"{c}" for i, c in enumerate(self.coeffs) if c]
        return f"CycloElement({self.order}: {' + '.join(terms) or '0'})"

    def to_complex(self, ctx=None):
        """Numeric value under zeta_d = exp(2 pi i / d) (mpmath context optional)."""
        import mpmath

        ctx = ctx or mpmath.mp
        z = ctx.expjpi(ctx.mpf(2) / self.order)
        acc = ctx.mpc(0)
        for c in reversed(self.coeffs):
            acc = acc * z + ctx.mpf(c.numerator) / c.denominator
        return acc


def cyclo_reduce(e, target_order: int | None = None):
    """Rewrite ``e`` inside the cyclotomic subfield Q(zeta_target).

    Rational values are always returned as ``mpq``.  Raises NotInSubfield if
    ``e`` does not lie in the requested subfield.
    """
    if is_rational(e):
        return QQ(e)
    if target_order is None:
        target_order = e.order
    if e.is_rational():
        return e.coeffs[0]
    if e.order % target_order:
        raise ValueError(f"target order {target_order} does not divide {e.order}")
    if target_order == 1 or euler_phi(target_order) == 1:
        raise NotInSubfield(f"{e!r} is not rational")
    step = e.order // target_order
    table = _power_table(e.order)
    m_t = euler_phi(target_order)
    # columns: zeta_d^(step*i) for i < phi(target), last column -e
    cols = [table[(step * i) % e.order] for i in range(m_t)]
    rows = [[col[r] for col in cols] + [-e.coeffs[r]] for r in range(len(e.coeffs))]
    for v in nullspace(LinearSystem(rows, m_t + 1)):
        if v[-1]:
            coeffs = [c / v[-1] for c in v[:-1]]
            out = CycloElement(target_order, coeffs)
            return out.coeffs[0] if out.is_rational() else out
    raise NotInSubfield(f"{e!r} does not lie in Q(zeta_{target_order})")


# ---------------------------------------------------------------------------
# Exact linear algebra
# ---------------------------------------------------------------------------


@dataclass
class LinearSystem:
    rows: list
    ncols: int

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != self.ncols:
                raise ValueError(f"row {i} has length {len(row)}, expected {self.ncols}")


def _integer_row(row):
    den = _common_denominator(row)
    ints = [mpz(x * den) for x in row]
    g = mpz(0)
    for x in ints:
        if x:
            g = gmpy2.gcd(g, x)
            if g == 1:
                break
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def echelon(rows, ncols):
    """Fraction-free (Bareiss) row echelon form.

    Returns ``(echelon_rows, pivot_columns)``.  Within each column the pivot is
    the remaining entry of largest absolute value.
    """
    m = [_integer_row(r) for r in rows if any(r)]
    prev = mpz(1)
    pivots = []
    r = 0
    for c in range(ncols):
        best, best_abs = None, 0
        for i in range(r, len(m)):
            v = m[i][c]
            if v and abs(v) > best_abs:
                best, best_abs = i, abs(v)
        if best is None:
            continue
        m[r], m[best] = m[best], m[r]
        prow = m[r]
        p = prow[c]
        for i in range(r + 1, len(m)):
            row = m[i]
            f = row[c]
            if f:
                m[i] = [0] * (c + 1) + [
                    (p * row[k] - f * prow[k]) // prev for k in range(c + 1, ncols)
                ]
            elif p != prev:
                m[i] = [0] * (c + 1) + [(p * row[k]) // prev for k in range(c + 1, ncols)]
        prev = p
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows, ncols) -> int:
    return len(echelon(rows, ncols)[1])


def nullspace(system: LinearSystem) -> list:
    """Basis of the rational nullspace, each vector scaled to a primitive integer vector."""
    ech, pivots = echelon(system.rows, system.ncols)
    n = system.ncols
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    basis = []
    for fcol in free:
        x = [mpq(0)] * n
        x[fcol] = mpq(1)
        for i in range(len(pivots) - 1, -1, -1):
            pc = pivots[i]
            row = ech[i]
            s = mpq(0)
            for k in range(pc + 1, n):
                if row[k] and x[k]:
                    s += row[k] * x[k]
            x[pc] = -s / row[pc]
        basis.append(_primitive_vector(x))
    return basis


def _primitive_vector(x):
    ints = _integer_row(x)
    for v in ints:
        if v:
            if v < 0:
                ints = [-t for t in ints]
            break
    return [mpq(v) for v in ints]


# ---------------------------------------------------------------------------
# Multimodular solving with exact verification
# ---------------------------------------------------------------------------

_PRIME_TOP = 2 ** 31


@lru_cache(maxsize=None)
def _primes_below_top(count: int) -> tuple:
    out = []
    p = mpz(_PRIME_TOP)
    while len(out) < count:
        p -= 1
        if gmpy2.is_prime(p):
            out.append(int(p))
    return tuple(out)


def _rref_mod(rows, p, ncols):
    """Reduced row echelon form mod p.

    Returns (matrix, pivot columns, original indices of the pivot rows).
    """
    import numpy as np

    A = np.array(rows, dtype=np.int64).reshape(len(rows), ncols) % p
    order = list(range(len(rows)))
    pivots = []
    picked = []
    r = 0
    nrows = A.shape[0]
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
            order[r], order[k] = order[k], order[r]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = (A[r] * inv) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r])) % p
        pivots.append(c)
        picked.append(order[r])
        r += 1
    return A[:r], pivots, picked


def rational_reconstruction(a: int, m: int):
    """Fraction n/d with n = a d mod m and |n|, d <= sqrt(m/2); None if none exists."""
    a %= m
    bound = gmpy2.isqrt(m // 2)
    r0, r1 = mpz(m), mpz(a)
    t0, t1 = mpz(0), mpz(1)
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound:
        return None
    if t1 < 0:
        r1, t1 = -r1, -t1
    if gmpy2.gcd(r1, t1) != 1:
        return None
    return mpq(r1, t1)


def first_free_solution(rows, ncols, max_primes: int = 4000):
    """Nonzero nullspace vector supported on the earliest possible columns.

    Let f be the first column that is free in the echelon form.  The returned
    vector has a 1 in column f, zeros in every other free column and in all
    columns after f.  Among all nullspace vectors it is the one whose last
    nonzero column is smallest.  It is computed modulo word-size primes and
    lifted by rational reconstruction, and it is returned only after exact
    substitution into every row.  Returns None if the nullspace is trivial.
    """
    int_rows = [_integer_row(r) for r in rows if any(r)]
    if not int_rows:
        return [mpq(1)] + [mpq(0)] * (ncols - 1) if ncols else None
    primes = _primes_below_top(max_primes)

    def residues(subset, p):
        return [[int(x % p) for x in int_rows[i]] for i in subset]

    pivots = picked = None
    for p in primes[:4]:
        _, piv, pk = _rref_mod(residues(range(len(int_rows)), p), p, ncols)
        if pivots is None or len(piv) > len(pivots):
            pivots, picked = piv, pk
    if len(pivots) == ncols:
        return None
    pivot_set = set(pivots)
    free = next(c for c in range(ncols) if c not in pivot_set)
    subset = sorted(picked)
    modulus = mpz(1)
    acc = [mpz(0)] * ncols
    previous = None
    used = 0
    for p in primes:
        R, piv, _ = _rref_mod(residues(subset, p), p, ncols)
        if piv != pivots:
            continue  # unlucky prime
        vec = [0] * ncols
        vec[free] = 1
        for i, c in enumerate(piv):
            if c < free:
                vec[c] = (-int(R[i, free])) % p
        # CRT merge
        inv = int(gmpy2.invert(modulus, p))
        for c in range(ncols):
            delta = ((vec[c] - acc[c]) % p) * inv % p
            acc[c] = acc[c] + modulus * delta
        modulus *= p
        used += 1
        if used % 4:
            continue
        cand = []
        for c in range(ncols):
            v = rational_reconstruction(acc[c], modulus)
            if v is None:
                cand = None
                break
            cand.append(v)
        if cand is None:
            continue
        if cand == previous and _verifies(int_rows, cand):
            return _primitive_vector(cand)
        previous = cand
    raise ArithmeticError("modular solve did not converge; increase max_primes")


def _verifies(int_rows, vec) -> bool:
    den = _common_denominator(vec)
    ivec = [mpz(x * den) for x in vec]
    support = [(k, v) for k, v in enumerate(ivec) if v]
    for row in int_rows:
        s = mpz(0)
        for k, v in support:
            if row[k]:
                s += row[k] * v
        if s:
            return False
    return True


def first_free_solution_exact(rows, ncols):
    """Same vector as first_free_solution, from the fraction-free echelon form."""
    ech, pivots = echelon(rows, ncols)
    pivot_set = set(pivots)
    free = next((c for c in range(ncols) if c not in pivot_set), None)
    if free is None:
        return None
    x = [mpq(0)] * ncols
    x[free] = mpq(1)
    for i in range(len(pivots) - 1, -1, -1):
        pc = pivots[i]
        if pc > free:
            continue
        row = ech[i]
        s = mpq(0)
        for k in range(pc + 1, free + 1):
            if row[k] and x[k]:
                s += row[k] * x[k]
        x[pc] = -s / row[pc]
    return _primitive_vector(x)

"""Classical modular polynomials Phi_N and the polynomials Psi_N in
(chi*(g tau), j(tau), chi*(tau)).

Both are built from the symmetric functions of F(g tau), g in D_N, with F = j
or F = chi*.  The default route groups D_N into orbits {(a, b; 0, d)} with
(a, d) fixed; the power sums of one orbit are rational series obtained from
the series of F^m by a Ramanujan-sum filter, so no cyclotomic arithmetic is
needed.  The literal product over D_N with cyclotomic coefficients is kept as
an independent route (``method="product"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from pathlib import Path

import gmpy2
import mpmath
from gmpy2 import mpq, mpz

from . import modforms
from .errors import CancellationFailure, LevelUnavailable, NoSolution, ParseError, TruncationTooSmall
from .exactalg import QPolynomial, divisors, first_free_solution, first_free_solution_exact
from .hecke import enumerate_DN
from .qseries import AhmSeries, PuiseuxSeries


# ---------------------------------------------------------------------------
# Sparse polynomials
# ---------------------------------------------------------------------------


class SparsePolynomial:
    """Sparse polynomial with rational coefficients in a fixed number of variables."""

    nvars = 0
    kind = ""

    __slots__ = ("terms", "N")

    def __init__(self, terms=None, N: int | None = None):
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ValueError(f"expected {self.nvars} exponents, got {exps}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = mpq(c) if not isinstance(c, Fraction) else mpq(c.numerator, c.denominator)
            if c:
                clean[exps] = clean.get(exps, mpq(0)) + c
        self.terms = {k: v for k, v in clean.items() if v}
        self.N = N

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        return f"{type(self).__name__}(N={self.N}, {len(self.terms)} terms)"

    def sorted_terms(self):
        return sorted(self.terms.items(), reverse=True)

    def degree(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=-1)

    def coefficient(self, *exps):
        return self.terms.get(tuple(exps), mpq(0))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def content(self) -> mpq:
        num = mpz(0)
        den = mpz(1)
        for c in self.terms.values():
            num = gmpy2.gcd(num, c.numerator)
            den = gmpy2.lcm(den, c.denominator)
        return mpq(num, den) if num else mpq(0)

    def normalized(self):
        """Integer coefficients with content 1, leading term (largest exponent tuple) positive."""
        if not self.terms:
            return self
        c = self.content()
        lead = max(self.terms)
        if self.terms[lead] < 0:
            c = -c
        return type(self)({k: v / c for k, v in self.terms.items()}, N=self.N)

    def evaluate(self, point):
        """Evaluate at complex ``point`` (mpmath values); returns (value, max |monomial|)."""
        powers = []
        for v, x in enumerate(point):
            top = self.degree(v)
            p = [mpmath.mpf(1)]
            for _ in range(top):
                p.append(p[-1] * x)
            powers.append(p)
        total = mpmath.mpc(0)
        biggest = mpmath.mpf(0)
        for exps, c in self.terms.items():
            m = mpmath.mpf(c.numerator) / c.denominator
            for v, e in enumerate(exps):
                m = m * powers[v][e]
            total += m
            a = abs(m)
            if a > biggest:
                biggest = a
        return total, biggest

    def normalized_residual(self, point):
        value, scale = self.evaluate(point)
        if scale == 0:
            return abs(value)
        return abs(value) / scale

    def swap(self, i: int, k: int):
        terms = {}
        for exps, c in self.terms.items():
            e = list(exps)
            e[i], e[k] = e[k], e[i]
            terms[tuple(e)] = c
        return type(self)(terms, N=self.N)

    def x_coefficients(self):
        """Map X-degree -> dict of remaining exponents -> coefficient."""
        out = {}
        for exps, c in self.terms.items():
            out.setdefault(exps[0], {})[exps[1:]] = c
        return out


class BiPolynomial(SparsePolynomial):
    nvars = 2
    kind = "bipoly"
    __slots__ = ()


class TriPolynomial(SparsePolynomial):
    nvars = 3
    kind = "tripoly"
    __slots__ = ()


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def format_poly(poly: SparsePolynomial) -> str:
    lines = [f"{poly.kind} N={poly.N if poly.N is not None else 0}"]
    for exps, c in poly.sorted_terms():
        coeff = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
        lines.append(" ".join(str(e) for e in exps) + " : " + coeff)
    return "\n".join(lines) + "\n"


def save_poly(poly: SparsePolynomial, path) -> None:
    Path(path).write_text(format_poly(poly), encoding="utf-8", newline="\n")


def parse_poly(text: str) -> SparsePolynomial:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty polynomial file", line=1)
    header = lines[0].split()
    if len(header) != 2 or header[0] not in ("bipoly", "tripoly") or not header[1].startswith("N="):
        raise ParseError(f"bad header {lines[0]!r}", line=1)
    cls = BiPolynomial if header[0] == "bipoly" else TriPolynomial
    try:
        N = int(header[1][2:])
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}", line=1) from None
    terms = {}
    prev = None
    for lineno, line in enumerate(lines[1:], start=2):
        left, sep, right = line.partition(":")
        if not sep:
            raise ParseError(f"missing ':' in {line!r}", line=lineno)
        parts = left.split()
        if len(parts) != cls.nvars:
            raise ParseError(f"expected {cls.nvars} exponents in {line!r}", line=lineno)
        try:
            exps = tuple(int(p) for p in parts)
            if any(e < 0 for e in exps):
                raise ValueError
            coeff = mpq(right.strip())
        except ValueError:
            raise ParseError(f"cannot parse {line!r}", line=lineno) from None
        if not coeff:
            raise ParseError("zero coefficient", line=lineno)
        if exps in terms:
            raise ParseError(f"duplicate monomial {exps}", line=lineno)
        if prev is not None and exps > prev:
            raise ParseError("monomials are not sorted in descending order", line=lineno)
        prev = exps
        terms[exps] = coeff
    return cls(terms, N=N)


def load_poly(path) -> SparsePolynomial:
    return parse_poly(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Symmetric functions over D_N
# ---------------------------------------------------------------------------


@dataclass
class RecoveryConfig:
    B: int | None = None  # starting degree bound; None means 2 |D_N|
    T: int | None = None  # truncation in integral q-powers; None means 40 N
    max_escalations: int = 3

    def __post_init__(self):
        if self.B is not None and self.B < 1:
            raise ValueError("degree bound B must be >= 1")
        if self.T is not None and self.T < 8:
            raise ValueError("truncation T must be >= 8")


def _mobius(n: int) -> int:
    out = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    if n > 1:
        out = -out
    return out


def orbits(N: int) -> list[tuple[int, int]]:
    """The pairs (a, d) with ad = N; each indexes one orbit of D_N."""
    return [(a, N // a) for a in divisors(N)]


def _ramanujan_filter(s: PuiseuxSeries, a: int, d: int) -> PuiseuxSeries:
    """sum over 0 <= b < d with gcd(a,b,d) = 1 of s((a tau + b)/d), for ram-1 rational s."""
    if s.ram != 1:
        raise ValueError("filter expects a series in integral powers of q")
    e = gcd(a, d)
    weights = [(_mobius(t), d // t) for t in divisors(e) if _mobius(t)]
    coeffs = [mpz(0)] * (len(s.coeffs) * a)
    for i, c in enumerate(s.coeffs):
        if not c:
            continue
        n = s.val + i
        r = sum(mu * m for mu, m in weights if n % m == 0)
        if r:
            coeffs[i * a] = c * r
    return PuiseuxSeries(coeffs, val=s.val * a, ram=d, prec=s.prec * a)


def _filter_ahm(s: AhmSeries, a: int, d: int) -> AhmSeries:
    scale = mpq(d, a)
    return AhmSeries([_ramanujan_filter(c, a, d) * scale ** k for k, c in enumerate(s.ycoeffs)])


def _orbit_size(a: int, d: int) -> int:
    return sum(1 for b in range(d) if gcd(gcd(a, b), d) == 1)


def orbit_polynomial(F: AhmSeries, a: int, d: int):
    """Coefficients (lowest X-degree first) of prod_b (X - F((a tau + b)/d))."""
    k = _orbit_size(a, d)
    power = None
    sums = []
    for m in range(1, k + 1):
        power = F if power is None else power * F
        sums.append(_filter_ahm(power, a, d))
    elem = [mpq(1)]
    for m in range(1, k + 1):
        acc = None
        for i in range(1, m + 1):
            term = sums[i - 1] if i == m else elem[m - i] * sums[i - 1]
            if i % 2 == 0:
                term = -term
            acc = term if acc is None else acc + term
        elem.append(acc * mpq(1, m))
    # prod (X - x_b) = sum_m (-1)^m e_m X^(k-m)
    return [elem[k - i] * (-1) ** (k - i) for i in range(k + 1)]


def orbit_polynomial_product(F: AhmSeries, a: int, d: int):
    """Same as orbit_polynomial, by the literal product over b with cyclotomic coefficients."""
    poly = None
    for b in range(d):
        if gcd(gcd(a, b), d) != 1:
            continue
        root = F.substitute_qaction(a, b, d)
        factor = [-root, mpq(1)]
        poly = factor if poly is None else _poly_mul(poly, factor)
    return [_rational_coefficient(c) for c in poly]


def _rational_coefficient(c):
    if not isinstance(c, AhmSeries):
        return c
    try:
        c = c.rationalize()
    except Exception as exc:
        raise CancellationFailure(f"coefficient is not rational: {exc}") from exc
    if not c.has_integral_exponents():
        raise CancellationFailure("fractional powers of q survived symmetrization")
    return c.descend()


def _poly_mul(p, r):
    out = [None] * (len(p) + len(r) - 1)
    for i, x in enumerate(p):
        for k, y in enumerate(r):
            t = x * y
            out[i + k] = t if out[i + k] is None else out[i + k] + t
    return out


def hecke_symmetric_polynomial(F: AhmSeries, N: int, method: str = "powersum"):
    """X-coefficients of prod_{g in D_N} (X - F(g tau)), as rational AhmSeries."""
    poly = None
    for a, d in orbits(N):
        if method == "powersum":
            part = orbit_polynomial(F, a, d)
        elif method == "product":
            part = orbit_polynomial_product(F, a, d)
        else:
            raise ValueError(f"unknown method {method!r}")
        poly = part if poly is None else _poly_mul(poly, part)
    return [_rational_coefficient(c) for c in poly]


def _leading_one(coeffs):
    lead = coeffs[-1]
    if not isinstance(lead, AhmSeries):
        if lead != 1:
            raise CancellationFailure("product is not monic in X")
        return
    for k in range(len(lead.ycoeffs)):
        s = lead.ycoeffs[k]
        for e, c in s.items():
            if (k, e) != (0, 0) or c != 1:
                raise CancellationFailure("product is not monic in X")


# ---------------------------------------------------------------------------
# Phi_N
# ---------------------------------------------------------------------------


def _peel_in_j(c: PuiseuxSeries, jpowers, max_degree: int):
    """Write c as a polynomial in the j-series by cancelling the most polar term."""
    if c.ram != 1:
        raise CancellationFailure("peeling needs integral exponents")
    out = {}
    rem = c
    for deg in range(max_degree, -1, -1):
        coeff = rem.coefficient_at(-deg) if -deg < rem.truncation else None
        if coeff is None:
            raise TruncationTooSmall("series truncated before the constant term")
        if coeff:
            out[deg] = mpq(coeff)
            rem = rem - jpowers[deg] * coeff
    if not rem.is_zero():
        raise TruncationTooSmall(
            f"nonzero remainder at q^{rem.valuation} after peeling in j")
    return out, rem.truncation


def _j_powers(T: int, top: int):
    j = modforms.qexp("j", T + top + 2)
    powers = [mpq(1), j]
    for _ in range(top - 1):
        powers.append(powers[-1] * j)
    return powers


PHI_MARGIN = 8


def build_phi(N: int, cfg: RecoveryConfig | None = None, method: str = "powersum") -> BiPolynomial:
    """Phi_N(X, Y) with Phi_N(j(g tau), j(tau)) = 0, integer coefficients."""
    cfg = cfg or RecoveryConfig()
    target = cfg.T if cfg.T is not None else PHI_MARGIN
    size = len(enumerate_DN(N))
    work = target + size
    for _ in range(cfg.max_escalations + 4):
        F = AhmSeries([modforms.qexp("j", work)])
        coeffs = hecke_symmetric_polynomial(F, N, method)
        _leading_one(coeffs)
        trunc = min(c.truncation for c in coeffs if isinstance(c, AhmSeries))
        if trunc >= target:
            break
        work += (target - int(trunc)) * N + size
    else:
        raise TruncationTooSmall(f"could not reach truncation {target} for Phi_{N}")
    jpowers = _j_powers(int(trunc), size)
    terms = {}
    for i, c in enumerate(coeffs):
        if not isinstance(c, AhmSeries):
            terms[(i, 0)] = c
            continue
        poly, _ = _peel_in_j(c.coefficient(0), jpowers, size)
        for k, v in poly.items():
            terms[(i, k)] = v
    out = BiPolynomial(terms, N=N)
    if not out.is_integral():
        raise CancellationFailure(f"Phi_{N} has non-integral coefficients")
    return out


# ---------------------------------------------------------------------------
# Psi_N
# ---------------------------------------------------------------------------


def _graded_monomials(B: int):
    return sorted(((u, v) for u in range(B + 1) for v in range(B + 1)),
                  key=lambda m: (m[0] + m[1], m))


class _MonomialCache:
    """Series of j^u chi*^v, built on demand from fixed base series."""

    def __init__(self, j: AhmSeries, chi_star: AhmSeries):
        self.j = [None, j]
        self.z = [None, chi_star]
        self.cache = {}

    def _power(self, table, e):
        while len(table) <= e:
            table.append(table[-1] * table[1])
        return table[e]

    def get(self, u: int, v: int):
        if (u, v) == (0, 0):
            return None
        if (u, v) not in self.cache:
            if u == 0:
                s = self._power(self.z, v)
            elif v == 0:
                s = self._power(self.j, u)
            else:
                s = self._power(self.j, u) * self._power(self.z, v)
            self.cache[(u, v)] = s
        return self.cache[(u, v)]


def _series_rows(columns):
    """Coefficient rows (one per (Y-power, q-exponent)) of a list of AhmSeries."""
    trunc = min(c.truncation for c in columns)
    val = min(c.valuation for c in columns)
    ydeg = max(c.y_degree for c in columns)
    rows = []
    for y in range(ydeg + 1):
        parts = [c.coefficient(y) for c in columns]
        e = val
        while e < trunc:
            row = [s.coefficient_at(e) for s in parts]
            if any(row):
                rows.append(row)
            e += 1
    return rows, trunc


def recover_fraction(c: AhmSeries, monos: _MonomialCache, B: int, solver: str = "modular"):
    """Find p, q in Q[j, chi*] of degree <= B in each variable with c q = p.

    Returns (p, q) as dicts (u, v) -> coefficient, or None if no solution
    exists at this degree bound.  The solution is the one whose denominator
    has the smallest leading monomial in the graded order, which makes p/q
    reduced.
    """
    mons = _graded_monomials(B)
    cols = []
    for m in mons:
        s = monos.get(*m)
        cols.append(-s if s is not None else AhmSeries([PuiseuxSeries.monomial(0, -1, truncation=c.truncation)]))
    for m in mons:
        s = monos.get(*m)
        cols.append(c * s if s is not None else c)
    rows, trunc = _series_rows(cols)
    if trunc <= 0 or len(rows) < len(cols) + 8:
        raise TruncationTooSmall(
            f"only {len(rows)} equations for {len(cols)} unknowns (truncation {trunc})")
    if solver == "modular":
        vec = first_free_solution(rows, len(cols))
    elif solver == "exact":
        vec = first_free_solution_exact(rows, len(cols))
    else:
        raise ValueError(f"unknown solver {solver!r}")
    if vec is None:
        return None
    n = len(mons)
    p = {m: vec[i] for i, m in enumerate(mons) if vec[i]}
    q = {m: vec[n + i] for i, m in enumerate(mons) if vec[n + i]}
    if not q:
        return None
    return p, q


def _to_sympy(d, Y, Z):
    import sympy

    return sympy.Poly.from_dict({k: sympy.Rational(int(v.numerator), int(v.denominator))
                                 for k, v in d.items()}, Y, Z, domain="QQ")


def _assemble(fractions, N: int) -> TriPolynomial:
    """Psi from X-coefficients p_k/q_k: multiply through by lcm(q_k), normalize."""
    import sympy

    Y, Z = sympy.symbols("Y Z")
    reduced = []
    for p, q in fractions:
        P, Q = _to_sympy(p, Y, Z), _to_sympy(q, Y, Z)
        g = sympy.gcd(P, Q)
        reduced.append((sympy.div(P, g)[0], sympy.div(Q, g)[0]))
    L = reduced[0][1]
    for _, Q in reduced[1:]:
        L = sympy.lcm(L, Q)
    terms = {}
    for k, (P, Q) in enumerate(reduced):
        cof, r = sympy.div(L, Q)
        assert r.is_zero
        for (a, b), v in (P * cof).terms():
            terms[(k, a, b)] = mpq(int(v.p), int(v.q))
    return TriPolynomial(terms, N=N).normalized()


def psi_coefficients(N: int, T: int, method: str = "powersum"):
    """X-coefficients of prod_{g in D_N} (X - chi*(g tau)) from chi* known to q^T."""
    F = modforms.derived_qexp("chi_star", T).series
    coeffs = hecke_symmetric_polynomial(F, N, method)
    _leading_one(coeffs)
    return coeffs


def build_psi(N: int, cfg: RecoveryConfig | None = None, method: str = "powersum",
              solver: str = "modular") -> TriPolynomial:
    """Psi_N(X, Y, Z) with Psi_N(chi*(g tau), j(tau), chi*(tau)) = 0."""
    cfg = cfg or RecoveryConfig()
    size = len(enumerate_DN(N))
    T = cfg.T if cfg.T is not None else 40 * N
    B0 = cfg.B if cfg.B is not None else 2 * size
    last_error = None
    for t_step in range(cfg.max_escalations + 1):
        coeffs = psi_coefficients(N, T, method)
        work = int(max(c.truncation for c in coeffs if isinstance(c, AhmSeries))) + 4
        monos = _MonomialCache(AhmSeries([modforms.qexp("j", work)]),
                               modforms.derived_qexp("chi_star", work).series)
        B = B0
        for b_step in range(cfg.max_escalations + 1):
            try:
                fractions = []
                for c in coeffs:
                    if not isinstance(c, AhmSeries):
                        fractions.append(({(0, 0): mpq(c)}, {(0, 0): mpq(1)}))
                        continue
                    found = recover_fraction(c, monos, B, solver)
                    if found is None:
                        raise NoSolution(f"no p/q of degree <= {B} for an X-coefficient of Psi_{N}")
                    fractions.append(found)
                return _assemble(fractions, N)
            except NoSolution as exc:
                last_error = exc
                B += size
            except TruncationTooSmall as exc:
                last_error = exc
                break
        T *= 2
    raise last_error


def _specialize_x(poly: TriPolynomial, y, z) -> QPolynomial:
    coeffs = {}
    for (i, a, b), c in poly.terms.items():
        coeffs[i] = coeffs.get(i, mpq(0)) + c * mpq(y) ** a * mpq(z) ** b
    top = max(coeffs, default=0)
    return QPolynomial([coeffs.get(i, mpq(0)) for i in range(top + 1)])


@dataclass
class PsiSanity:
    N: int
    deg_x: int
    deg_y: int
    deg_z: int
    expected_deg_x: int
    content_one: bool
    squarefree: bool

    @property
    def ok(self) -> bool:
        return (self.deg_x == self.expected_deg_x and self.content_one and self.squarefree
                and (self.deg_y >= 1 if self.N >= 2 else self.deg_y == 0))

    def lines(self):
        return [f"N = {self.N}", f"deg_X = {self.deg_x}", f"expected_deg_X = {self.expected_deg_x}",
                f"deg_Y = {self.deg_y}", f"deg_Z = {self.deg_z}",
                f"content_one = {self.content_one}", f"squarefree_in_X = {self.squarefree}"]


def psi_sanity(psi: TriPolynomial, N: int) -> PsiSanity:
    """Degree, content and square-freeness checks.

    Square-freeness in X over Q(Y, Z) is tested at an integer specialization
    (Y, Z) where the leading X-coefficient does not vanish: a repeated factor
    over Q(Y, Z) would survive any such specialization.
    """
    deg_x = psi.degree(0)
    content_one = psi.is_integral() and psi.content() == 1
    squarefree = False
    for y, z in ((3, 5), (7, -2), (11, 13), (-17, 19)):
        f = _specialize_x(psi, y, z)
        if f.degree != deg_x:
            continue
        squarefree = f.gcd(f.derivative()).degree == 0
        break
    return PsiSanity(N, deg_x, psi.degree(1), psi.degree(2), len(enumerate_DN(N)),
                     content_one, squarefree)


# ---------------------------------------------------------------------------
# Polynomial store
# ---------------------------------------------------------------------------


class PolynomialStore:
    """Phi_N and Psi_N from files ``phi_N.txt`` / ``psi_N.txt`` in a directory,
    otherwise built on demand up to the given levels and kept in memory."""

    def __init__(self, directory=None, build: bool = True, max_phi_level: int = 30,
                 max_psi_level: int = 3):
        self.directory = Path(directory) if directory else None
        self.build = build
        self.max_level = {"phi": max_phi_level, "psi": max_psi_level}
        self._cache: dict = {}

    def _get(self, kind: str, N: int):
        key = (kind, N)
        if key in self._cache:
            return self._cache[key]
        poly = None
        if self.directory is not None:
            path = self.directory / f"{kind}_{N}.txt"
            if path.exists():
                poly = load_poly(path)
        if poly is None:
            if not self.build or N > self.max_level[kind]:
                raise LevelUnavailable(f"{kind.capitalize()}_{N} is not available")
            poly = build_phi(N) if kind == "phi" else build_psi(N)
        self._cache[key] = poly
        return poly

    def phi(self, N: int) -> BiPolynomial:
        return self._get("phi", N)

    def psi(self, N: int) -> TriPolynomial:
        return self._get("psi", N)

    get = phi


DEFAULT_STORE = PolynomialStore()

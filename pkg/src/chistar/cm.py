"""CM points: reduced forms, fixing matrices and levels, Taylor coefficients of
Phi_d on the diagonal, Masser's formulas for psi = E2* E4 / E6, and the
Galois-orbit checks for j and chi*."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd, isqrt

import mpmath
from gmpy2 import mpq

from . import modforms
from .errors import FormulaPole, InvalidDiscriminant, LevelUnavailable, ReconstructionFailed, SmallDenominator
from .exactalg import is_rational
from .hecke import GL2Matrix
from .hpcomplex import ComplexHP
from .modpoly import DEFAULT_STORE, BiPolynomial, PolynomialStore
from .numeval import GUARD_BITS, sample_box_point, value
from .qseries import AhmSeries, PuiseuxSeries

DEFAULT_PREC = 384
LEVEL_TOL = mpmath.mpf("1e-10")
RECON_BOUND = 10 ** 12
INTEGRALITY_TOL = mpmath.mpf("1e-10")


@dataclass(frozen=True)
class QuadraticPoint:
    A: int
    B: int
    C: int

    def __post_init__(self):
        if self.A <= 0:
            raise InvalidDiscriminant(f"form {self.abc} needs A > 0")
        if self.D >= 0:
            raise InvalidDiscriminant(f"form {self.abc} is not positive definite")
        if not (abs(self.B) <= self.A <= self.C):
            raise InvalidDiscriminant(f"form {self.abc} is not reduced")
        if self.B < 0 and (abs(self.B) == self.A or self.A == self.C):
            raise InvalidDiscriminant(f"form {self.abc} is not reduced")

    @property
    def abc(self) -> tuple:
        return (self.A, self.B, self.C)

    @property
    def D(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def tau(self):
        """CM point (-B + i sqrt|D|) / (2A) at the current mpmath precision."""
        return mpmath.mpc(-self.B, mpmath.sqrt(-self.D)) / (2 * self.A)

    def tau_hp(self, prec: int = DEFAULT_PREC) -> ComplexHP:
        with mpmath.workprec(prec + GUARD_BITS):
            return ComplexHP(self.tau(), prec)

    def __str__(self):
        return f"({self.A},{self.B},{self.C})"


def _check_discriminant(D: int):
    if not isinstance(D, int) or D >= 0 or D % 4 not in (0, 1):
        raise InvalidDiscriminant(f"{D} is not a negative discriminant (D < 0, D = 0 or 1 mod 4)")


def reduced_forms(D: int) -> list[QuadraticPoint]:
    """Primitive reduced forms of discriminant D, ordered by (A, B)."""
    _check_discriminant(D)
    out = []
    A = 1
    while 3 * A * A <= -D:
        for B in range(-A + 1, A + 1):
            if (B - D) % 2:
                continue
            num = B * B - D
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C < A or gcd(gcd(A, B), C) != 1:
                continue
            if B < 0 and A == C:
                continue
            out.append(QuadraticPoint(A, B, C))
        A += 1
    return out


def class_number(D: int) -> int:
    return len(reduced_forms(D))


# ---------------------------------------------------------------------------
# Fixing matrices and levels
# ---------------------------------------------------------------------------


def unscaled_fixing_matrix(p: QuadraticPoint) -> GL2Matrix:
    return GL2Matrix(-p.B, -2 * p.C, 2 * p.A, p.B)


def fixing_matrix(p: QuadraticPoint, prec: int = 128) -> GL2Matrix:
    """Primitive matrix fixing tau_p; the fixed point is checked numerically."""
    m = unscaled_fixing_matrix(p).primitive_part()
    with mpmath.workprec(prec):
        t = p.tau()
        if abs(m.act(t) - t) > mpmath.mpf(2) ** (-prec // 2):
            raise AssertionError(f"{m} does not fix {t}")  # pragma: no cover
    return m


PhiStore = PolynomialStore


def diagonal_residual(phi: BiPolynomial, j):
    """|Phi(j, j)| relative to max(1, largest monomial)."""
    val, scale = phi.evaluate((j, j))
    return abs(val) / max(mpmath.mpf(1), scale)


@dataclass
class LevelChoice:
    point: QuadraticPoint
    matrix: GL2Matrix
    level: int
    certified: bool
    residuals: dict = field(default_factory=dict)  # candidate level -> residual or error name

    def lines(self):
        out = [f"fixing_matrix = {self.matrix}", f"level = {self.level}",
               f"level_certified = {self.certified}"]
        for d, r in self.residuals.items():
            out.append(f"phi_{d}_diagonal_residual = {r if isinstance(r, str) else mpmath.nstr(r, 5)}")
        return out


def select_level(p: QuadraticPoint, prec: int = DEFAULT_PREC, store: PolynomialStore | None = None) -> LevelChoice:
    """Level d with Phi_d(j(tau), j(tau)) = 0.

    Candidates are the determinant of the primitive fixing matrix and, when
    that matrix had content > 1, the determinant |D| of the unscaled one.
    Level 1 is skipped: Phi_1 vanishes on the whole diagonal.
    """
    store = store or DEFAULT_STORE
    raw = unscaled_fixing_matrix(p)
    prim = raw.primitive_part()
    candidates = []
    if prim.det > 1:
        candidates.append((prim, prim.det))
    if raw.content > 1:
        candidates.append((raw, raw.det))
    residuals = {}
    with mpmath.workprec(prec + GUARD_BITS):
        j = value("j", p.tau(), prec)
        for m, d in candidates:
            try:
                r = diagonal_residual(store.get(d), j)
            except LevelUnavailable as exc:
                residuals[d] = type(exc).__name__
                continue
            residuals[d] = r
            if r < LEVEL_TOL:
                return LevelChoice(p, m, d, True, residuals)
    m, d = candidates[0]
    return LevelChoice(p, m, d, False, residuals)


def uses_q_formula(d: int) -> bool:
    """True when d = 3 k^2 with k odd."""
    if d % 3:
        return False
    k2 = d // 3
    k = isqrt(k2)
    return k * k == k2 and k % 2 == 1


# ---------------------------------------------------------------------------
# Taylor coefficients
# ---------------------------------------------------------------------------


@dataclass
class BetaTable:
    d: int
    center: object
    max_order: int
    entries: dict

    def __getitem__(self, ik):
        return self.entries.get(tuple(ik), 0)

    @property
    def exact(self) -> bool:
        return is_rational(self.center)


def beta_table(d: int, j0, max_order: int = 4, store: PolynomialStore | None = None,
               phi: BiPolynomial | None = None) -> BetaTable:
    """Taylor coefficients of Phi_d about (j0, j0), for 0 < i + k <= max_order.

    Exact when j0 is rational, otherwise in mpmath at the current precision.
    """
    if max_order < 4:
        raise ValueError("max_order must be at least 4")
    phi = phi if phi is not None else (store or DEFAULT_STORE).get(d)
    exact = is_rational(j0)
    if exact:
        center = mpq(j0) if not isinstance(j0, Fraction) else mpq(j0.numerator, j0.denominator)
        to_num = lambda c: c  # noqa: E731
    else:
        center = j0
        to_num = lambda c: mpmath.mpf(c.numerator) / c.denominator  # noqa: E731
    top = max(phi.degree(0), phi.degree(1)) * 2
    powers = [mpq(1) if exact else mpmath.mpf(1)]
    for _ in range(top):
        powers.append(powers[-1] * center)
    entries = {}
    for i in range(max_order + 1):
        for k in range(max_order + 1 - i):
            if (i, k) == (0, 0):
                continue
            s = mpq(0) if exact else mpmath.mpf(0)
            for (a, b), c in phi.terms.items():
                if a >= i and b >= k:
                    s += to_num(c) * comb(a, i) * comb(b, k) * powers[a - i + b - k]
            entries[(i, k)] = s
    return BetaTable(d, center, max_order, entries)


# ---------------------------------------------------------------------------
# Masser's formulas
# ---------------------------------------------------------------------------


def masser_p(j, beta: BetaTable):
    """The p-formula as printed: 9j(b20 - b11 + b02)/b01 + 3(7j - 6912)/(2(j - 1728))."""
    s = beta[2, 0] - beta[1, 1] + beta[0, 2]
    return 9 * j * s / beta[0, 1] + 3 * (7 * j - 6912) / (2 * (j - 1728))


def masser_q(j, beta: BetaTable, denominator=None):
    """The q-formula with the alternating sum of the order-4 coefficients.

    As printed the denominator is b01.  On the levels d = 3k^2 where this
    formula applies, the diagonal point is a triple point of Phi_d and b01
    vanishes; there the value matching E2* E4 / E6 uses 3 b03 instead.
    """
    s = beta[4, 0] - beta[3, 1] + beta[2, 2] - beta[1, 3] + beta[0, 4]
    den = beta[0, 1] if denominator is None else denominator
    return 9 * j * s / den + 3 * (7 * j - 6912) / (2 * (j - 1728))


# The printed formulas are normalized as 3/2 psi (checked against E2* E4 / E6
# at D = -7, -8, -11, -15, -19); masser_psi rescales to psi itself.
PSI_SCALE = Fraction(2, 3)


def direct_psi(tau, prec: int = DEFAULT_PREC):
    """psi = E2* E4 / E6 evaluated through numeval."""
    with mpmath.workprec(prec + GUARD_BITS):
        return value("E2star", tau, prec) * value("E4", tau, prec) / value("E6", tau, prec)


@dataclass
class MasserResult:
    psi: ComplexHP
    level: int
    formula: str
    j: object
    beta01: object


def masser_evaluate(p: QuadraticPoint, prec: int = DEFAULT_PREC, store: PolynomialStore | None = None) -> MasserResult:
    with mpmath.workprec(prec + GUARD_BITS):
        tol = mpmath.mpf(2) ** (-prec // 2)
        j = value("j", p.tau(), prec)
        if abs(j - 1728) < tol * 1728:
            raise FormulaPole(f"j{p} = 1728: the formula has a pole at j = 1728")
        if abs(j) < tol:
            raise SmallDenominator(
                f"j{p} = 0: the Taylor-coefficient formula divides by j'(tau), which vanishes there")
        choice = select_level(p, prec, store)
        phi = (store or DEFAULT_STORE).get(choice.level)
        # the Taylor shift cancels down from the largest monomial of Phi_d(j, j)
        _, size = phi.evaluate((j, j))
        extra = max(0, int(mpmath.log(max(size, 1), 2))) + 32
    work = prec + GUARD_BITS + extra
    with mpmath.workprec(work):
        j = value("j", p.tau(), work)
        beta = beta_table(choice.level, j, 4, phi=phi)
        scale = max(abs(v) for v in beta.entries.values())
        small = abs(beta[0, 1]) < tol * scale
        if uses_q_formula(choice.level):
            if not small:
                raw, name = masser_q(j, beta), "q"
            elif abs(beta[0, 3]) >= tol * scale:
                raw, name = masser_q(j, beta, 3 * beta[0, 3]), "q (3 b03 denominator)"
            else:
                raise SmallDenominator(f"beta_01 and beta_03 vanish at level {choice.level}")
        else:
            if small:
                raise SmallDenominator(f"beta_01 vanishes at level {choice.level}")
            raw, name = masser_p(j, beta), "p"
        psi = raw * mpmath.mpf(PSI_SCALE.numerator) / PSI_SCALE.denominator
        return MasserResult(ComplexHP(psi, prec), choice.level, name, j, beta[0, 1])


def masser_psi(p: QuadraticPoint, prec: int = DEFAULT_PREC, store: PolynomialStore | None = None) -> ComplexHP:
    return masser_evaluate(p, prec, store).psi


# ---------------------------------------------------------------------------
# The bridge chi* = psi (j - 1728)
# ---------------------------------------------------------------------------


@dataclass
class BridgeCertificate:
    series_ok: bool
    max_residual: object
    samples: int
    seed: int

    @property
    def ok(self) -> bool:
        return self.series_ok and self.max_residual < mpmath.mpf("1e-25")


def bridge_series_identity(T: int = 30) -> bool:
    """Exact q-series check: (j - 1728) Delta = E6^2 and chi* Delta = (E2 - Y) E4 E6."""
    E2, E4, E6 = (modforms.qexp(n, T + 4) for n in ("E2", "E4", "E6"))
    delta = modforms.qexp("Delta", T + 4)
    j = modforms.qexp("j", T + 4)
    if not ((j - 1728) * delta).agrees_with(E6 * E6):
        return False
    chi_star = modforms.derived_qexp("chi_star", T + 4).series
    E2star = AhmSeries([E2, PuiseuxSeries.monomial(0, -1, truncation=T + 4)])
    lhs = chi_star * AhmSeries([delta])
    rhs = E2star * AhmSeries([E4 * E6])
    return all(lhs.coefficient(k).agrees_with(rhs.coefficient(k)) for k in range(2))


def non_cm_point(rng: random.Random):
    """Point x + i y with x rational and y = r e / 2, so tau is not quadratic."""
    x, y = sample_box_point(rng)
    xr = mpmath.mpf(x.numerator) / x.denominator
    yr = mpmath.mpf(y.numerator) / y.denominator * mpmath.e / 2
    if xr * xr + yr * yr <= 1:
        yr += 1
    return mpmath.mpc(xr, yr)


def certify_bridge(samples: int = 20, prec: int = 256, seed: int = 0, T: int = 30) -> BridgeCertificate:
    rng = random.Random(seed)
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec + GUARD_BITS):
        for _ in range(samples):
            tau = non_cm_point(rng)
            lhs = value("chi_star", tau, prec)
            rhs = direct_psi(tau, prec) * (value("j", tau, prec) - 1728)
            worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
    return BridgeCertificate(bridge_series_identity(T), worst, samples, seed)


_bridge_ok: bool | None = None


def _ensure_bridge():
    global _bridge_ok
    if _bridge_ok is None:
        _bridge_ok = certify_bridge(samples=4, prec=192).ok
    if not _bridge_ok:
        raise AssertionError("the identity chi* = psi (j - 1728) failed certification")  # pragma: no cover


def chi_star_cm(p: QuadraticPoint, prec: int = DEFAULT_PREC, store: PolynomialStore | None = None) -> ComplexHP:
    """chi*(tau_p) = psi(tau_p) (j(tau_p) - 1728) with psi from Masser's formula."""
    _ensure_bridge()
    res = masser_evaluate(p, prec, store)
    with mpmath.workprec(prec + GUARD_BITS):
        return ComplexHP(res.psi.value * (res.j - 1728), prec)


# ---------------------------------------------------------------------------
# Galois orbits
# ---------------------------------------------------------------------------


def elementary_symmetric(values):
    e = [mpmath.mpc(1)]
    for v in values:
        e = [mpmath.mpc(1)] + [e[k] + v * e[k - 1] for k in range(1, len(e))] + [v * e[-1]]
    return e[1:]


def reconstruct_rational(x, bound: int = RECON_BOUND, tol=None):
    """p/q with q <= bound and |x - p/q| < tol (default 2^(-prec/2)); else ReconstructionFailed."""
    tol = tol if tol is not None else mpmath.mpf(2) ** (-mpmath.mp.prec // 2)
    if abs(mpmath.im(x)) > tol * max(1, abs(x)):
        raise ReconstructionFailed(f"value {mpmath.nstr(x, 10)} is not real")
    re_part = mpmath.re(x)
    num, den = mpmath.libmp.to_rational(mpmath.mpf(re_part)._mpf_)
    exact = Fraction(int(num), int(den))
    cand = exact.limit_denominator(bound)
    err = abs(re_part - mpmath.mpf(cand.numerator) / cand.denominator)
    if err > tol * max(1, abs(re_part)):
        raise ReconstructionFailed(
            f"no fraction with denominator <= {bound} within {mpmath.nstr(tol, 3)} of {mpmath.nstr(re_part, 20)}")
    return cand, err


@dataclass
class PointReport:
    form: QuadraticPoint
    j: object
    chi_star: object
    level: int | None
    masser_status: str
    masser_error: object = None
    psi_direct: object = None
    psi_masser: object = None


@dataclass
class GaloisReport:
    D: int
    prec: int
    points: list
    j_symmetric: list  # (value, nearest integer, distance)
    chi_symmetric: list  # (value, Fraction or None, error or failure text)

    @property
    def j_integral(self) -> bool:
        return all(dist < INTEGRALITY_TOL for _, _, dist in self.j_symmetric)

    @property
    def chi_rational(self) -> bool:
        return all(fr is not None for _, fr, _ in self.chi_symmetric)

    def masser_ok(self, tol=mpmath.mpf("1e-12")) -> bool:
        return all(pt.masser_error < tol for pt in self.points if pt.masser_error is not None)

    def lines(self):
        out = [f"D = {self.D}", f"class_number = {len(self.points)}"]
        for pt in self.points:
            out.append(f"form {pt.form}: j = {mpmath.nstr(pt.j, 30)}")
            out.append(f"form {pt.form}: chi_star = {mpmath.nstr(pt.chi_star, 30)}")
            out.append(f"form {pt.form}: level = {pt.level}")
            if pt.masser_error is not None:
                out.append(f"form {pt.form}: masser_vs_direct_psi = {mpmath.nstr(pt.masser_error, 5)}")
            else:
                out.append(f"form {pt.form}: masser = {pt.masser_status}")
        for k, (v, n, dist) in enumerate(self.j_symmetric, start=1):
            out.append(f"j_e{k} = {n} (distance {mpmath.nstr(dist, 5)})")
        for k, (v, fr, info) in enumerate(self.chi_symmetric, start=1):
            if fr is None:
                out.append(f"chi_star_e{k} = {mpmath.nstr(v, 30)} (ReconstructionFailed: {info})")
            else:
                out.append(f"chi_star_e{k} = {fr} (error {mpmath.nstr(info, 5)})")
        out.append(f"j_symmetric_integral = {'PASS' if self.j_integral else 'FAIL'}")
        out.append(f"chi_star_symmetric_rational = {'PASS' if self.chi_rational else 'REPORTED'}")
        out.append(f"masser_agreement = {'PASS' if self.masser_ok() else 'FAIL'}")
        return out


def galois_orbit_check(D: int, prec: int = DEFAULT_PREC, store: PolynomialStore | None = None) -> GaloisReport:
    forms = reduced_forms(D)
    points = []
    with mpmath.workprec(prec + GUARD_BITS):
        for p in forms:
            tau = p.tau()
            j = value("j", tau, prec)
            cs = value("chi_star", tau, prec)
            pr = PointReport(p, j, cs, None, "")
            try:
                res = masser_evaluate(p, prec, store)
                pr.level = res.level
                pr.psi_masser = res.psi.value
                pr.psi_direct = direct_psi(tau, prec)
                pr.masser_error = abs(pr.psi_masser - pr.psi_direct) / max(1, abs(pr.psi_direct))
                pr.masser_status = f"formula {res.formula}"
            except (FormulaPole, SmallDenominator, LevelUnavailable) as exc:
                pr.masser_status = type(exc).__name__
                try:
                    pr.level = select_level(p, prec, store).level
                except LevelUnavailable:
                    pass
            points.append(pr)
        j_sym = []
        for v in elementary_symmetric([pt.j for pt in points]):
            n = int(mpmath.nint(mpmath.re(v)))
            j_sym.append((v, n, abs(v - n)))
        chi_sym = []
        for v in elementary_symmetric([pt.chi_star for pt in points]):
            try:
                fr, err = reconstruct_rational(v)
                chi_sym.append((v, fr, err))
            except ReconstructionFailed as exc:
                chi_sym.append((v, None, str(exc)))
    return GaloisReport(D, prec, points, j_sym, chi_sym)

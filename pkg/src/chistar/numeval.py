"""High-precision evaluation of E2, E4, E6, E2*, Delta, j, f, chi, chi* and
residual checks of the identities and transformation laws.

Evaluation reduces tau to the fundamental domain, sums q-series there
(|q| <= exp(-pi sqrt 3)) and transports back with the exact transformation
laws.  ``direct_forms`` sums the series at the given point without any
reduction and is used as an independent path by the verification routines.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError
from .hecke import GL2Matrix, enumerate_DN, random_sl2, reduce_fundamental
from .hpcomplex import ComplexHP, parse_tau

GUARD_BITS = 20
DEFAULT_PREC = 256
DEFAULT_SEED = 0
FAIL_TOL = mpmath.mpf("1e-5")
DEMO_AGREEMENT = mpmath.mpf("1e-25")
DEMO_SEPARATION = mpmath.mpf("1e-3")
FUNCTIONS = ("E2", "E4", "E6", "E2star", "Delta", "j", "f", "chi", "chi_star")


def hold_tol(prec: int):
    return mpmath.mpf(2) ** (-mpmath.mpf(prec) / 3)


@dataclass
class EvalReport:
    value: ComplexHP
    tail_bound: object
    reduced_point: ComplexHP


def _as_mpc(tau):
    if isinstance(tau, ComplexHP):
        return tau.value
    if isinstance(tau, str):
        re_part, im_part = parse_tau(tau)
        return mpmath.mpc(mpmath.mpf(re_part.numerator) / re_part.denominator,
                          mpmath.mpf(im_part.numerator) / im_part.denominator)
    if isinstance(tau, tuple):
        re_part, im_part = (Fraction(x) for x in tau)
        return mpmath.mpc(mpmath.mpf(re_part.numerator) / re_part.denominator,
                          mpmath.mpf(im_part.numerator) / im_part.denominator)
    return mpmath.mpc(tau)


def _eisenstein_sums(q, eps):
    """(E2, E4, E6, number of terms, |last omitted term| bound) at nome q."""
    aq = abs(q)
    if aq >= 1:
        raise DomainError("|q| >= 1")
    s1 = s3 = s5 = mpmath.mpc(0)
    qm = mpmath.mpc(1)
    m = 0
    peak = 5 / (-mpmath.log(aq)) if aq > 0 else 0
    while True:
        m += 1
        qm *= q
        r = qm / (1 - qm)
        s1 += m * r
        m2 = m * m
        s3 += m2 * m * r
        s5 += m2 * m2 * m * r
        bound = mpmath.mpf(m) ** 5 * abs(qm)
        if m > peak and bound < eps:
            break
    E2 = 1 - 24 * s1
    E4 = 1 + 240 * s3
    E6 = 1 - 504 * s5
    tail = 504 * (mpmath.mpf(m + 1) ** 5) * aq ** (m + 1) / (1 - aq)
    return E2, E4, E6, m, tail


def _eta_product(q, eps):
    """prod_{n>=1} (1 - q^n) via the pentagonal-number series."""
    total = mpmath.mpc(1)
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        t = q ** e1 + q ** e2
        total += -t if k % 2 else t
        if abs(q) ** e1 < eps:
            break
        k += 1
    return total


@dataclass
class _Forms:
    E2: object
    E4: object
    E6: object
    Delta: object
    y: object
    tail: object


def _forms_at_reduced(z, wp):
    eps = mpmath.mpf(2) ** (-wp)
    q = mpmath.expjpi(2 * z)
    E2, E4, E6, _, tail = _eisenstein_sums(q, eps)
    delta = q * _eta_product(q, eps) ** 24
    return _Forms(E2, E4, E6, delta, z.imag, tail)


def _derived(name, F: _Forms, pi):
    if name == "E2":
        return F.E2
    if name == "E4":
        return F.E4
    if name == "E6":
        return F.E6
    if name == "Delta":
        return F.Delta
    if name == "E2star":
        return F.E2 - 3 / (pi * F.y)
    if name == "j":
        return F.E4 ** 3 / F.Delta
    f = F.E4 * F.E6 / F.Delta
    if name == "f":
        return f
    if name == "chi":
        return F.E2 * f
    if name == "chi_star":
        return (F.E2 - 3 / (pi * F.y)) * f
    raise ValueError(f"unknown function {name!r}")


def _reduce_and_sum(tau, prec):
    """Reduced point z, the cocycle (c, c z + d) of gamma^-1 at z, and forms at z."""
    wp = prec + GUARD_BITS
    t = _as_mpc(tau)
    if t.imag <= 0:
        raise DomainError("point is not in the upper half-plane")
    z, gamma = reduce_fundamental(t)
    # tau = gamma^-1 z and gamma^-1 = (d, -b; -c, a)
    c = -gamma.c
    J = c * z + gamma.a
    return t, z, c, J, _forms_at_reduced(z, wp)


def eval_forms(tau, prec: int = DEFAULT_PREC):
    """E2, E4, E6, Delta at tau (reduced, summed, transported back)."""
    with mpmath.workprec(prec + GUARD_BITS):
        t, z, c, J, F = _reduce_and_sum(tau, prec)
        J2 = J * J
        E2 = J2 * F.E2 - (6j / mpmath.pi) * c * J
        return _Forms(E2, J2 * J2 * F.E4, J2 * J2 * J2 * F.E6, J2 ** 6 * F.Delta, t.imag,
                      F.tail * max(1, abs(J) ** 12))


def eval_fn(name: str, tau, prec: int = DEFAULT_PREC) -> EvalReport:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}; choose from {', '.join(FUNCTIONS)}")
    with mpmath.workprec(prec + GUARD_BITS):
        t, z, c, J, F = _reduce_and_sum(tau, prec)
        pi = mpmath.pi
        J2 = J * J
        at_z = _derived(name, F, pi)
        if name in ("j", "chi_star"):
            val = at_z  # invariant
        elif name == "f":
            val = at_z / J2
        elif name in ("E2star",):
            val = J2 * at_z
        elif name == "E4":
            val = J2 * J2 * at_z
        elif name == "E6":
            val = J2 * J2 * J2 * at_z
        elif name == "Delta":
            val = J2 ** 6 * at_z
        elif name == "E2":
            val = J2 * at_z - (6j / pi) * c * J
        else:  # chi
            val = at_z - (6j / pi) * (c / J) * _derived("f", F, pi)
        tail = F.tail * max(1, abs(J) ** 12)
    return EvalReport(ComplexHP(val, prec), tail, ComplexHP(z, prec))


def value(name: str, tau, prec: int = DEFAULT_PREC):
    """The mpc value of eval_fn (at the caller's working precision)."""
    return eval_fn(name, tau, prec).value.value


def direct_forms(tau, prec: int = DEFAULT_PREC):
    """(E2, E4, E6) by summing the q-series at tau itself, without reduction."""
    with mpmath.workprec(prec + GUARD_BITS):
        t = _as_mpc(tau)
        y = t.imag
        if y <= 0:
            raise DomainError("point is not in the upper half-plane")
        # the largest term is about (5 / (2 pi e y))^5; pay for it in guard bits
        extra = int(5 * max(0, mpmath.log(1 + 1 / y, 2))) + 16
    wp = prec + GUARD_BITS + extra
    with mpmath.workprec(wp):
        t = _as_mpc(tau)
        q = mpmath.expjpi(2 * t)
        E2, E4, E6, _, _ = _eisenstein_sums(q, mpmath.mpf(2) ** (-wp))
        return E2, E4, E6


def direct_value(name: str, tau, prec: int = DEFAULT_PREC):
    E2, E4, E6 = direct_forms(tau, prec)
    with mpmath.workprec(prec + GUARD_BITS):
        t = _as_mpc(tau)
        F = _Forms(E2, E4, E6, (E4 ** 3 - E6 ** 2) / 1728, t.imag, 0)
        return _derived(name, F, mpmath.pi)


def _relative(a, b):
    scale = max(mpmath.mpf(1), abs(a), abs(b))
    return abs(a - b) / scale


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_box_point(rng: random.Random) -> tuple[Fraction, Fraction]:
    """Exact rational point in a box inside the fundamental domain."""
    while True:
        x = Fraction(rng.randint(-500, 500), 1000)
        y = Fraction(rng.randint(900, 1600), 1000)
        if x * x + y * y > 1:
            return x, y


def sample_points(count: int, seed: int = DEFAULT_SEED):
    rng = random.Random(seed)
    return [sample_box_point(rng) for _ in range(count)]


def _point(xy):
    x, y = xy
    return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator, mpmath.mpf(y.numerator) / y.denominator)


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


@dataclass
class ResidualReport:
    max_residual: object
    residuals: list = field(default_factory=list)
    details: list = field(default_factory=list)
    seed: int = DEFAULT_SEED
    prec: int = DEFAULT_PREC

    @property
    def min_residual(self):
        return min(self.residuals) if self.residuals else mpmath.mpf(0)


def psi_residual(psi, g: GL2Matrix, tau, prec: int = DEFAULT_PREC):
    """|Psi(chi*(g tau), j(tau), chi*(tau))| normalized by the largest monomial."""
    with mpmath.workprec(prec + GUARD_BITS):
        t = _as_mpc(tau)
        X = value("chi_star", g.act(t), prec)
        Y = value("j", t, prec)
        Z = value("chi_star", t, prec)
        return psi.normalized_residual((X, Y, Z))


def certification_matrices(N: int, twists: int, rng: random.Random):
    """All of D_N plus ``twists`` matrices gamma * g' with random gamma in SL2(Z)."""
    mats = list(enumerate_DN(N))
    reps = enumerate_DN(N)
    for _ in range(twists):
        mats.append(random_sl2(rng, 5) * rng.choice(reps))
    return mats


def verify_psi_identity(psi, N: int, samples: int = 10, prec: int = DEFAULT_PREC,
                        seed: int = DEFAULT_SEED, twists: int = 5) -> ResidualReport:
    rng = random.Random(seed)
    points = [sample_box_point(rng) for _ in range(samples)]
    mats = certification_matrices(N, twists, rng)
    report = ResidualReport(mpmath.mpf(0), seed=seed, prec=prec)
    with mpmath.workprec(prec + GUARD_BITS):
        for xy in points:
            tau = _point(xy)
            for g in mats:
                r = psi_residual(psi, g, tau, prec)
                report.residuals.append(r)
                report.details.append((xy, g, r))
        report.max_residual = max(report.residuals) if report.residuals else mpmath.mpf(0)
    return report


def chi_residual(psi, g: GL2Matrix, tau, prec: int = DEFAULT_PREC):
    """|Psi(chi(g tau), j(tau), chi(tau))| normalized by the largest monomial."""
    with mpmath.workprec(prec + GUARD_BITS):
        t = _as_mpc(tau)
        X = value("chi", g.act(t), prec)
        Y = value("j", t, prec)
        Z = value("chi", t, prec)
        return psi.normalized_residual((X, Y, Z))


@dataclass
class ChiVerdict:
    report: ResidualReport
    verdict: str
    hold_tol: object
    fail_tol: object

    @property
    def failing_count(self) -> int:
        return sum(1 for r in self.report.residuals if r > self.fail_tol)


def verify_chi_identity(psi, N: int, g: GL2Matrix, samples: int = 10, prec: int = DEFAULT_PREC,
                        seed: int = DEFAULT_SEED) -> ChiVerdict:
    if g.det != N:
        raise ValueError(f"matrix {g} does not have determinant {N}")
    report = ResidualReport(mpmath.mpf(0), seed=seed, prec=prec)
    with mpmath.workprec(prec + GUARD_BITS):
        for xy in sample_points(samples, seed):
            r = chi_residual(psi, g, _point(xy), prec)
            report.residuals.append(r)
            report.details.append((xy, g, r))
        report.max_residual = max(report.residuals)
        ht = hold_tol(prec)
        if report.max_residual < ht:
            verdict = "HOLDS"
        elif report.min_residual > FAIL_TOL:
            verdict = "FAILS"
        else:
            verdict = "INDETERMINATE"
    return ChiVerdict(report, verdict, ht, FAIL_TOL)


@dataclass
class LawReport:
    E2: object
    E2star: object
    chi: object
    samples: int
    seed: int
    prec: int

    @property
    def max_residual(self):
        return max(self.E2, self.E2star, self.chi)

    def lines(self):
        return [f"samples = {self.samples}", f"seed = {self.seed}", f"prec = {self.prec}",
                f"E2_law_residual = {mpmath.nstr(self.E2, 5)}",
                f"E2star_law_residual = {mpmath.nstr(self.E2star, 5)}",
                f"chi_law_residual = {mpmath.nstr(self.chi, 5)}"]


def law_residuals(gamma: GL2Matrix, tau, prec: int = DEFAULT_PREC):
    """Residuals of the E2, E2* and chi laws at (gamma, tau).

    Both sides are summed directly from q-series: the left side at gamma tau
    and the right side at tau, with no fundamental-domain reduction.
    """
    with mpmath.workprec(prec + GUARD_BITS):
        t = _as_mpc(tau)
        gt = gamma.act(t)
        c, d = gamma.c, gamma.d
        J = c * t + d
        pi = mpmath.pi
        E2_l, E4_l, E6_l = direct_forms(gt, prec)
        E2_r, E4_r, E6_r = direct_forms(t, prec)
        e2 = _relative(E2_l, J * J * E2_r - (6j / pi) * c * J)
        star_l = E2_l - 3 / (pi * gt.imag)
        star_r = E2_r - 3 / (pi * t.imag)
        e2s = _relative(star_l, J * J * star_r)
        f_l = E4_l * E6_l * 1728 / (E4_l ** 3 - E6_l ** 2)
        f_r = E4_r * E6_r * 1728 / (E4_r ** 3 - E6_r ** 2)
        chi_l = E2_l * f_l
        chi_r = E2_r * f_r - (6j / pi) * (c / J) * f_r
        ch = _relative(chi_l, chi_r)
        return e2, e2s, ch


def verify_transformation_laws(samples: int = 20, prec: int = DEFAULT_PREC,
                               seed: int = DEFAULT_SEED, bound: int = 20) -> LawReport:
    rng = random.Random(seed)
    worst = [mpmath.mpf(0)] * 3
    with mpmath.workprec(prec + GUARD_BITS):
        for _ in range(samples):
            gamma = random_sl2(rng, bound)
            tau = _point(sample_box_point(rng))
            for i, r in enumerate(law_residuals(gamma, tau, prec)):
                worst[i] = max(worst[i], r)
    return LawReport(worst[0], worst[1], worst[2], samples, seed, prec)


@dataclass
class DemoReport:
    N: int
    values: list  # (n, formula value, direct value)
    max_disagreement: object
    min_separation: object
    f_at_i_over_N: object

    @property
    def ok(self) -> bool:
        return self.max_disagreement < DEMO_AGREEMENT and self.min_separation > DEMO_SEPARATION

    def lines(self):
        out = [f"N = {self.N}"]
        for n, a, b in self.values:
            out.append(f"n = {n}: formula = {mpmath.nstr(a, 25)}; direct = {mpmath.nstr(b, 25)}")
        out += [f"max_disagreement = {mpmath.nstr(self.max_disagreement, 5)}",
                f"min_separation = {mpmath.nstr(self.min_separation, 5)}",
                f"abs_f_at_i_over_N = {mpmath.nstr(self.f_at_i_over_N, 10)}"]
        return out


def infinite_values_demo(N: int, n_max: int = 10, prec: int = DEFAULT_PREC) -> DemoReport:
    """chi(g(gamma_n i)) for g = (N,0;0,1), gamma_n = (1,-1;1-nN,nN), n = 1..n_max.

    One path uses chi(g gamma_n tau) = chi(tau/N) - (6i/pi) c/(c tau/N + n) f(tau/N)
    with c = 1 - nN; the other evaluates chi at the point g(gamma_n i) itself.
    """
    if N < 2 or n_max < 2:
        raise ValueError("need N >= 2 and n_max >= 2")
    g = GL2Matrix(N, 0, 0, 1)
    values = []
    with mpmath.workprec(prec + GUARD_BITS):
        tau = mpmath.mpc(0, 1)
        s = tau / N
        chi_s = value("chi", s, prec)
        f_s = value("f", s, prec)
        for n in range(1, n_max + 1):
            c = 1 - n * N
            formula = chi_s - (6j / mpmath.pi) * (c / (c * s + n)) * f_s
            gamma_n = GL2Matrix(1, -1, 1 - n * N, n * N)
            direct = value("chi", g.act(gamma_n.act(tau)), prec)
            values.append((n, formula, direct))
        disagreement = max(abs(a - b) for _, a, b in values)
        sep = min(abs(values[i][1] - values[k][1])
                  for i in range(len(values)) for k in range(i + 1, len(values)))
    return DemoReport(N, values, disagreement, sep, abs(f_s))

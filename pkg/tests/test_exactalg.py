import cmath
import random
from fractions import Fraction

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from chistar.errors import NotInSubfield
from chistar.exactalg import (
    QQ, CycloElement, LinearSystem, QPolynomial, convolve, cyclo_reduce, cyclotomic_polynomial,
    divisors, euler_phi, first_free_solution, first_free_solution_exact, nullspace, rank,
    rational_reconstruction,
)

small_rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)


def naive_convolve(a, b, n):
    out = [mpq(0)] * n
    for i, x in enumerate(a):
        for k, y in enumerate(b):
            if i + k < n:
                out[i + k] += x * y
    return out


@settings(max_examples=60, deadline=None)
@given(st.lists(small_rationals, min_size=1, max_size=40), st.lists(small_rationals, min_size=1, max_size=40))
def test_convolve_matches_schoolbook(a, b):
    a, b = [QQ(x) for x in a], [QQ(x) for x in b]
    n = len(a) + len(b) - 1
    assert convolve(a, b, n) == naive_convolve(a, b, n)


def test_convolve_large_integers():
    rng = random.Random(1)
    a = [mpq(rng.randint(-10 ** 40, 10 ** 40)) for _ in range(70)]
    b = [mpq(rng.randint(-10 ** 5, 10 ** 5), rng.randint(1, 99)) for _ in range(50)]
    assert convolve(a, b, 90) == naive_convolve(a, b, 90)


@settings(max_examples=40, deadline=None)
@given(small_rationals, small_rationals, small_rationals, small_rationals)
def test_rational_arithmetic_is_exact(a, b, c, d):
    if b == 0 or d == 0:
        return
    x, y = QQ(a) / QQ(b), QQ(c) / QQ(d)
    assert (x + y) * QQ(b) * QQ(d) == QQ(a) * QQ(d) + QQ(c) * QQ(b)


def test_qq_coercions():
    assert QQ("-3/4") == mpq(-3, 4)
    assert QQ(Fraction(5, 6)) == mpq(5, 6)


@pytest.mark.parametrize("d, expected", [(1, [-1, 1]), (4, [1, 0, 1]), (6, [1, -1, 1])])
def test_cyclotomic_small(d, expected):
    assert cyclotomic_polynomial(d) == QPolynomial(expected)


@pytest.mark.parametrize("d", range(1, 40))
def test_cyclotomic_against_sympy(d):
    x = sympy.Symbol("x")
    ref = [int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(d, x), x).all_coeffs())]
    assert cyclotomic_polynomial(d) == QPolynomial(ref)
    assert cyclotomic_polynomial(d).degree == euler_phi(d)


def test_divisors():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(1) == [1]


def test_qpolynomial_division_and_gcd():
    x = QPolynomial.x()
    f = (x - 1) * (x + 2) ** 2
    g = (x + 2) * (x - 3)
    q, r = divmod(f, g)
    assert q * g + r == f
    assert f.gcd(g) == x + 2
    h, s, t = f.xgcd(g)
    assert s * f + t * g == h


def test_cyclo_spec_examples():
    assert cyclo_reduce(CycloElement.zeta(4) ** 2) == mpq(-1)
    z6 = CycloElement.zeta(6)
    assert cyclo_reduce(z6 + z6 ** 5) == mpq(1)
    with pytest.raises(NotInSubfield):
        cyclo_reduce(CycloElement.zeta(4), 1)


def test_cyclo_subfield_descent():
    # zeta_12^3 = i lies in Q(zeta_4)
    e = cyclo_reduce(CycloElement.zeta(12, 3), 4)
    assert e == CycloElement.zeta(4)


@pytest.mark.parametrize("order", [3, 5, 7, 8, 12, 15])
def test_cyclo_field_inverse_and_numerics(order):
    rng = random.Random(order)
    for _ in range(5):
        coeffs = [mpq(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(euler_phi(order))]
        e = CycloElement(order, coeffs)
        if not e:
            continue
        assert e * e.inverse() == CycloElement.from_rational(order, 1)
        z = cmath.exp(2j * cmath.pi / order)
        ref = sum(complex(float(c)) * z ** k for k, c in enumerate(coeffs))
        assert abs(complex(e.to_complex()) - ref) < 1e-9


def test_nullspace_spec_examples():
    assert nullspace(LinearSystem([[1, -1]], 2)) == [[1, 1]]
    assert nullspace(LinearSystem([[1, 0], [0, 1]], 2)) == []
    basis = nullspace(LinearSystem([[2, 4, 6]], 3))
    assert len(basis) == 2
    for v in basis:
        assert 2 * v[0] + 4 * v[1] + 6 * v[2] == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.integers(min_value=2, max_value=7), st.randoms(use_true_random=False))
def test_nullspace_matches_sympy(m, n, rnd):
    rows = [[mpq(rnd.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
    basis = nullspace(LinearSystem(rows, n))
    ref = sympy.Matrix([[int(x) for x in r] for r in rows])
    assert len(basis) == n - ref.rank()
    for v in basis:
        assert all(sum(r[k] * v[k] for k in range(n)) == 0 for r in rows)
    if basis:
        assert rank(basis, n) == len(basis)


def test_rational_reconstruction():
    m = 10 ** 9 + 7
    a = (-17 * pow(23, -1, m)) % m
    assert rational_reconstruction(a, m) == mpq(-17, 23)


def test_first_free_solution_agrees_with_exact():
    rng = random.Random(5)
    for trial in range(20):
        ncols = rng.randint(3, 9)
        nrows = rng.randint(ncols - 2, ncols + 3)
        # plant a solution so the nullspace is nontrivial
        sol = [rng.randint(-9, 9) for _ in range(ncols)]
        rows = []
        for _ in range(nrows):
            r = [rng.randint(-20, 20) for _ in range(ncols - 1)]
            last = sum(x * y for x, y in zip(r, sol[:-1]))
            if sol[-1] == 0:
                sol[-1] = 1
            if last % sol[-1]:
                r = [x * sol[-1] for x in r]
                last = sum(x * y for x, y in zip(r, sol[:-1]))
            rows.append([mpq(x) for x in r] + [mpq(-last // sol[-1])])
        fast = first_free_solution(rows, ncols)
        slow = first_free_solution_exact(rows, ncols)
        assert fast == slow
        assert all(sum(r[k] * fast[k] for k in range(ncols)) == 0 for r in rows)


def test_first_free_solution_trivial_nullspace():
    assert first_free_solution([[mpq(1), mpq(0)], [mpq(0), mpq(1)]], 2) is None

import random
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from chistar.errors import OutOfTruncation
from chistar.exactalg import CycloElement
from chistar.qseries import AhmSeries, PuiseuxSeries, coefficient_at, substitute_qaction

q = PuiseuxSeries.monomial


def S(coeffs, val=0, ram=1, prec=None):
    return PuiseuxSeries([mpq(c) for c in coeffs], val=val, ram=ram, prec=prec)


def test_multiply_and_add_examples():
    assert (S([1, 1], prec=10) * S([1, -1], prec=10)) == S([1, 0, -1], prec=10)
    a = q(-1, 1, truncation=5)
    assert (a + a).coefficient_at(-1) == 2
    half = q(Fraction(1, 2), 1, truncation=4)
    one = q(0, 1, truncation=4)
    prod = (one + half) * (one - half)
    assert prod.coefficient_at(0) == 1 and prod.coefficient_at(1) == -1
    assert prod.coefficient_at(Fraction(1, 2)) == 0


def test_invert_examples():
    inv = S([1, -1], prec=8).invert()
    assert all(inv.coefficient_at(k) == 1 for k in range(8))
    inv = S([1, 1], val=1, prec=9).invert()
    assert inv.valuation == -1
    assert [inv.coefficient_at(k) for k in range(-1, 4)] == [1, -1, 1, -1, 1]
    assert S([2], prec=5).invert().coefficient_at(0) == mpq(1, 2)


def test_substitute_qaction_examples():
    s = q(1, 1, truncation=6)
    t = substitute_qaction(s, 1, 1, 2)
    assert t.coefficient_at(Fraction(1, 2)) == -1
    y = AhmSeries([S([0], prec=5), S([1], prec=5)])
    scaled = y.substitute_qaction(2, 0, 1)
    assert scaled.coefficient(1).coefficient_at(0) == mpq(1, 2)
    inv = q(-1, 1, truncation=4).substitute_qaction(1, 0, 2)
    assert inv.valuation == Fraction(-1, 2) and inv.coefficient_at(Fraction(-1, 2)) == 1


def test_coefficient_at_examples():
    s = S([1, -24], prec=2)
    assert coefficient_at(s, 1) == -24
    assert coefficient_at(s, Fraction(1, 2)) == 0
    with pytest.raises(OutOfTruncation):
        coefficient_at(s, 5)


series = st.lists(st.integers(min_value=-9, max_value=9), min_size=1, max_size=8)


@settings(max_examples=50, deadline=None)
@given(series, series, series, st.integers(min_value=-2, max_value=2))
def test_ring_laws(a, b, c, v):
    A, B, C = S(a, val=v, prec=v + 10), S(b, prec=10), S(c, val=1, prec=12)
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C


@settings(max_examples=30, deadline=None)
@given(series, series, st.sampled_from([(1, 0, 2), (1, 1, 2), (1, 2, 3), (2, 1, 3), (1, 3, 4)]))
def test_qaction_is_multiplicative(a, b, abd):
    A, B = S(a, val=-1, prec=8), S(b, prec=8)
    lhs = (A * B).substitute_qaction(*abd)
    rhs = A.substitute_qaction(*abd) * B.substitute_qaction(*abd)
    assert lhs == rhs


def test_ramification_keeps_truncation():
    s = PuiseuxSeries([1], val=0, ram=3, prec=8)
    assert s.truncation == Fraction(8, 3)
    assert s.descend().truncation == 3
    assert PuiseuxSeries([1, 0, 0, 5], val=0, ram=3, prec=9).ram == 1


@pytest.mark.parametrize("a, d", [(1, 2), (1, 3), (1, 4), (2, 3)])
def test_symmetrization_cancels_fractional_powers(a, d):
    rng = random.Random(d)
    s = S([rng.randint(-5, 5) for _ in range(10)], val=-1, prec=9)
    prod = None
    for b in range(d):
        t = s.substitute_qaction(a, b, d)
        prod = t if prod is None else prod * t
    assert prod.has_integral_exponents()
    assert prod.is_rational()


def test_cyclotomic_coefficients_and_inverse():
    z = CycloElement.zeta(3)
    s = PuiseuxSeries([mpq(1), z], prec=6)
    one = s * s.invert()
    assert one.coefficient_at(0) == 1
    assert all(one.coefficient_at(k) == 0 for k in range(1, 6))


def test_pow_and_theta():
    s = S([1, 1], prec=6)
    assert s ** 3 == S([1, 3, 3, 1], prec=6)
    assert s ** 0 == S([1], prec=6)
    assert S([5, 2, 3], val=-1, prec=4).theta() == S([-5, 0, 3], val=-1, prec=4)


def test_ahm_arithmetic():
    y = AhmSeries([S([0], prec=6), S([1], prec=6)])
    x = AhmSeries([S([1, 2], prec=6)])
    prod = (x + y) * (x - y)
    assert prod.y_degree == 2
    assert prod.coefficient(2) == S([-1], prec=6)
    assert prod.coefficient(0) == S([1, 4, 4], prec=6)
    assert (y ** 3).y_degree == 3

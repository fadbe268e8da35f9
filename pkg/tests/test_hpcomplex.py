from fractions import Fraction as F

import mpmath
import pytest

from chistar.hpcomplex import ComplexHP, parse_tau


@pytest.mark.parametrize("text, expected", [
    ("i", (F(0), F(1))),
    ("3i", (F(0), F(3))),
    ("2", (F(2), F(0))),
    ("1/10+6i/5", (F(1, 10), F(6, 5))),
    ("1/10+6/5i", (F(1, 10), F(6, 5))),
    ("1/10+6/5*i", (F(1, 10), F(6, 5))),
    ("-1/2+i", (F(-1, 2), F(1))),
    ("-1/2-i/3", (F(-1, 2), F(-1, 3))),
    ("0.1+1.2i", (F(1, 10), F(6, 5))),
    ("1/7 + 9/8i", (F(1, 7), F(9, 8))),
])
def test_parse_tau(text, expected):
    assert parse_tau(text) == expected


@pytest.mark.parametrize("bad", ["", "x+i", "1/0+i", "i+"])
def test_parse_tau_rejects(bad):
    with pytest.raises(ValueError):
        parse_tau(bad)


def test_precision_tracking():
    a = ComplexHP.parse("1/3+i", 128)
    b = ComplexHP.parse("i", 256)
    c = a * b
    assert c.prec == 256
    with mpmath.workprec(256):
        assert abs(c.value - mpmath.mpc(-1, mpmath.mpf(1) / 3)) < mpmath.mpf(2) ** -120
    with pytest.raises(ValueError):
        ComplexHP(1, 32)


def test_format():
    assert ComplexHP.parse("1/2-i", 64).format(5) == "0.5 - 1.0i"

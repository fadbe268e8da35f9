import random

import mpmath
import pytest

from chistar.errors import DomainError
from chistar.hecke import IDENTITY, GL2Matrix, enumerate_DN, random_sl2
from chistar.hpcomplex import ComplexHP
from chistar.modpoly import build_psi
from chistar.numeval import (
    FUNCTIONS, direct_value, eval_fn, hold_tol, infinite_values_demo, law_residuals, psi_residual,
    sample_points, value, verify_chi_identity, verify_psi_identity, verify_transformation_laws,
)

TIGHT = mpmath.mpf("1e-30")


@pytest.fixture(scope="module")
def psi2():
    return build_psi(2)


def test_anchors():
    with mpmath.workprec(160):
        assert abs(value("j", "i", 128) - 1728) < TIGHT
        assert abs(value("chi", "i", 128)) < TIGHT
        assert abs(value("chi_star", "i", 128)) < TIGHT
    with mpmath.workprec(276):
        rho = mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)
        assert abs(value("j", rho, 256)) < TIGHT
        assert abs(value("chi_star", rho, 256)) < TIGHT


def test_rational_point_input():
    r = eval_fn("j", ComplexHP.parse("i", 128), 128)
    assert abs(r.value.value - 1728) < TIGHT
    assert r.tail_bound < TIGHT
    with pytest.raises(ValueError):
        eval_fn("E8", "i")
    with pytest.raises(DomainError):
        value("j", mpmath.mpc(0, -1))


@pytest.mark.parametrize("name", FUNCTIONS)
def test_reduced_and_direct_paths_agree(name):
    with mpmath.workprec(276):
        for xy in sample_points(3, seed=7):
            tau = mpmath.mpc(float(xy[0]), float(xy[1]) / 3)
            a, b = value(name, tau, 256), direct_value(name, tau, 256)
            assert abs(a - b) / max(1, abs(b)) < mpmath.mpf("1e-60")


def test_invariance_and_chi_star_relation():
    rng = random.Random(2)
    with mpmath.workprec(276):
        for xy in sample_points(5, seed=3):
            tau = mpmath.mpc(float(xy[0]), float(xy[1]))
            g = random_sl2(rng, 10)
            gt = g.act(tau)
            assert abs(value("j", gt) - value("j", tau)) / abs(value("j", tau)) < TIGHT
            assert abs(value("chi_star", gt) - value("chi_star", tau)) < TIGHT * max(1, abs(value("chi_star", tau)))
            c, d = g.c, g.d
            defect = value("chi", gt) - value("chi", tau) + (6j / mpmath.pi) * (c / (c * tau + d)) * value("f", tau)
            assert abs(defect) < TIGHT * max(1, abs(value("chi", gt)))
            rel = value("chi", tau) - 3 / (mpmath.pi * tau.imag) * value("f", tau)
            assert abs(rel - value("chi_star", tau)) < TIGHT * max(1, abs(rel))


def test_law_examples():
    with mpmath.workprec(276):
        assert all(r < TIGHT for r in law_residuals(IDENTITY, mpmath.mpc(0.1, 1.1)))
        e2, e2s, chi = law_residuals(GL2Matrix(0, -1, 1, 0), mpmath.mpc(0, 2))
        assert e2 < TIGHT and e2s < TIGHT and chi < TIGHT


def test_law_suite_small():
    r = verify_transformation_laws(samples=4, prec=256, seed=1)
    assert r.max_residual < TIGHT


def test_psi1_identity():
    psi1 = build_psi(1)
    with mpmath.workprec(276):
        assert psi_residual(psi1, IDENTITY, mpmath.mpc(0.2, 1.3)) < TIGHT


def test_psi2_identity_examples(psi2):
    assert psi_residual(psi2, GL2Matrix(1, 1, 0, 2), "1/10+6i/5") < mpmath.mpf("1e-20")
    twisted = GL2Matrix(1, 1, 0, 1) * GL2Matrix(0, -1, 1, 0) * GL2Matrix(2, 0, 0, 1)
    assert psi_residual(psi2, twisted, "1/10+6i/5") < mpmath.mpf("1e-20")


def test_psi2_identity_suite(psi2):
    r = verify_psi_identity(psi2, 2, samples=3, prec=256, seed=4)
    assert r.max_residual < hold_tol(256)
    assert len(r.residuals) == 3 * (3 + 5)


def test_chi_dichotomy(psi2):
    for g in enumerate_DN(2):
        assert verify_chi_identity(psi2, 2, g, samples=3).verdict == "HOLDS"
    v = verify_chi_identity(psi2, 2, GL2Matrix(1, 0, 1, 2), samples=10)
    assert v.verdict == "FAILS" and v.failing_count >= 9
    assert verify_chi_identity(build_psi(1), 1, IDENTITY, samples=3).verdict == "HOLDS"
    with pytest.raises(ValueError):
        verify_chi_identity(psi2, 2, GL2Matrix(1, 0, 0, 3))


def test_infinite_values_demo():
    r = infinite_values_demo(2, 10, 256)
    assert r.max_disagreement < mpmath.mpf("1e-25")
    assert r.min_separation > mpmath.mpf("1e-3")
    assert abs(r.values[0][1] - r.values[1][1]) > mpmath.mpf("1e-3")
    assert r.f_at_i_over_N > 0 and r.ok


def test_hold_tol_and_sampling_determinism():
    assert hold_tol(256) < mpmath.mpf("1e-20")
    assert sample_points(5, 9) == sample_points(5, 9)
    for x, y in sample_points(50, 1):
        assert abs(x) <= 0.5 and x * x + y * y > 1

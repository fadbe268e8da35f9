import random

import mpmath
import pytest
from gmpy2 import mpq

from chistar.errors import LevelUnavailable, ParseError
from chistar.hecke import enumerate_DN
from chistar.modpoly import (
    BiPolynomial, PolynomialStore, RecoveryConfig, TriPolynomial, build_phi, build_psi, format_poly,
    load_poly, parse_poly, psi_coefficients, psi_sanity, save_poly,
)
from chistar.numeval import value

# classical table for the level-2 modular polynomial
PHI2 = {(3, 0): 1, (0, 3): 1, (2, 2): -1, (2, 1): 1488, (1, 2): 1488, (2, 0): -162000,
        (0, 2): -162000, (1, 1): 40773375, (1, 0): 8748000000, (0, 1): 8748000000,
        (0, 0): -157464000000000}


@pytest.fixture(scope="module")
def psi2():
    return build_psi(2)


def test_phi1_phi2():
    assert build_phi(1) == BiPolynomial({(1, 0): 1, (0, 1): -1}, N=1)
    phi2 = build_phi(2)
    assert phi2 == BiPolynomial(PHI2, N=2)
    assert phi2.coefficient(2, 1) == 1488


def test_phi2_double_truncation():
    assert build_phi(2, RecoveryConfig(T=40)) == build_phi(2, RecoveryConfig(T=80))


@pytest.mark.parametrize("N", [2, 3])
def test_phi_product_route_agrees(N):
    assert build_phi(N, method="product") == build_phi(N)


@pytest.mark.parametrize("N", [3, 4, 5, 6, 7])
def test_phi_vanishes_on_orbit(N):
    phi = build_phi(N)
    assert phi == phi.swap(0, 1)
    assert phi.is_integral() and phi.degree(0) == len(enumerate_DN(N))
    rng = random.Random(N)
    with mpmath.workprec(300):
        tau = mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(1.0, 1.4))
        for g in enumerate_DN(N):
            r = phi.normalized_residual((value("j", g.act(tau), 256), value("j", tau, 256)))
            assert r < mpmath.mpf("1e-60")


def test_psi1():
    psi = build_psi(1)
    assert psi == TriPolynomial({(1, 0, 0): 1, (0, 0, 1): -1}, N=1)
    assert format_poly(psi).splitlines()[1:] == ["1 0 0 : 1", "0 0 1 : -1"]
    s = psi_sanity(psi, 1)
    assert s.ok and s.deg_y == 0


def test_psi2_shape(psi2):
    s = psi_sanity(psi2, 2)
    assert s.ok
    assert psi2.degree(0) == 3 and psi2.degree(1) >= 1
    assert psi2.is_integral() and psi2.content() == 1


def test_psi_monic_before_clearing():
    coeffs = psi_coefficients(2, 80)
    assert coeffs[-1] == 1


def test_psi2_double_truncation_and_product_route(psi2):
    assert build_psi(2, RecoveryConfig(T=160)) == psi2
    assert build_psi(2, method="product") == psi2


def test_psi2_exact_solver_agrees(psi2):
    assert build_psi(2, solver="exact") == psi2


def test_psi_escalation_from_tiny_truncation(psi2):
    assert build_psi(2, RecoveryConfig(T=10, max_escalations=4)) == psi2


def test_roundtrip(tmp_path, psi2):
    path = tmp_path / "psi_2.txt"
    save_poly(psi2, path)
    assert load_poly(path) == psi2
    save_poly(psi2, tmp_path / "again.txt")
    assert path.read_bytes() == (tmp_path / "again.txt").read_bytes()


@pytest.mark.parametrize("body", [
    "tripoly N=2\n1 0 : 3\n",
    "tripoly N=2\n1 0 0 3\n",
    "tripoly N=2\n1 0 0 : x\n",
    "tripoly N=2\n1 0 0 : 0\n",
    "tripoly N=2\n1 0 0 : 1\n1 0 0 : 2\n",
    "tripoly N=2\n0 0 1 : 1\n1 0 0 : 2\n",
    "quadpoly N=2\n1 0 0 0 : 1\n",
])
def test_parse_errors(body):
    with pytest.raises(ParseError):
        parse_poly(body)


def test_parse_error_reports_line():
    with pytest.raises(ParseError, match="line 3"):
        parse_poly("tripoly N=2\n1 0 0 : 1\n1 0 : 3\n")


def test_recovery_config_validation():
    with pytest.raises(ValueError):
        RecoveryConfig(T=4)
    with pytest.raises(ValueError):
        RecoveryConfig(B=0)


def test_polynomial_store(tmp_path, psi2):
    save_poly(psi2, tmp_path / "psi_2.txt")
    store = PolynomialStore(tmp_path, build=False)
    assert store.psi(2) == psi2
    with pytest.raises(LevelUnavailable):
        store.phi(5)
    assert PolynomialStore(max_phi_level=3).phi(3).degree(0) == 4
    with pytest.raises(LevelUnavailable):
        PolynomialStore(max_psi_level=1).psi(2)


def test_sparse_polynomial_evaluate():
    p = TriPolynomial({(1, 0, 0): mpq(1, 2), (0, 2, 1): -3}, N=None)
    val, scale = p.evaluate((mpmath.mpf(4), mpmath.mpf(1), mpmath.mpf(2)))
    assert val == -4 and scale == 6

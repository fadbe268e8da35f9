"""Exact q-expansions of E2, E4, E6, Delta, j, f = E4 E6/Delta, chi = E2 f and
chi* = chi - Y f."""

from __future__ import annotations

import threading
from dataclasses import dataclass

from gmpy2 import mpz

from .qseries import AhmSeries, PuiseuxSeries

EISENSTEIN_CONSTANTS = {2: -24, 4: 240, 6: -504}
NAMES = ("E2", "E4", "E6", "Delta", "j", "f", "chi", "chi_star")


def sigma(k: int, n: int) -> int:
    if n < 1:
        raise ValueError("sigma needs n >= 1")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** k
            e = n // d
            if e != d:
                total += e ** k
        d += 1
    return total


def _sigma_table(k: int, T: int) -> list:
    # sieve: out[n] = sigma_k(n) for 1 <= n < T
    out = [mpz(0)] * T
    for d in range(1, T):
        dk = mpz(d) ** k
        for m in range(d, T, d):
            out[m] += dk
    return out


def eisenstein_qexp(k: int, T: int) -> PuiseuxSeries:
    """E_k to truncation T (coefficients of q^0 .. q^(T-1))."""
    if k not in EISENSTEIN_CONSTANTS:
        raise ValueError("k must be 2, 4 or 6")
    if T < 1:
        raise ValueError("truncation must be >= 1")
    c = EISENSTEIN_CONSTANTS[k]
    table = _sigma_table(k - 1, T)
    coeffs = [mpz(1)] + [c * table[n] for n in range(1, T)]
    return PuiseuxSeries(coeffs, prec=T)


def delta_product(T: int) -> PuiseuxSeries:
    """q * prod (1 - q^n)^24, computed independently of the Eisenstein series."""
    # prod (1-q^n) via Euler's pentagonal theorem, then the 24th power
    eta = [mpz(0)] * T
    k = 0
    while True:
        hit = False
        for m in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2) if k else (0,):
            if m < T:
                eta[m] = mpz(-1) ** k
                hit = True
        if not hit and k:
            break
        k += 1
    base = PuiseuxSeries(eta, prec=T)
    return (PuiseuxSeries.monomial(1, 1, truncation=T + 1) * (base ** 24)).truncate(T)


@dataclass(frozen=True)
class NamedSeries:
    name: str
    series: AhmSeries
    truncation: int

    @property
    def holomorphic(self) -> PuiseuxSeries:
        """The Y^0 part (the whole series unless name is chi_star)."""
        return self.series.coefficient(0)


_memo: dict = {}
_memo_lock = threading.Lock()


def _base_series(T: int) -> dict:
    key = ("_base", T)
    with _memo_lock:
        hit = _memo.get(key)
    if hit is not None:
        return hit
    W = T + 2
    E2, E4, E6 = (eisenstein_qexp(k, W) for k in (2, 4, 6))
    delta = (E4 ** 3 - E6 ** 2) / 1728
    inv_delta = delta.invert()
    j = E4 ** 3 * inv_delta
    f = E4 * E6 * inv_delta
    chi = E2 * f
    out = {
        "E2": E2, "E4": E4, "E6": E6, "Delta": delta,
        "j": j, "f": f, "chi": chi,
    }
    out = {k: v.truncate(T) for k, v in out.items()}
    with _memo_lock:
        _memo.setdefault(key, out)
    return out


def derived_qexp(name: str, T: int) -> NamedSeries:
    if name not in NAMES:
        raise ValueError(f"unknown series {name!r}")
    if T < 2:
        raise ValueError("truncation must be >= 2")
    base = _base_series(T)
    if name == "chi_star":
        series = AhmSeries([base["chi"], -base["f"]])
    else:
        series = AhmSeries([base[name]])
    return NamedSeries(name, series, T)


def qexp(name: str, T: int) -> PuiseuxSeries:
    """Holomorphic series by name (E2, E4, E6, Delta, j, f, chi)."""
    if name == "chi_star":
        raise ValueError("chi_star is an AhmSeries; use derived_qexp")
    return _base_series(T)[name]


def theta(s: PuiseuxSeries) -> PuiseuxSeries:
    """D = q d/dq, so that d/dz = 2 pi i D on q-expansions."""
    return s.theta()


def clear_memo() -> None:
    with _memo_lock:
        _memo.clear()

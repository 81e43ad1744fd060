"""Sieve correctness, counting functions, Li, and residue-class ratios."""

import math

import mpmath
import numpy as np
import pytest

from primeflow.errors import BudgetExhaustedError
from primeflow.primes import (
    PrimeTable,
    li_x,
    load_primes_bin,
    pi_x,
    pi_x_q_a,
    save_primes_bin,
    sieve,
    sw_ratio,
    sw_report,
)


def trial_division_primes(limit: int) -> list[int]:
    out = []
    for n in range(2, limit + 1):
        d = 2
        while d * d <= n:
            if n % d == 0:
                break
            d += 1
        else:
            out.append(n)
    return out


def gauss_li_oracle(x: float) -> float:
    """Node-doubling Gauss-Legendre quadrature of the offset integral."""
    prev = None
    nodes = 64
    while nodes <= 4096:
        t, w = np.polynomial.legendre.leggauss(nodes)
        # split at 16 where the integrand stops being steep
        total = 0.0
        for a, b in ((2.0, min(x, 16.0)), (min(x, 16.0), x)):
            if b > a:
                mid, half = (a + b) / 2, (b - a) / 2
                total += half * float(np.sum(w / np.log(mid + half * t)))
        if prev is not None and abs(total - prev) < 1e-11 * max(1.0, abs(total)):
            return total
        prev = total
        nodes *= 2
    return prev


@pytest.fixture(scope="module")
def table_1e6():
    return sieve(10**6)


def test_sieve_tiny():
    assert sieve(2).primes.tolist() == [2]
    assert sieve(10).primes.tolist() == [2, 3, 5, 7]


def test_sieve_matches_trial_division_exactly():
    got = sieve(10**5).primes.tolist()
    assert got == trial_division_primes(10**5)


def test_sieve_segment_boundaries():
    # small segments force many boundary crossings
    a = sieve(10**4, segment_size=64).primes
    b = sieve(10**4).primes
    assert np.array_equal(a, b)


def test_sieve_rejects_bad_limits():
    with pytest.raises(ValueError):
        sieve(1)
    with pytest.raises(BudgetExhaustedError):
        sieve(10**10)


def test_pi_counts(table_1e6):
    assert pi_x(table_1e6, 1) == 0
    assert pi_x(table_1e6, 2) == 1
    assert pi_x(table_1e6, 100) == 25
    assert pi_x(table_1e6, 10**6) == 78498
    with pytest.raises(ValueError):
        pi_x(table_1e6, 10**6 + 1)


def test_pi_monotone(table_1e6):
    values = [pi_x(table_1e6, x) for x in (10, 100, 1000, 10**4, 10**5, 10**6)]
    assert values == sorted(values)


def test_residue_counts_match_enumeration(table_1e6):
    # 7,13,19,31,37,43,61,67,73,79,97 are the primes <= 100 congruent 1 mod 3
    assert pi_x_q_a(table_1e6, 100, 3, 1) == 11
    assert pi_x_q_a(table_1e6, 100, 4, 1) == 11
    enumerated = [p for p in trial_division_primes(100) if p % 3 == 1]
    assert len(enumerated) == 11
    assert pi_x_q_a(table_1e6, 100, 1, 0) == pi_x(table_1e6, 100)


def test_residue_partition_sums_to_pi(table_1e6):
    x = 10**6
    for q in list(range(1, 51)):
        total = sum(pi_x_q_a(table_1e6, x, q, a) for a in range(q))
        assert total == pi_x(table_1e6, x)


def test_li_values_against_oracles():
    assert li_x(2) == 0.0
    for x in (10.0, 1000.0, 10**6):
        mp_val = float(mpmath.li(x) - mpmath.li(2))
        assert li_x(x) == pytest.approx(mp_val, rel=1e-10)
        assert li_x(x) == pytest.approx(gauss_li_oracle(x), rel=1e-9)
    assert li_x(10.0) == pytest.approx(5.1204357, abs=1e-6)
    with pytest.raises(ValueError):
        li_x(1.5)


def test_li_exceeds_pi_at_powers_of_ten(table_1e6):
    assert li_x(10**6) > pi_x(table_1e6, 10**6)


def test_pnt_ratio_improves(table_1e6):
    errs = [
        abs(pi_x(table_1e6, x) / li_x(x) - 1.0) for x in (10**4, 10**5, 10**6)
    ]
    assert errs[0] > errs[1] > errs[2]


def test_sw_ratio_near_one(table_1e6):
    for q in (2, 3, 5, 7, 11, 13):
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                assert abs(sw_ratio(table_1e6, 10**6, q, a) - 1.0) < 0.05


def test_sw_report_flags(table_1e6):
    rows = sw_report(table_1e6, 10**6, 3)
    by_a = {r.a: r for r in rows}
    assert "class-not-coprime" in by_a[0].flags
    assert by_a[0].count == 1  # only the prime 3 itself
    assert by_a[1].flags == () and by_a[2].flags == ()
    rows_composite = sw_report(table_1e6, 10**6, 4)
    assert all("q-not-prime" in r.flags for r in rows_composite)
    rows_large_q = sw_report(table_1e6, 10**6, 211)
    assert all("q-too-large-for-uniformity" in r.flags for r in rows_large_q)


def test_binary_round_trip(tmp_path):
    table = sieve(10**4)
    path = tmp_path / "primes.bin"
    save_primes_bin(table, path)
    loaded = load_primes_bin(path, limit=10**4)
    assert np.array_equal(loaded.primes, table.primes)
    # format check: little-endian 64-bit deltas starting at 2
    raw = np.fromfile(path, dtype="<u8")
    assert raw[0] == 2
    assert np.all(np.cumsum(raw) == table.primes)

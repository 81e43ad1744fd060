"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary lines alongside the pass/fail status.
"""

import hashlib
import math
import time
from fractions import Fraction

import mpmath
import pytest

from primeflow.cf import (
    DiophantineParams,
    approximation_bracketing_ok,
    construct_alpha_in_D,
    is_prime,
)
from primeflow.charsums import (
    char_bound_report,
    char_sum_closed_form,
    char_sum_direct,
    deviation_qn,
    fit_exponential_bound,
    horizon_multiplier,
    uniform_sup_check,
)
from primeflow.config import RunConfig
from primeflow.equi import default_start_grid, run_experiment
from primeflow.flow import FlowSampler, near_return_check
from primeflow.pipeline import run_all
from primeflow.primes import li_x, pi_x, pi_x_q_a, sieve, sw_ratio
from primeflow.roof import default_roof
from primeflow.rotation import CirclePoint, default_grid


@pytest.fixture(scope="module")
def table_1e7():
    return sieve(10**7)


def _verdict(n: int, text: str) -> None:
    print(f"\nACCEPTANCE {n} PASS: {text}")


def test_criterion_1_continued_fraction_exactness(params, cf):
    t0 = time.monotonic()
    built, _ = construct_alpha_in_D(params, "00000", 5)
    assert built.denominators == (1, 1, 2, 3, 5, 13, 733)
    for n in range(2, built.max_level + 1):
        assert is_prime(built.denominators[n])
    for n in range(1, built.max_level):
        qn, qn1 = built.denominators[n], built.denominators[n + 1]
        with mpmath.workdps(50):
            assert mpmath.mpf(qn1) >= mpmath.exp(mpmath.mpf("0.5") * qn)
    for n in range(built.max_level):
        assert approximation_bracketing_ok(built, n)
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    _verdict(1, f"q = {built.denominators}, primality/growth/bracketing exact ({elapsed:.3f}s)")


def test_criterion_2_closed_form_oracle_equivalence(cf):
    t0 = time.monotonic()
    grid = default_grid(32)
    worst = 0.0
    for level in (2, 3, 4, 5):
        qn = cf.denominators[level]
        for k in range(-20, 21):
            if k == 0:
                continue
            for x in grid:
                diff = abs(
                    char_sum_closed_form(k, x, cf, qn) - char_sum_direct(k, x, cf, qn)
                )
                worst = max(worst, diff)
        assert worst < 1e-9
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    _verdict(2, f"closed vs direct sums: worst |diff| = {worst:.3e} < 1e-9 ({elapsed:.1f}s)")


def test_criterion_3_character_bound_no_violations(cf):
    t0 = time.monotonic()
    grid = default_grid(64)
    ks = [k for k in range(-200, 201) if k != 0]
    violations = 0
    checked = 0
    for level in (2, 3, 4, 5):
        rows = char_bound_report(ks, grid, cf, level, tol=1e-9)
        checked += len(rows)
        violations += sum(1 for r in rows if not r.ok)
    assert violations == 0
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    _verdict(3, f"{checked} (k, level) bound checks, 0 violations ({elapsed:.1f}s)")


def test_criterion_4_deviation_trend_and_fit(cf, roof):
    grid = default_grid(64)
    levels = [2, 3, 4, 5]
    qs = [cf.denominators[n] for n in levels]
    devs = [deviation_qn(roof, grid, cf, n) for n in levels]
    d4, d5 = devs[2], devs[3]
    assert d5 < 0.9 * d4  # strict decrease by at least 10%
    fit = fit_exponential_bound(levels, qs, devs)
    assert fit.rate > 0
    _verdict(
        4,
        f"deviation level 4 -> 5: {d4:.5f} -> {d5:.5f} "
        f"({100 * (1 - d5 / d4):.1f}% drop), fitted rate {fit.rate:.4f} > 0",
    )


def test_criterion_5_uniform_chain_bound(cf, roof):
    grid = default_grid(64)
    lines = []
    for level in (3, 4, 5):
        res = uniform_sup_check(roof, grid, cf, level, d=0.3, k_budget=1000)
        assert res.k_cap == min(
            horizon_multiplier(0.3, cf.denominators[level], 10**9), 1000
        )
        dev = deviation_qn(roof, grid, cf, level)
        # the literal chain inequality with the grid deviation, and the
        # sound form with the per-block sup over the orbit points actually
        # visited by the cocycle decomposition
        assert res.value <= res.k_cap * dev + 1e-9
        assert res.value <= res.chain_bound + 1e-9
        lines.append(f"level {level}: {res.value:.5f} <= {res.k_cap}*{dev:.5f}")
    _verdict(5, "; ".join(lines))


def test_criterion_6_integer_return_trend(cf, roof):
    worst = {}
    starts = default_start_grid(roof)  # 5 bases x 3 heights
    assert len(starts) == 15
    for level in (4, 5):
        qn = cf.denominators[level]
        k_cap = horizon_multiplier(0.3, qn, 10**9)
        level_worst = 0.0
        samplers = {}
        for p0 in starts:
            key = p0.base.value
            if key not in samplers:
                samplers[key] = FlowSampler(roof, p0.base, cf, expected_steps=k_cap * qn + 2)
            for K in range(k_cap + 1):
                _, d_int = near_return_check(p0, roof, cf, level, K, sampler=samplers[key])
                level_worst = max(level_worst, d_int)
        worst[level] = level_worst
    assert worst[5] <= 0.75 * worst[4]  # decrease by at least 25%
    _verdict(
        6,
        f"max integer-return distance: level 4 = {worst[4]:.5f}, "
        f"level 5 = {worst[5]:.5f} ({100 * (1 - worst[5] / worst[4]):.1f}% drop)",
    )


def test_criterion_7_prime_tools(table_1e7):
    t0 = time.monotonic()
    assert pi_x(table_1e7, 10**6) == 78498
    for q in range(1, 51):
        total = sum(pi_x_q_a(table_1e7, 10**6, q, a) for a in range(q))
        assert total == pi_x(table_1e7, 10**6)
    worst = 0.0
    for q in (2, 3, 5, 7, 11, 13):
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                worst = max(worst, abs(sw_ratio(table_1e7, 10**7, q, a) - 1.0))
    assert worst < 0.05
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    _verdict(
        7,
        f"pi(1e6) = 78498 exact, partitions exact for q <= 50, "
        f"max |sw_ratio - 1| = {worst:.4f} < 0.05 ({elapsed:.1f}s)",
    )


def test_criterion_8_experiment_trend(cf, roof, table_1e7):
    t0 = time.monotonic()
    reports = run_experiment(
        cf, roof, table_1e7, [2, 3, 4, 5], d=0.3, max_horizon=10**7
    )
    by_level = {r.level: r for r in reports if r.error is None}
    # g == 1 gaps are exactly zero everywhere
    for r in by_level.values():
        for srow in r.starts:
            assert srow.averages["const"]["gap_prime_residue"] == 0.0
            assert srow.averages["const"]["gap_prime_target"] == 0.0
    levels = sorted(by_level)
    improving_pairs = [
        (a, b)
        for a, b in zip(levels, levels[1:])
        if b == a + 1
        and by_level[b].summary["gap_prime_residue"] < by_level[a].summary["gap_prime_residue"]
        and by_level[b].summary["gap_prime_target"] < by_level[a].summary["gap_prime_target"]
    ]
    assert improving_pairs, "no consecutive level pair improved both gaps"
    elapsed = time.monotonic() - t0
    assert elapsed < 600.0
    gaps = {
        n: (by_level[n].summary["gap_prime_residue"], by_level[n].summary["gap_prime_target"])
        for n in levels
    }
    _verdict(
        8,
        f"gaps (prime-residue, prime-target) by level: {gaps}; "
        f"improving pairs {improving_pairs} ({elapsed:.1f}s)",
    )


def test_criterion_9_run_all_determinism(tmp_path):
    def run_and_hash(out_dir):
        cfg = RunConfig(out_dir=str(out_dir))
        result = run_all(cfg)
        assert result.exit_code == 0
        return {
            p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out_dir.iterdir())
        }

    first = run_and_hash(tmp_path / "out")
    second = run_and_hash(tmp_path / "out")
    assert first == second
    _verdict(9, f"two run-all invocations: {len(first)} artifacts byte-identical")

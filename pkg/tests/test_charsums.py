"""Character sums: closed form vs direct, bound checks, deviations, fits."""

import cmath
import math
from fractions import Fraction

import pytest

from primeflow.charsums import (
    char_bound_report,
    char_sum_closed_form,
    char_sum_direct,
    deviation_qn,
    fit_exponential_bound,
    horizon_multiplier,
    uniform_sup_check,
)
from primeflow.errors import FitError
from primeflow.roof import AnalyticRoof, constant_roof
from primeflow.rotation import CirclePoint, birkhoff_sum, default_grid


def naive_char_sum(k: int, x: Fraction, r: Fraction, n: int) -> complex:
    """Independent oracle: plain python loop over exact rational positions."""
    total = 0j
    cur = x
    for _ in range(n):
        total += cmath.exp(2j * math.pi * float((k * cur) % 1))
        cur += r
    return total


def test_k_zero_is_n(cf):
    assert char_sum_closed_form(0, CirclePoint(Fraction(1, 7)), cf, 12) == 12
    assert char_sum_direct(0, CirclePoint(Fraction(1, 7)), cf, 12) == 12


def test_single_term(cf):
    x = CirclePoint(Fraction(2, 9))
    for k in (1, -3, 7):
        want = cmath.exp(2j * math.pi * float(Fraction(2 * k, 9) % 1))
        assert abs(char_sum_closed_form(k, x, cf, 1) - want) < 1e-12


def test_empty_sum(cf):
    assert char_sum_closed_form(3, CirclePoint(Fraction(0)), cf, 0) == 0


def test_closed_form_matches_independent_oracle(cf):
    x = CirclePoint(Fraction(5, 32))
    q3 = cf.denominators[3]
    for k in (1, 2, -4, 13):
        level = 10
        got = char_sum_closed_form(k, x, cf, q3, level=level)
        want = naive_char_sum(k, Fraction(5, 32), cf.convergent(level), q3)
        assert abs(got - want) < 1e-10


def test_closed_vs_direct_all_small_k(cf):
    # |k| <= 20, levels 2..5, 32-point grid, 1e-9 agreement
    grid = default_grid(32)
    for level in (2, 3, 4, 5):
        qn = cf.denominators[level]
        for k in range(-20, 21):
            if k == 0:
                continue
            for x in grid[::8]:  # subsample here; the full sweep runs in acceptance
                a = char_sum_closed_form(k, x, cf, qn)
                b = char_sum_direct(k, x, cf, qn)
                assert abs(a - b) < 1e-9


def test_char_bound_report_passes(cf):
    grid = default_grid(64)
    rows = char_bound_report(range(-50, 51), grid, cf, 4)
    assert len(rows) == 100
    assert all(r.ok for r in rows)
    # triangle branch is exact: |S| <= q_n always
    assert all(r.grid_sup <= r.bound_triangle + 1e-9 for r in rows)


def test_char_bound_resonant_k_uses_triangle_branch(cf):
    # k = q_n: the analytic branch evaluates to roughly 8 pi q_n, so the
    # triangle branch q_n is the binding one and still holds
    level = 4
    qn = cf.denominators[level]
    rows = char_bound_report([qn], default_grid(16), cf, level)
    row = rows[0]
    assert row.bound_analytic > row.bound_triangle
    assert row.grid_sup <= row.bound_triangle + 1e-9
    # certified lower endpoint keeps the analytic branch above the paper value
    assert row.bound_analytic >= 4 * math.pi * qn / (1.0 / cf.denominators[level + 1] * cf.denominators[level + 1])


def test_deviation_constant_roof_is_zero(cf):
    f = constant_roof(3.0)
    assert deviation_qn(f, default_grid(16), cf, 4) < 1e-9


def test_deviation_single_harmonic_matches_closed_form(cf):
    # f = 1 + 2 Re(a_1 chi_1): deviation = |a_1| * |S_{q_n}(chi_1)|
    a1 = 0.07 + 0.02j
    f = AnalyticRoof(
        ((0, 1.0 + 0j), (1, a1), (-1, a1.conjugate())), decay_scale=1.0, decay_rate=0.5
    )
    grid = default_grid(32)
    for level in (3, 4, 5):
        qn = cf.denominators[level]
        dev = deviation_qn(f, grid, cf, level)
        # |a_1 S(chi_1) + conj(a_1) S(chi_-1)| maximized over the grid
        expected = max(
            abs(
                a1 * char_sum_closed_form(1, x, cf, qn)
                + a1.conjugate() * char_sum_closed_form(-1, x, cf, qn)
            )
            for x in grid
        )
        assert dev == pytest.approx(expected, abs=1e-9)


def test_deviation_direct_vs_closed_route(cf, roof):
    grid = default_grid(32)
    for level in (2, 4, 5):
        d1 = deviation_qn(roof, grid, cf, level, via="direct")
        d2 = deviation_qn(roof, grid, cf, level, via="closed")
        assert d1 == pytest.approx(d2, abs=1e-9)


def test_deviation_decreases_at_deep_levels(cf, roof):
    grid = default_grid(64)
    d4 = deviation_qn(roof, grid, cf, 4)
    d5 = deviation_qn(roof, grid, cf, 5)
    assert d5 < d4


# -- exponential majorant fits ------------------------------------------------


def test_fit_two_points_arithmetic():
    # slope from ((13, 1e-2), (733, 1e-4)): rate = ln(100)/720
    fit = fit_exponential_bound([4, 5], [13, 733], [1e-2, 1e-4])
    assert fit.rate == pytest.approx(math.log(100.0) / 720.0, rel=1e-12)
    # two-point least squares passes through both points; majorant covers them
    for q, d in zip(fit.qs, fit.deviations):
        assert fit.scale * math.exp(-fit.rate * q) >= d * (1 - 1e-12)


def test_fit_rejects_flat_deviations():
    with pytest.raises(FitError):
        fit_exponential_bound([1, 2], [5, 13], [1e-3, 1e-3])


def test_fit_rejects_single_level():
    with pytest.raises(FitError):
        fit_exponential_bound([1], [5], [1e-3])


def test_fit_majorizes_measured_deviations(cf, roof):
    grid = default_grid(64)
    levels = [2, 3, 4, 5]
    qs = [cf.denominators[n] for n in levels]
    devs = [deviation_qn(roof, grid, cf, n) for n in levels]
    fit = fit_exponential_bound(levels, qs, devs)
    assert fit.rate > 0
    for q, d in zip(qs, devs):
        assert fit.scale * math.exp(-fit.rate * q) >= d * (1 - 1e-12)


# -- uniform block deviations ---------------------------------------------------


def test_horizon_multiplier_values(cf):
    assert horizon_multiplier(0.3, 3, 1000) == 2  # e^0.9 ~ 2.46
    assert horizon_multiplier(0.3, 5, 1000) == 4  # e^1.5 ~ 4.48
    assert horizon_multiplier(0.3, 13, 1000) == 49  # e^3.9 ~ 49.4
    assert horizon_multiplier(0.3, 733, 1000) == 1000  # capped


def test_uniform_sup_k1_equals_deviation(cf, roof):
    grid = default_grid(16)
    res = uniform_sup_check(roof, grid, cf, 4, d=0.001, k_budget=1)
    assert res.k_cap == 1
    assert res.value == pytest.approx(deviation_qn(roof, grid, cf, 4, tol=1e-9), abs=1e-9)


def test_uniform_sup_k2_matches_direct_summation(cf, roof):
    grid = [CirclePoint(Fraction(3, 16))]
    qn = cf.denominators[4]
    res = uniform_sup_check(roof, grid, cf, 4, d=0.2, k_budget=2)  # floor(e) = 2
    assert res.k_cap == 2
    direct = max(
        abs(birkhoff_sum(roof, grid[0], cf, K * qn, 1e-11) - K * qn)
        for K in (1, 2)
    )
    assert res.value == pytest.approx(direct, abs=1e-10)


def test_uniform_sup_chain_bound_holds(cf, roof):
    grid = default_grid(32)
    for level in (3, 4, 5):
        res = uniform_sup_check(roof, grid, cf, level, d=0.3)
        assert res.value <= res.chain_bound + 1e-9
        assert res.chain_bound == res.k_cap * res.term_sup

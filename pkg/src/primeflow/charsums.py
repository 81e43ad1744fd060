"""Ergodic sums of characters over the rotation and their quantitative bounds.

S_n(chi_k)(x) = sum_{j<n} e^(2*pi*i*k*(x + j*alpha)) admits the closed form
e^(2*pi*i*k*x) * (1 - e^(2*pi*i*k*n*alpha)) / (1 - e^(2*pi*i*k*alpha)); both
that form and direct summation are kept, evaluated against the same exact
convergent so they can be cross-checked to float accuracy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .cf import ContinuedFraction
from .errors import BudgetExhaustedError, FitError, PrecisionError
from .roof import AnalyticRoof
from .rotation import CirclePoint, birkhoff_level, birkhoff_sum, orbit_floats

_TWO_PI = 2.0 * math.pi


def _cis_fraction(t: Fraction) -> complex:
    """e^(2*pi*i*t) with t reduced mod 1 exactly before the float conversion."""
    return cmath.exp(2j * math.pi * float(t % 1))


def _closed_form_level(k: int, cf: ContinuedFraction, n: int, tol: float) -> int:
    """Approximant level so the closed form is within tol of its value at the
    canonical angle; derivative bound 2*pi*|k|*(n/D + 4/D^2), D = 4*dist(k*alpha)."""
    lo, _ = cf.nearest_integer_distance(k)
    if lo <= 0:
        raise PrecisionError(f"dist(k*alpha) not certified away from zero for k={k}")
    d_lo = 4 * lo
    deriv = _TWO_PI * abs(k) * (Fraction(n) / d_lo + 4 / (d_lo * d_lo))
    return cf.level_for_error(Fraction(tol) / deriv)


def char_sum_closed_form(
    k: int,
    x: CirclePoint,
    cf: ContinuedFraction,
    n: int,
    *,
    tol: float = 1e-12,
    level: int | None = None,
) -> complex:
    """Geometric-sum evaluation of S_n(chi_k)(x); k = 0 returns n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if k == 0:
        return complex(n)
    if n == 0:
        return 0j
    if level is None:
        level = _closed_form_level(k, cf, n, tol)
    p, q = cf.p(level), cf.q(level)
    ratio_num = (k * p) % q
    if ratio_num == 0:
        raise PrecisionError(f"k={k} resonates exactly with the level-{level} convergent")
    top = 1.0 - _cis_fraction(Fraction((k * n * p) % q, q))
    bottom = 1.0 - _cis_fraction(Fraction(ratio_num, q))
    return _cis_fraction(k * x.value) * top / bottom


def char_sum_direct(
    k: int,
    x: CirclePoint,
    cf: ContinuedFraction,
    n: int,
    *,
    level: int | None = None,
    tol: float = 1e-12,
) -> complex:
    """Term-by-term summation of S_n(chi_k)(x) against the same convergent."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if k == 0:
        return complex(n)
    if n == 0:
        return 0j
    if level is None:
        level = _closed_form_level(k, cf, n, tol)
    r = cf.convergent(level)
    # reduce k*(x + j*r) mod 1 exactly: orbit of x under rotation by k*r
    xs = orbit_floats((k * x.value) % 1, (k * r) % 1, n)
    z = np.exp((2j * math.pi) * xs)
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


# -- character-sum bound report (the min(q_n, 4*pi*|k|/(dist*q_{n+1})) check) --


@dataclass(frozen=True)
class CharBoundRow:
    k: int
    level: int
    grid_sup: float  # max over the grid of |S_{q_n}(chi_k)(x)|
    bound_triangle: int  # q_n
    bound_analytic: float  # 4*pi*|k| / (dist_lo(k*alpha) * q_{n+1})
    bound_analytic_no_k: float  # same with the |k| factor dropped
    dist_lo: float
    ok: bool  # grid_sup <= min(triangle, analytic) + tol
    ok_no_k: bool  # grid_sup <= min(triangle, analytic_no_k) + tol


def char_bound_report(
    ks: Sequence[int],
    x_grid: Sequence[CirclePoint],
    cf: ContinuedFraction,
    level: int,
    *,
    tol: float = 1e-9,
) -> list[CharBoundRow]:
    """Check |S_{q_n}(chi_k)| <= min(q_n, 4*pi*|k|/(dist(k*alpha)*q_{n+1})) on a grid.

    dist(k*alpha) enters bounds through its certified lower interval
    endpoint, so a reported violation cannot be an artifact of the angle
    approximation.  Both the |k|-carrying and |k|-free variants of the
    analytic branch are reported.
    """
    if not 0 <= level <= cf.max_level - 1:
        raise ValueError(f"need q at levels {level} and {level+1}")
    qn = cf.denominators[level]
    qn1 = cf.denominators[level + 1]
    rows = []
    for k in ks:
        if k == 0:
            continue
        lo, _ = cf.nearest_integer_distance(k)
        eval_level = _closed_form_level(k, cf, qn, 1e-12)
        p, q = cf.p(eval_level), cf.q(eval_level)
        top = 1.0 - _cis_fraction(Fraction((k * qn * p) % q, q))
        bottom = 1.0 - _cis_fraction(Fraction((k * p) % q, q))
        # the prefactor e^(2 pi i k x) has modulus one, so the grid sup only
        # picks up float noise; it is still scanned to keep grid semantics.
        grid_sup = max(
            abs(_cis_fraction(k * x.value) * top / bottom) for x in x_grid
        )
        bound_analytic = 4.0 * math.pi * abs(k) / (float(lo) * qn1)
        bound_no_k = 4.0 * math.pi / (float(lo) * qn1)
        rows.append(
            CharBoundRow(
                k=k,
                level=level,
                grid_sup=grid_sup,
                bound_triangle=qn,
                bound_analytic=bound_analytic,
                bound_analytic_no_k=bound_no_k,
                dist_lo=float(lo),
                ok=grid_sup <= min(qn, bound_analytic) + tol,
                ok_no_k=grid_sup <= min(qn, bound_no_k) + tol,
            )
        )
    return rows


# -- deviations of roof Birkhoff sums from the mean ------------------------


def deviation_qn(
    f: AnalyticRoof,
    x_grid: Sequence[CirclePoint],
    cf: ContinuedFraction,
    level: int,
    *,
    tol: float = 1e-9,
    via: str = "direct",
) -> float:
    """Grid-sup of |S_{q_n}(f)(x) - q_n * a_0| at the given level.

    ``via='direct'`` walks the orbit (the production path); ``via='closed'``
    assembles the same quantity from per-harmonic geometric sums and serves
    as the independent cross-check.
    """
    if not x_grid:
        raise ValueError("x_grid must be non-empty")
    if not 0 <= level <= cf.max_level:
        raise ValueError(f"level {level} out of range")
    qn = cf.denominators[level]
    a0 = f.mean
    if via == "direct":
        return max(
            abs(birkhoff_sum(f, x, cf, qn, tol) - qn * a0) for x in x_grid
        )
    if via == "closed":
        best = 0.0
        for x in x_grid:
            total = 0j
            for k, a in f.coefficients:
                if k == 0:
                    continue
                total += a * char_sum_closed_form(k, x, cf, qn, tol=tol / 10)
            best = max(best, abs(total))
        return best
    raise ValueError("via must be 'direct' or 'closed'")


@dataclass(frozen=True)
class BoundFit:
    """Certified exponential majorant dev_n <= scale * e^(-rate * q_n)
    over the measured levels (never extrapolated)."""

    levels: tuple[int, ...]
    qs: tuple[int, ...]
    deviations: tuple[float, ...]
    scale: float  # inflated so the majorant covers every measured point
    rate: float  # must come out positive


def fit_exponential_bound(
    levels: Sequence[int],
    qs: Sequence[int],
    deviations: Sequence[float],
) -> BoundFit:
    """Least squares of log(dev) against q, then inflate the scale into a majorant."""
    if len(qs) != len(deviations) or len(levels) != len(qs):
        raise ValueError("levels, qs and deviations must have equal length")
    if len(qs) < 2:
        raise FitError("at least two levels are required")
    if any(d <= 0 for d in deviations):
        raise FitError("deviations must be positive to fit a log model")
    q_arr = np.array(qs, dtype=np.float64)
    log_d = np.log(np.array(deviations, dtype=np.float64))
    slope, intercept = np.polyfit(q_arr, log_d, 1)
    rate = -float(slope)
    if rate <= 1e-12:  # flat or growing data fits rate 0 up to rounding noise
        raise FitError(f"deviations are not decaying (fitted rate {rate:.3g})")
    scale = max(float(d) * math.exp(rate * q) for q, d in zip(qs, deviations))
    return BoundFit(
        levels=tuple(int(n) for n in levels),
        qs=tuple(int(q) for q in qs),
        deviations=tuple(float(d) for d in deviations),
        scale=scale,
        rate=rate,
    )


# -- uniform block-sum deviation over K repetitions -------------------------


def horizon_multiplier(d: float, qn: int, k_budget: int) -> int:
    """K_cap = min(floor(e^(d*q_n)), k_budget), evaluated in high precision."""
    with mpmath.workdps(30 + int(d * qn)):
        raw = mpmath.exp(mpmath.mpf(d) * qn)
        if raw > k_budget:
            return int(k_budget)
        return int(mpmath.floor(raw))


@dataclass(frozen=True)
class UniformSupResult:
    level: int
    k_cap: int
    value: float  # max over K <= k_cap, x in grid of |S_{K q_n}(f)(x) - K q_n a_0|
    term_sup: float  # max per-block deviation over every orbit point visited
    chain_bound: float  # k_cap * term_sup (the summation-argument bound)


def uniform_sup_check(
    f: AnalyticRoof,
    x_grid: Sequence[CirclePoint],
    cf: ContinuedFraction,
    level: int,
    d: float,
    *,
    k_budget: int = 1000,
    step_budget: int = 10**8,
    tol: float = 1e-9,
) -> UniformSupResult:
    """Max over K <= K_cap and grid x of |S_{K q_n}(f)(x) - K q_n a_0|.

    Computed through the cocycle decomposition S_{K q_n} = sum of q_n-blocks
    along the orbit, which also yields the per-block deviation sup and the
    resulting chain bound K_cap * sup.
    """
    if not 0 <= level <= cf.max_level - 1:
        raise ValueError(f"level {level} out of range")
    qn = cf.denominators[level]
    k_cap = horizon_multiplier(d, qn, k_budget)
    total_steps = k_cap * qn
    if total_steps > step_budget:
        raise BudgetExhaustedError(
            f"K_cap*q_n = {total_steps} exceeds step budget {step_budget}"
        )
    eval_level = birkhoff_level(f, cf, max(total_steps, 1), tol)
    a0 = f.mean
    best = 0.0
    term_sup = 0.0
    for x in x_grid:
        r = cf.convergent(eval_level)
        xs = orbit_floats(x.value, r, max(total_steps, 1))
        vals = f.value(xs) if total_steps else np.empty(0)
        running = 0.0
        for j in range(k_cap):
            block = float(math.fsum(vals[j * qn : (j + 1) * qn].tolist()))
            term_sup = max(term_sup, abs(block - qn * a0))
            running += block
            best = max(best, abs(running - (j + 1) * qn * a0))
    return UniformSupResult(
        level=level,
        k_cap=k_cap,
        value=best,
        term_sup=term_sup,
        chain_bound=k_cap * term_sup,
    )

"""Exact circle-rotation orbits and Birkhoff sums with certified error budgets.

All circle arithmetic substitutes an exact convergent p_M/q_M for the
irrational angle and carries a rational budget for the substitution, so
inequality checks downstream are sound rather than merely plausible in
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .cf import ContinuedFraction
from .errors import PrecisionError

if TYPE_CHECKING:
    from .roof import AnalyticRoof


@dataclass(frozen=True)
class CirclePoint:
    """A point of the circle represented by an exact rational in [0, 1)."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value) % 1)

    @staticmethod
    def of(num, den=None) -> "CirclePoint":
        return CirclePoint(Fraction(num) if den is None else Fraction(num, den))

    def as_float(self) -> float:
        return float(self.value)


def circle_distance(a: Fraction, b: Fraction) -> Fraction:
    t = abs(a - b) % 1
    return min(t, 1 - t)


@dataclass(frozen=True)
class OrbitErrorBudget:
    """Certificate: the returned point is within ``bound`` of the true orbit point."""

    steps: int
    approx_level: int
    bound: Fraction


def _rotation_level(cf: ContinuedFraction, n: int, tol: float | Fraction) -> int:
    """Smallest approximant level whose n-step budget beats tol."""
    if n == 0:
        return 0
    target = Fraction(tol) / abs(n)
    if target <= 0:
        raise ValueError("tolerance must be positive")
    return cf.level_for_error(target)


def rotate_n(
    x: CirclePoint,
    cf: ContinuedFraction,
    n: int,
    tol: float | Fraction | None = None,
    *,
    level: int | None = None,
) -> tuple[CirclePoint, OrbitErrorBudget]:
    """n-fold rotation computed exactly with the level-M convergent.

    Either ``tol`` (the level is chosen automatically) or ``level`` must be
    given.  The budget bound |n| / (q_M * q_{M+1}) certifies the distance
    to the true n-step rotation of the canonical value.
    """
    if level is None:
        if tol is None:
            raise ValueError("pass either tol or level")
        level = _rotation_level(cf, n, tol)
    r = cf.convergent(level)
    bound = abs(n) * cf.approximation_error_bound(level) if n else Fraction(0)
    if tol is not None and n and not bound < Fraction(tol):
        raise PrecisionError(f"level {level} budget {bound} does not meet tol {tol}")
    point = CirclePoint((x.value + n * r) % 1)
    return point, OrbitErrorBudget(steps=n, approx_level=level, bound=bound)


def orbit_numerators(x0: Fraction, r: Fraction, count: int) -> tuple[np.ndarray | list[int], int]:
    """Numerators of x0 + j*r mod 1 over the common denominator D, j < count.

    Uses int64 vector arithmetic when it provably cannot overflow, else a
    chunked big-integer path.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    den = x0.denominator
    D = den * (r.denominator // math.gcd(r.denominator, den))
    A = x0.numerator * (D // x0.denominator) % D
    P = r.numerator * (D // r.denominator) % D
    if count == 0:
        return np.empty(0, dtype=np.int64) if D < 2**62 else [], D
    if P * (count - 1) + A < 2**62:
        nums = (A + np.arange(count, dtype=np.int64) * P) % D
        return nums, D
    out: list[int] = []
    cur = A
    for _ in range(count):
        out.append(cur)
        cur = (cur + P) % D
    return out, D


def orbit_floats(x0: Fraction, r: Fraction, count: int) -> np.ndarray:
    """Orbit points as doubles, reduced mod 1 exactly before conversion."""
    nums, D = orbit_numerators(x0, r, count)
    if isinstance(nums, list):
        return np.array([n / D for n in nums], dtype=np.float64)
    return nums.astype(np.float64) / D


def birkhoff_level(f: "AnalyticRoof", cf: ContinuedFraction, n: int, tol: float) -> int:
    """Approximant level so the accumulated evaluation error of an n-term
    Birkhoff sum stays below tol/2 (Lipschitz model: L * n^2/2 * |alpha - r|)."""
    if n <= 1:
        return 0
    lip = f.lipschitz()
    if lip == 0:
        return 0
    target = Fraction(tol) / Fraction(lip * n * n)  # = tol / (L n^2), margin 2x
    return cf.level_for_error(target)


def birkhoff_sum(
    f: "AnalyticRoof",
    x: CirclePoint,
    cf: ContinuedFraction,
    n: int,
    tol: float = 1e-9,
    *,
    level: int | None = None,
) -> float:
    """S_n(f)(x) = sum_{j<n} f(x + j*alpha) within tol; S_0 = 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    if level is None:
        level = birkhoff_level(f, cf, n, tol)
    r = cf.convergent(level)
    xs = orbit_floats(x.value, r, n)
    return float(math.fsum(f.value(xs).tolist()))


def cocycle_check(
    f: "AnalyticRoof",
    x: CirclePoint,
    cf: ContinuedFraction,
    m: int,
    n: int,
    tol: float = 1e-9,
) -> float:
    """|S_{m+n}(f)(x) - S_m(f)(x) - S_n(f)(T^m x)|, evaluated at one shared level."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be >= 0")
    level = birkhoff_level(f, cf, m + n, tol)
    total = birkhoff_sum(f, x, cf, m + n, tol, level=level)
    first = birkhoff_sum(f, x, cf, m, tol, level=level)
    shifted, _ = rotate_n(x, cf, m, level=level)
    second = birkhoff_sum(f, shifted, cf, n, tol, level=level)
    return abs(total - first - second)


def default_grid(size: int = 64) -> list[CirclePoint]:
    """Equispaced rational grid i/size on the circle."""
    if size < 1:
        raise ValueError("size must be >= 1")
    return [CirclePoint(Fraction(i, size)) for i in range(size)]

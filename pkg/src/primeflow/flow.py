"""The suspension flow under an analytic roof over a circle rotation.

Space: pairs (x, s) with 0 <= s < f(x), the roof top (x, f(x)) glued to
(Tx, 0).  Flowing for time t from (x, s) finds the unique step count n with
S_n(f)(x) <= t + s < S_{n+1}(f)(x) and lands at (T^n x, t + s - S_n(f)(x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cf import ContinuedFraction
from .errors import AmbiguousBoundaryError, BudgetExhaustedError, PositivityError, QuadratureError
from .roof import AnalyticRoof, normalize_roof  # noqa: F401  (re-export: flow owns the op)
from .rotation import CirclePoint, birkhoff_level, circle_distance, orbit_numerators


@dataclass(frozen=True)
class FlowPoint:
    """A point (x, s) of the suspension space, s in [0, f(x))."""

    base: CirclePoint
    height: float

    @staticmethod
    def of(x, s: float) -> "FlowPoint":
        return FlowPoint(CirclePoint(Fraction(x)), float(s))


@dataclass(frozen=True)
class FlowStep:
    """Inversion record: steps n and residual s' with S_n(f)(x) + s' = t + s."""

    steps: int
    residual: float


class FlowSampler:
    """Cumulative roof sums along one rotation orbit, grown on demand.

    Shares one exact approximant and one growing cumsum table across all
    flow-time queries from the same base point, so batch sampling (primes,
    residue classes, integer times) costs one pass over the orbit.
    """

    def __init__(
        self,
        f: AnalyticRoof,
        x0: CirclePoint,
        cf: ContinuedFraction,
        *,
        tol: float = 1e-9,
        expected_steps: int = 1024,
        step_budget: int = 10**8,
    ):
        self.f = f
        self.x0 = x0
        self.cf = cf
        self.tol = tol
        self.step_budget = step_budget
        # the level must satisfy both the base-point budget (n * err < tol)
        # and the accumulated-sum budget handled by birkhoff_level
        n_est = max(expected_steps, 2)
        base_level = cf.level_for_error(Fraction(tol) / n_est)
        self.level = max(base_level, birkhoff_level(f, cf, n_est, tol))
        self.rotation = cf.convergent(self.level)
        self._nums: list = []
        self._den = 1
        self._values = np.empty(0, dtype=np.float64)
        self._cumsum = np.zeros(1, dtype=np.longdouble)  # S_0 = 0

    @property
    def steps_computed(self) -> int:
        return len(self._values)

    def ensure_steps(self, n: int) -> None:
        """Extend the cumsum table so S_0..S_n are available."""
        have = self.steps_computed
        if n <= have:
            return
        if n > self.step_budget:
            raise BudgetExhaustedError(f"orbit needs {n} steps, budget {self.step_budget}")
        nums, den = orbit_numerators(self.x0.value, self.rotation, n)
        if isinstance(nums, np.ndarray):
            xs = nums[have:].astype(np.float64) / den
            self._nums = nums
        else:
            xs = np.array([v / den for v in nums[have:]], dtype=np.float64)
            self._nums = nums
        self._den = den
        new_vals = self.f.value(xs)
        self._values = np.concatenate([self._values, new_vals])
        tail = np.cumsum(new_vals.astype(np.longdouble)) + self._cumsum[-1]
        self._cumsum = np.concatenate([self._cumsum, tail])

    def base_at(self, n: int) -> CirclePoint:
        """Exact base point after n rotation steps."""
        self.ensure_steps(n + 1)
        return CirclePoint(Fraction(int(self._nums[n]), self._den))

    def birkhoff(self, n: int) -> float:
        self.ensure_steps(n)
        return float(self._cumsum[n])

    def locate(self, total: float) -> int:
        """Index n with S_n <= total < S_{n+1}, growing the table as needed."""
        if total < 0:
            raise ValueError("flow times must be non-negative")
        guess = max(int(total / self.f.mean) + 2, 2)
        self.ensure_steps(guess)
        while self._cumsum[-1] <= total:
            self.ensure_steps(min(max(self.steps_computed * 2, 16), self.step_budget))
            if self.steps_computed >= self.step_budget and self._cumsum[-1] <= total:
                raise BudgetExhaustedError(
                    f"time {total} needs more than {self.step_budget} orbit steps"
                )
        return int(np.searchsorted(self._cumsum, np.longdouble(total), side="right") - 1)

    @staticmethod
    def _snap_width(value: float) -> float:
        # a few float64 ulps: hits this close to a boundary are treated as
        # the boundary itself (canonical representative s' = 0) so that
        # times computed from the cumsums round-trip reproducibly
        return 8.0 * np.finfo(np.float64).eps * max(1.0, abs(value))

    def point_at_time(
        self, t: float, s: float, *, boundary_tol: float = 1e-9
    ) -> tuple[FlowPoint, FlowStep]:
        """Flow (x0, s) forward by time t.

        Times within a few ulps of a block boundary resolve to the boundary
        (height 0 at the next base point); times farther away but within
        ``boundary_tol`` raise AmbiguousBoundaryError instead of silently
        picking a side.
        """
        if t < 0:
            raise ValueError("t must be >= 0")
        total = np.longdouble(t) + np.longdouble(s)
        n = self.locate(float(total))
        lower = self._cumsum[n]
        upper = self._cumsum[n + 1]
        snap = self._snap_width(float(total))
        if float(upper - total) <= snap:
            n += 1
            self.ensure_steps(n + 1)
            return FlowPoint(self.base_at(n), 0.0), FlowStep(steps=n, residual=0.0)
        if float(total - lower) <= snap:
            return FlowPoint(self.base_at(n), 0.0), FlowStep(steps=n, residual=0.0)
        gap = min(float(total - lower), float(upper - total))
        if gap < boundary_tol:
            raise AmbiguousBoundaryError(
                f"time {t} lands within {boundary_tol} of a roof boundary"
            )
        residual = float(total - lower)
        return FlowPoint(self.base_at(n), residual), FlowStep(steps=n, residual=residual)

    def points_at_times(
        self, ts: np.ndarray, s: float, *, boundary_tol: float = 1e-9
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
        """Vectorized flow of (x0, s) by each time in ts.

        Returns (base floats, heights, step counts, ambiguous-boundary count).
        """
        ts = np.asarray(ts, dtype=np.float64)
        if len(ts) == 0:
            return np.empty(0), np.empty(0), np.empty(0, dtype=np.int64), 0
        totals = ts.astype(np.longdouble) + np.longdouble(s)
        self.locate(float(totals.max()))
        ns = np.searchsorted(self._cumsum, totals, side="right") - 1
        lower = self._cumsum[ns]
        upper = self._cumsum[ns + 1]
        down = (totals - lower).astype(np.float64)
        up = (upper - totals).astype(np.float64)
        snaps = 8.0 * np.finfo(np.float64).eps * np.maximum(1.0, np.abs(totals.astype(np.float64)))
        residuals = down.copy()
        snap_up = up <= snaps
        if snap_up.any():
            self.ensure_steps(int(ns.max()) + 2)
            ns = ns + snap_up
            residuals[snap_up] = 0.0
        residuals[down <= snaps] = 0.0
        gaps = np.minimum(down, up)
        ambiguous = int(np.count_nonzero((gaps > snaps) & (gaps < boundary_tol)))
        if isinstance(self._nums, np.ndarray):
            bases = self._nums[ns].astype(np.float64) / self._den
        else:
            bases = np.array([self._nums[int(i)] / self._den for i in ns], dtype=np.float64)
        return bases, residuals, ns.astype(np.int64), ambiguous


def flow_time_t(
    p: FlowPoint,
    t: float,
    f: AnalyticRoof,
    cf: ContinuedFraction,
    *,
    tol: float = 1e-9,
    boundary_tol: float = 1e-9,
    step_budget: int = 10**8,
) -> tuple[FlowPoint, FlowStep]:
    """Flow the point p forward by time t (single-shot convenience form)."""
    sampler = FlowSampler(
        f,
        p.base,
        cf,
        tol=tol,
        expected_steps=max(int((t + p.height) / f.min_value()) + 2, 2),
        step_budget=step_budget,
    )
    return sampler.point_at_time(t, p.height, boundary_tol=boundary_tol)


# -- metric on the suspension space ------------------------------------------


def flow_metric(p: FlowPoint, q: FlowPoint, f: AnalyticRoof, rotation: Fraction) -> float:
    """Quotient-aware max-metric on the suspension space.

    Minimum over the four boundary identifications of
    max(base circle distance, height mismatch): compared directly, with
    either point pushed across the roof (charging its remaining height
    plus the other's height), and with both measured by depth below the
    roof at unshifted bases.
    """
    xp, xq = p.base.value, q.base.value
    sp, sq = p.height, q.height
    fp, fq = f.value_at(xp), f.value_at(xq)
    direct = max(float(circle_distance(xp, xq)), abs(sp - sq))
    p_up = max(float(circle_distance((xp + rotation) % 1, xq)), (fp - sp) + sq)
    q_up = max(float(circle_distance(xp, (xq + rotation) % 1)), sp + (fq - sq))
    depth = max(float(circle_distance(xp, xq)), abs((fp - sp) - (fq - sq)))
    return min(direct, p_up, q_up, depth)


# -- near-return checks -------------------------------------------------------


def near_return_check(
    p: FlowPoint,
    f: AnalyticRoof,
    cf: ContinuedFraction,
    level: int,
    K: int,
    *,
    tol: float = 1e-9,
    step_budget: int = 10**8,
    sampler: FlowSampler | None = None,
) -> tuple[float, float]:
    """(d_physical, d_integer) for the K-fold q_n-block return.

    d_physical: distance from the point flowed by the exact block time
    S_{K q_n}(f)(x) back to itself (the base rotates by K q_n steps while
    the height returns).  d_integer: same with the integer time K q_n.
    Requires a roof with unit mean so the two time scales are comparable.
    """
    if abs(f.mean - 1.0) > 1e-12:
        raise ValueError("near-return checks require a roof normalized to unit mean")
    if K < 0:
        raise ValueError("K must be >= 0")
    if not 0 <= level <= cf.max_level:
        raise ValueError(f"level {level} out of range")
    if K == 0:
        return 0.0, 0.0
    qn = cf.denominators[level]
    steps = K * qn
    if sampler is None:
        sampler = FlowSampler(
            f, p.base, cf, tol=tol, expected_steps=steps + 2, step_budget=step_budget
        )
    block_time = sampler.birkhoff(steps)
    phys_pt, _ = sampler.point_at_time(block_time, p.height)
    int_pt, _ = sampler.point_at_time(float(steps), p.height)
    d_phys = flow_metric(phys_pt, p, f, sampler.rotation)
    d_int = flow_metric(int_pt, p, f, sampler.rotation)
    return d_phys, d_int


# -- roof from a torus reparametrization --------------------------------------


@dataclass(frozen=True)
class TorusFunction:
    """Positive analytic function on the 2-torus given by finite Fourier data.

    coefficients maps (j, k) to b_{jk} with conjugate symmetry
    b_{-j,-k} = conj(b_{jk}); positivity is certified from
    b_{00} - sum |b_{jk}| > 0.
    """

    coefficients: tuple[tuple[tuple[int, int], complex], ...]

    def __post_init__(self):
        table = dict(self.coefficients)
        mean = table.get((0, 0))
        if mean is None or abs(mean.imag) > 1e-12 or mean.real <= 0:
            raise ValueError("b_00 must be present, real and positive")
        for (j, k), v in table.items():
            partner = table.get((-j, -k))
            if partner is None or abs(partner - v.conjugate()) > 1e-12 * max(1.0, abs(v)):
                raise ValueError(f"coefficients not conjugate-symmetric at {(j, k)}")
        margin = mean.real - sum(abs(v) for key, v in table.items() if key != (0, 0))
        if margin <= 0:
            raise PositivityError(f"torus function not certified positive (margin {margin})")

    def min_value(self) -> float:
        table = dict(self.coefficients)
        return table[(0, 0)].real - sum(
            abs(v) for key, v in table.items() if key != (0, 0)
        )

    def value(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros(np.broadcast(x, y).shape, dtype=np.complex128)
        for (j, k), v in self.coefficients:
            out += v * np.exp(2j * math.pi * (j * x + k * y))
        real = np.real(out)
        return real if real.shape else float(real)


def constant_torus_function(value: float = 1.0) -> TorusFunction:
    return TorusFunction((((0, 0), complex(value)),))


def _gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    # map [-1, 1] to [0, 1]
    return (nodes + 1.0) / 2.0, weights / 2.0


def _crossing_times(
    r: TorusFunction, xs: np.ndarray, alpha: float, nodes: int
) -> np.ndarray:
    """Time to cross from (x, 0) to the next section hit, by Gauss quadrature.

    The trajectory is parametrized by the second coordinate: positions
    (x + y/alpha, y) for y in [0, 1], speed along y equal to alpha*r, so
    the crossing time is (1/alpha) * integral of 1/r along the segment.
    """
    ys, ws = _gauss_nodes(nodes)
    integrand = 1.0 / r.value(xs[:, None] + ys[None, :] / alpha, ys[None, :])
    return (integrand @ ws) / alpha


def roof_from_reparam(
    r: TorusFunction,
    cf: ContinuedFraction,
    quadrature_nodes: int = 64,
    *,
    harmonics: int = 32,
    samples: int = 256,
    rescale: bool = True,
    tol: float = 1e-10,
) -> AnalyticRoof:
    """Tabulate section-crossing times under speed r, then fit a Fourier roof.

    Convergence is certified by node doubling; the fitted series is
    conjugate-symmetric by construction and its positivity re-certified.
    With rescale=True the result is normalized to unit mean (a constant
    rescaling of r, which is harmless for the underlying flow).
    """
    if quadrature_nodes < 64:
        raise ValueError("quadrature_nodes must be >= 64")
    if samples < 2 * harmonics + 2:
        raise ValueError("need more samples than fitted harmonics")
    alpha = cf.value_float()
    xs = np.arange(samples, dtype=np.float64) / samples
    coarse = _crossing_times(r, xs, alpha, quadrature_nodes)
    fine = _crossing_times(r, xs, alpha, 2 * quadrature_nodes)
    drift = float(np.max(np.abs(fine - coarse)))
    if drift > tol:
        raise QuadratureError(
            f"node doubling moved crossing times by {drift:.3e} > {tol:.3e}"
        )
    spectrum = np.fft.fft(fine) / samples
    coeffs: list[tuple[int, complex]] = [(0, complex(spectrum[0].real, 0.0))]
    for k in range(1, harmonics + 1):
        a = 0.5 * (spectrum[k] + np.conj(spectrum[samples - k]))
        coeffs.append((k, complex(a)))
        coeffs.append((-k, complex(a).conjugate()))
    mags = [abs(v) for k, v in coeffs if k > 0 and abs(v) > 0]
    ks = [k for k, v in coeffs if k > 0 and abs(v) > 0]
    if len(mags) >= 2:
        slope, intercept = np.polyfit(ks, np.log(mags), 1)
        rate = max(-float(slope), 1e-6)
    else:
        rate = 1.0
    scale = max(
        (abs(v) * math.exp(rate * abs(k)) for k, v in coeffs if abs(v) > 0),
        default=1.0,
    )
    roof = AnalyticRoof(tuple(coeffs), decay_scale=scale * (1 + 1e-9), decay_rate=rate)
    return roof.normalized() if rescale else roof

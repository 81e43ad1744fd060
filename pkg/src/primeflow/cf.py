"""Continued fractions with prime denominators and certified rational brackets.

The denominator recurrence used throughout is

    q_0 = q_1 = 1,   q_{n+1} = a_n * q_n + q_{n-1}

with numerators seeded p_0 = 0, p_1 = 1 and the same recurrence.  A finite
quotient list (a_1, ..., a_N) therefore pins the irrational down to an open
interval; we fix a canonical representative by extending the quotient list
with an infinite tail of ones (a quadratic irrational), which lets every
bracketing interval be refined on demand with exact integer arithmetic.
For quotients all equal to 1 the canonical value is exactly (sqrt(5)-1)/2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import BudgetExhaustedError, PrecisionError

# First 12 primes decide Miller-Rabin exactly below ~3.3e24, past 2**64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_EXTRA_ROUNDS = 64

# Interval refinement floor for the stored canonical bracket.
_BRACKET_WIDTH_FLOOR = Fraction(1, 10**90)
_MIN_TAIL_LEVELS = 8


def _mr_round(n: int, base: int, d: int, r: int) -> bool:
    x = pow(base, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def probable_prime(n: int) -> tuple[bool, bool]:
    """Primality test.  Returns (is_prime, used_probabilistic_path).

    Deterministic below 2**64 (fixed witness set); above that, the fixed
    witnesses plus 64 pseudorandom rounds seeded by n, flagged in reports.
    """
    if n < 2:
        return False, False
    for p in _MR_WITNESSES:
        if n == p:
            return True, False
        if n % p == 0:
            return False, False
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for base in _MR_WITNESSES:
        if not _mr_round(n, base, d, r):
            return False, False
    if n < _MR_DETERMINISTIC_LIMIT:
        return True, False
    rng = random.Random(n)
    for _ in range(_MR_EXTRA_ROUNDS):
        base = rng.randrange(2, n - 1)
        if not _mr_round(n, base, d, r):
            return False, True
    return True, True


def is_prime(n: int) -> bool:
    return probable_prime(n)[0]


@dataclass(frozen=True)
class DiophantineParams:
    """Growth parameters: denominators must satisfy q_{n+1} >= c0 * e^(delta*q_n).

    d < delta is the horizon exponent used by the block-sum and orbit
    experiments (K_n = floor(e^(d*q_n))).
    """

    c0: float
    delta: float
    d: float = 0.3

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0 < self.d < self.delta:
            raise ValueError("d must satisfy 0 < d < delta")


def _run_recurrence(quotients: Sequence[int]) -> tuple[list[int], list[int]]:
    p = [0, 1]
    q = [1, 1]
    for a in quotients:
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    return p, q


@dataclass(frozen=True)
class ContinuedFraction:
    """Exact convergent data for a positive irrational below one.

    ``numerators``/``denominators`` hold p_0..p_{N+1}, q_0..q_{N+1} for the
    N supplied quotients.  ``value_interval`` is a pair of consecutive
    convergents of the canonical all-ones tail extension, bracketing the
    represented value; internal extended tables allow refining the bracket
    and choosing deeper rational approximants without re-deriving anything.
    """

    partial_quotients: tuple[int, ...]
    numerators: tuple[int, ...]
    denominators: tuple[int, ...]
    value_interval: tuple[Fraction, Fraction]
    _ext_p: tuple[int, ...]
    _ext_q: tuple[int, ...]

    # -- construction -------------------------------------------------

    @staticmethod
    def from_quotients(quotients: Sequence[int]) -> "ContinuedFraction":
        quotients = tuple(int(a) for a in quotients)
        if not quotients:
            raise ValueError("quotient sequence must be non-empty")
        if any(a < 1 for a in quotients):
            raise ValueError("all partial quotients must be >= 1")
        p, q = _run_recurrence(quotients)
        # Canonical all-ones tail, deep enough that the stored bracket is
        # far tighter than any desk-scale certificate will ever need.
        ep, eq = list(p), list(q)
        tail = 0
        while tail < _MIN_TAIL_LEVELS or eq[-1] * eq[-2] < _BRACKET_WIDTH_FLOOR.denominator:
            ep.append(ep[-1] + ep[-2])
            eq.append(eq[-1] + eq[-2])
            tail += 1
        lo = Fraction(ep[-2], eq[-2])
        hi = Fraction(ep[-1], eq[-1])
        if lo > hi:
            lo, hi = hi, lo
        return ContinuedFraction(
            partial_quotients=quotients,
            numerators=tuple(p),
            denominators=tuple(q),
            value_interval=(lo, hi),
            _ext_p=tuple(ep),
            _ext_q=tuple(eq),
        )

    # -- basic accessors ----------------------------------------------

    @property
    def depth(self) -> int:
        """Number of supplied quotients N."""
        return len(self.partial_quotients)

    @property
    def max_level(self) -> int:
        """Highest index with a stored real denominator (N+1)."""
        return len(self.denominators) - 1

    @property
    def max_approximant_level(self) -> int:
        """Highest level usable as a rational approximant (extended table)."""
        return len(self._ext_q) - 2

    def convergent(self, level: int) -> Fraction:
        """p_level / q_level, extended-tail levels allowed."""
        if not 0 <= level < len(self._ext_q):
            raise IndexError(f"level {level} out of range")
        return Fraction(self._ext_p[level], self._ext_q[level])

    def q(self, level: int) -> int:
        return self._ext_q[level]

    def p(self, level: int) -> int:
        return self._ext_p[level]

    def approximation_error_bound(self, level: int) -> Fraction:
        """Certified bound on |alpha - p_level/q_level| for the canonical value."""
        if not 0 <= level <= self.max_approximant_level:
            raise PrecisionError(
                f"no convergent stored past level {self.max_approximant_level}"
            )
        return Fraction(1, self._ext_q[level] * self._ext_q[level + 1])

    def level_for_error(self, bound: Fraction) -> int:
        """Smallest level whose approximation error bound is below ``bound``."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        for m in range(self.max_approximant_level + 1):
            if self.approximation_error_bound(m) < bound:
                return m
        raise PrecisionError(
            f"stored convergents cannot reach error bound {bound}"
        )

    def interval_at(self, level: int) -> tuple[Fraction, Fraction]:
        """Bracket by consecutive extended convergents at the given level."""
        if not 1 <= level <= len(self._ext_q) - 1:
            raise IndexError(f"level {level} out of range")
        a = self.convergent(level - 1)
        b = self.convergent(level)
        return (a, b) if a <= b else (b, a)

    def refined_interval(self, max_width: Fraction) -> tuple[Fraction, Fraction]:
        """A bracket of width below ``max_width`` (exact rationals)."""
        if max_width <= 0:
            raise ValueError("max_width must be positive")
        for m in range(1, len(self._ext_q)):
            if Fraction(1, self._ext_q[m - 1] * self._ext_q[m]) < max_width:
                return self.interval_at(m)
        raise PrecisionError(f"cannot refine interval below width {max_width}")

    def value_float(self) -> float:
        lo, hi = self.value_interval
        return float((lo + hi) / 2)

    # -- distance to the nearest integer -------------------------------

    def nearest_integer_distance(
        self, k: int, *, ceiling: int = 10**12
    ) -> tuple[Fraction, Fraction]:
        """Exact rational interval certainly containing dist(k*alpha, Z).

        The bracket is refined until its width times |k| is below 1/4 (so
        at most one fold of the distance function occurs) and then further
        until the lower endpoint is certified positive; convergent
        endpoints can hit integers exactly when their denominator divides
        k, but the canonical value itself is irrational, so deepening
        always resolves this.
        """
        if k == 0:
            raise ValueError("k must be nonzero")
        k = abs(k)
        if k > ceiling:
            raise PrecisionError(f"|k| exceeds configured ceiling {ceiling}")

        def dist(t: Fraction) -> Fraction:
            r = t % 1
            return min(r, 1 - r)

        # 1/4 would already prevent double folds; go finer so the reported
        # interval is tight enough to be informative in bound reports.
        start = None
        for m in range(1, len(self._ext_q)):
            if Fraction(1, self._ext_q[m - 1] * self._ext_q[m]) < Fraction(1, 1024 * k):
                start = m
                break
        if start is None:
            raise PrecisionError(f"stored bracket too wide for k={k}")
        # Intersect certificates from two consecutive valid depths: a single
        # bracket endpoint can realize a degenerate extreme exactly (e.g. the
        # distance 1/q_{n+1} for k = q_n), which the other depth avoids.
        certs: list[tuple[Fraction, Fraction]] = []
        for m in range(start, len(self._ext_q)):
            lo, hi = self.interval_at(m)
            a, b = k * lo, k * hi
            floor_a, floor_b = a - a % 1, b - b % 1
            if floor_a != floor_b:
                continue  # an endpoint-adjacent integer is inside; deepen
            low = min(dist(a), dist(b))
            if low == 0:
                continue  # an endpoint hit an integer exactly; deepen
            half = floor_a + Fraction(1, 2)
            high = Fraction(1, 2) if a <= half <= b else max(dist(a), dist(b))
            certs.append((low, high))
            if len(certs) == 2:
                return max(certs[0][0], certs[1][0]), min(certs[0][1], certs[1][1])
        if certs:
            return certs[0]
        raise PrecisionError(f"could not certify dist(k*alpha) > 0 for k={k}")


def convergents(partial_quotients: Sequence[int]) -> ContinuedFraction:
    """Build the full convergent table for a quotient sequence."""
    return ContinuedFraction.from_quotients(partial_quotients)


# -- membership construction ------------------------------------------


def _growth_threshold(c0: float, delta: float, qn: int) -> mpmath.mpf:
    digits = int(delta * qn / 2.302585) + 40
    with mpmath.workdps(digits):
        return mpmath.mpf(c0) * mpmath.exp(mpmath.mpf(delta) * qn)


@dataclass(frozen=True)
class ConstructionRecord:
    """Per-level search outcome from ``construct_alpha_in_D``."""

    level: int
    quotient: int
    denominator: int
    candidates_scanned: int
    used_probabilistic: bool


def construct_alpha_in_D(
    params: DiophantineParams,
    bits: Sequence[int] | str,
    levels: int,
    *,
    search_ceiling: int = 10**9,
    magnitude_ceiling: float = 1e80,
) -> tuple[ContinuedFraction, list[ConstructionRecord]]:
    """Choose quotients so every new denominator is a prime above c0*e^(delta*q_n).

    bit 0 picks the smallest admissible quotient at that level, bit 1 the
    second smallest; distinct bit strings therefore give distinct quotient
    sequences.  Raises BudgetExhaustedError once the growth threshold
    exceeds ``magnitude_ceiling`` or a level scans more than
    ``search_ceiling`` candidates; this marks the desk-scale truncation
    point, not a failure.
    """
    bit_list = [int(b) for b in bits]
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if len(bit_list) < levels:
        raise ValueError("bit sequence shorter than requested levels")
    if any(b not in (0, 1) for b in bit_list):
        raise ValueError("bits must be 0 or 1")

    quotients: list[int] = []
    records: list[ConstructionRecord] = []
    p = [0, 1]
    q = [1, 1]
    for n in range(1, levels + 1):
        qn, qn_prev = q[-1], q[-2]
        threshold = _growth_threshold(params.c0, params.delta, qn)
        if threshold > magnitude_ceiling:
            raise BudgetExhaustedError(
                f"level {n}: growth threshold c0*e^(delta*q_{n}) ~ {mpmath.nstr(threshold, 6)} "
                f"exceeds magnitude ceiling {magnitude_ceiling:g}"
            )
        a_min = int(mpmath.floor((threshold - qn_prev) / qn)) + 1
        a_min = max(a_min, 1)
        want = 2 if bit_list[n - 1] else 1
        found = 0
        scanned = 0
        a = a_min
        while True:
            scanned += 1
            if scanned > search_ceiling:
                raise BudgetExhaustedError(
                    f"level {n}: scanned {search_ceiling} candidates without a hit"
                )
            value = a * qn + qn_prev
            if value > threshold:
                ok, probabilistic = probable_prime(value)
                if ok:
                    found += 1
                    if found == want:
                        break
            a += 1
        quotients.append(a)
        records.append(
            ConstructionRecord(
                level=n,
                quotient=a,
                denominator=a * qn + qn_prev,
                candidates_scanned=scanned,
                used_probabilistic=probabilistic,
            )
        )
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    return ContinuedFraction.from_quotients(quotients), records


# -- verification ------------------------------------------------------


@dataclass(frozen=True)
class LevelCheck:
    level: int
    q: int
    prime_ok: bool | None
    prime_probabilistic: bool
    growth_ratio: float | None
    growth_ok: bool | None
    eq1_ok: bool | None

    @property
    def all_ok(self) -> bool:
        return all(v is not False for v in (self.prime_ok, self.growth_ok, self.eq1_ok))


@dataclass(frozen=True)
class DiophantineReport:
    levels: tuple[LevelCheck, ...]
    from_level: int

    @property
    def all_ok(self) -> bool:
        return all(c.all_ok for c in self.levels)

    @property
    def used_probabilistic(self) -> bool:
        return any(c.prime_probabilistic for c in self.levels)


def approximation_bracketing_ok(cf: ContinuedFraction, n: int) -> bool:
    """Exact check that 1/(2*q_{n+1}) < |q_n*x - p_n| < 1/q_{n+1}.

    Both endpoints of the stored value interval are tested, so the check
    holds for every point of the interval (the map x -> q_n*x - p_n is
    linear and does not change sign inside it).
    """
    if not 0 <= n <= cf.max_level - 1:
        raise IndexError(f"need q_{n+1} stored; have levels up to {cf.max_level}")
    qn, pn = cf.denominators[n], cf.numerators[n]
    qn1 = cf.denominators[n + 1]
    lower, upper = Fraction(1, 2 * qn1), Fraction(1, qn1)
    for endpoint in cf.value_interval:
        v = abs(qn * endpoint - pn)
        if not (lower < v < upper):
            return False
    return True


def verify_diophantine(
    cf: ContinuedFraction, params: DiophantineParams, from_level: int = 2
) -> DiophantineReport:
    """Per-level report: primality of q_n, growth q_{n+1} >= c0*e^(delta*q_n),
    and the exact rational bracketing check at that level.

    Growth and bracketing are reported for levels with q_{n+1} stored; the
    final denominator gets a primality-only row.
    """
    if cf.max_level < from_level:
        raise ValueError("continued fraction too shallow for requested from_level")
    checks = []
    for n in range(from_level, cf.max_level + 1):
        qn = cf.denominators[n]
        prime_ok, probabilistic = probable_prime(qn)
        if n <= cf.max_level - 1:
            qn1 = cf.denominators[n + 1]
            threshold = _growth_threshold(params.c0, params.delta, qn)
            with mpmath.workdps(mpmath.mp.dps + 30):
                ratio = mpmath.mpf(qn1) / threshold
                growth_ok = bool(ratio >= 1)
                growth_ratio = float(ratio) if ratio < mpmath.mpf(1e300) else float("inf")
            eq1_ok = approximation_bracketing_ok(cf, n)
        else:
            growth_ratio, growth_ok, eq1_ok = None, None, None
        checks.append(
            LevelCheck(
                level=n,
                q=qn,
                prime_ok=prime_ok,
                prime_probabilistic=probabilistic,
                growth_ratio=growth_ratio,
                growth_ok=growth_ok,
                eq1_ok=eq1_ok,
            )
        )
    return DiophantineReport(levels=tuple(checks), from_level=from_level)


def nearest_integer_distance(
    k: int, cf: ContinuedFraction, *, ceiling: int = 10**12
) -> tuple[Fraction, Fraction]:
    """Module-level alias for ``ContinuedFraction.nearest_integer_distance``."""
    return cf.nearest_integer_distance(k, ceiling=ceiling)

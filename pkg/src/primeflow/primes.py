"""Segmented prime sieve, counting functions, and residue-class ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .errors import BudgetExhaustedError

_DEFAULT_SEGMENT = 1 << 20
_DEFAULT_CEILING = 10**9


@dataclass
class PrimeTable:
    """All primes up to ``limit`` with a lazy residue-class index."""

    limit: int
    primes: np.ndarray
    _residue_index: dict = field(default_factory=dict, repr=False)

    def count(self) -> int:
        return len(self.primes)

    def residue_class(self, q: int, a: int) -> np.ndarray:
        """Ascending primes congruent to a mod q (cached after first use)."""
        key = (q, a)
        if key not in self._residue_index:
            self._residue_index[key] = self.primes[self.primes % q == a]
        return self._residue_index[key]


def sieve(
    limit: int,
    *,
    segment_size: int = _DEFAULT_SEGMENT,
    ceiling: int = _DEFAULT_CEILING,
) -> PrimeTable:
    """Segmented Eratosthenes sieve up to and including ``limit``."""
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if limit > ceiling:
        raise BudgetExhaustedError(f"limit {limit} exceeds ceiling {ceiling}")
    root = int(math.isqrt(limit))
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for p in range(2, int(math.isqrt(root)) + 1):
        if base[p]:
            base[p * p :: p] = False
    small_primes = np.flatnonzero(base)

    chunks = [small_primes[small_primes <= limit]]
    start = root + 1
    while start <= limit:
        stop = min(start + segment_size, limit + 1)
        flags = np.ones(stop - start, dtype=bool)
        for p in small_primes:
            p = int(p)
            first = ((start + p - 1) // p) * p
            if first < p * p:
                first = p * p
            if first < stop:
                flags[first - start :: p] = False
        chunks.append(np.flatnonzero(flags) + start)
        start = stop
    return PrimeTable(limit=limit, primes=np.concatenate(chunks).astype(np.int64))


def pi_x(table: PrimeTable, x: float) -> int:
    """Number of primes <= x."""
    if x > table.limit:
        raise ValueError(f"x={x} beyond table limit {table.limit}")
    return int(np.searchsorted(table.primes, math.floor(x), side="right"))


def pi_x_q_a(table: PrimeTable, x: float, q: int, a: int) -> int:
    """Number of primes <= x congruent to a mod q."""
    if x > table.limit:
        raise ValueError(f"x={x} beyond table limit {table.limit}")
    if not 0 <= a < q:
        raise ValueError("need 0 <= a < q")
    cls = table.residue_class(q, a)
    return int(np.searchsorted(cls, math.floor(x), side="right"))


def li_x(x: float) -> float:
    """Offset logarithmic integral: the integral of dt/log(t) from 2 to x.

    Adaptive quadrature with an extra split near the lower endpoint where
    the integrand is steep; relative error well below 1e-10.
    """
    if x < 2:
        raise ValueError("li_x is defined for x >= 2")
    if x == 2:
        return 0.0
    split = min(x, 16.0)
    head, _ = quad(lambda t: 1.0 / math.log(t), 2.0, split, epsabs=0.0, epsrel=1e-13, limit=200)
    if x <= 16.0:
        return head
    tail, _ = quad(lambda t: 1.0 / math.log(t), split, x, epsabs=0.0, epsrel=1e-13, limit=200)
    return head + tail


def sw_ratio(table: PrimeTable, x: float, q: int, a: int) -> float:
    """pi(x; q, a) * (q - 1) / Li(x); tends to 1 for coprime classes."""
    return pi_x_q_a(table, x, q, a) * (q - 1) / li_x(x)


@dataclass(frozen=True)
class SwRow:
    q: int
    a: int
    count: int
    ratio: float
    flags: tuple[str, ...]


def sw_report(table: PrimeTable, x: float, q: int) -> list[SwRow]:
    """Per-class ratio report for the modulus q, preconditions flagged not fatal."""
    from .cf import is_prime  # local import: cf owns the primality tester

    base_flags: list[str] = []
    if not is_prime(q):
        base_flags.append("q-not-prime")
    if q >= math.log(x) ** 2:
        base_flags.append("q-too-large-for-uniformity")
    rows = []
    for a in range(q):
        flags = list(base_flags)
        if math.gcd(a, q) != 1:
            flags.append("class-not-coprime")
        rows.append(
            SwRow(
                q=q,
                a=a,
                count=pi_x_q_a(table, x, q, a),
                ratio=sw_ratio(table, x, q, a),
                flags=tuple(flags),
            )
        )
    return rows


# -- binary serialization: little-endian 64-bit deltas -------------------------


def save_primes_bin(table: PrimeTable, path: str | Path) -> None:
    deltas = np.diff(table.primes, prepend=0).astype("<u8")
    deltas.tofile(path)


def load_primes_bin(path: str | Path, limit: int | None = None) -> PrimeTable:
    deltas = np.fromfile(path, dtype="<u8")
    primes = np.cumsum(deltas).astype(np.int64)
    if limit is None:
        limit = int(primes[-1]) if len(primes) else 2
    return PrimeTable(limit=limit, primes=primes)

"""Kronecker class numbers of negative discriminants.

H(D) is the number of reduced positive definite forms of discriminant D,
imprimitive forms included. Two routes are provided: direct form
enumeration (production) and a truncated L-series evaluation of the same
quantity (cross-validator).
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ConsistencyError, DomainError, RangeError
from .intervals import IntervalSpec
from .numthy import PV_CONSTANT, cached_primes
from .parallel import parallel_map

# Distance from the nearest integer above which an L-series estimate is rejected.
ROUNDING_MARGIN = 0.4
# Fraction of table entries re-derived through the L-series route.
DEFAULT_SAMPLE = 0.01


def check_discriminant(D: int) -> int:
    D = int(D)
    if D >= 0 or D % 4 not in (0, 1):
        raise DomainError(f"{D} is not a negative discriminant")
    return D


def decompose(D: int) -> list[tuple[int, int]]:
    """All (d, f) with D = d f^2, f >= 1 and d = 0, 1 mod 4, by increasing f."""
    D = check_discriminant(D)
    out = []
    for f in range(1, math.isqrt(-D) + 1):
        if D % (f * f) == 0:
            d = D // (f * f)
            if d % 4 in (0, 1):
                out.append((d, f))
    return out


def reduced_forms(D: int, primitive: bool = False) -> list[tuple[int, int, int]]:
    """Reduced forms (A, B, C) of discriminant D: |B| <= A <= C, B >= 0 if |B| = A or A = C."""
    D = check_discriminant(D)
    forms = []
    amax = math.isqrt(-D // 3)
    for A in range(1, amax + 1):
        for B in range(-A + 1, A + 1):
            if (B - D) % 2:
                continue
            num = B * B - D
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C < A or (C == A and B < 0):
                continue
            if primitive and math.gcd(math.gcd(A, B), C) != 1:
                continue
            forms.append((A, B, C))
    return forms


def reduced_form_count(D: int, primitive: bool = False) -> int:
    return len(reduced_forms(D, primitive))


def form_count_sieve(N: int) -> np.ndarray:
    """cnt[n] = number of reduced forms of discriminant -n, for 0 <= n <= N.

    Enumerates every reduced form with 4AC - B^2 <= N once, so the whole
    table costs about as much as the number of forms it counts.
    """
    cnt = np.zeros(N + 1, dtype=np.int64)
    for A in range(1, math.isqrt(N // 3) + 1):
        for B in range(-A + 1, A + 1):
            c_min = A if B >= 0 else A + 1
            c_max = (N + B * B) // (4 * A)
            if c_max < c_min:
                continue
            n = 4 * A * np.arange(c_min, c_max + 1, dtype=np.int64) - B * B
            cnt += np.bincount(n, minlength=N + 1)
    return cnt


# ---------------------------------------------------------------------------
# L-series route
# ---------------------------------------------------------------------------

def unit_factor(d: int) -> int:
    """w(d) / 2: 3 for d = -3, 2 for d = -4, else 1."""
    return {-3: 3, -4: 2}.get(d, 1)


@lru_cache(maxsize=4096)
def _period(d: int) -> np.ndarray:
    return _kernels.kronecker_period(d).astype(np.float64)


_inv_cache: dict[str, np.ndarray] = {"inv": np.zeros(0)}


def _inverse_integers(U: int) -> np.ndarray:
    inv = _inv_cache["inv"]
    if len(inv) < U:
        inv = 1.0 / np.arange(1, max(U, 2 * len(inv)) + 1, dtype=np.float64)
        _inv_cache["inv"] = inv
    return inv[:U]


def l1_truncated(d: int, U: int) -> tuple[float, float]:
    """Partial sum of L(1, chi_d) over n <= U and a bound on the omitted tail."""
    d = check_discriminant(d)
    if U < 1:
        raise DomainError("U must be positive")
    q = -d
    period = _period(d)
    idx = np.arange(1, U + 1, dtype=np.int64) % q
    value = float(period[idx] @ _inverse_integers(U))
    tail = 2 * PV_CONSTANT * math.sqrt(q) * math.log(q) / U
    return value, tail


def lseries_estimate(D: int) -> tuple[float, int]:
    """Pre-rounding L-series value of H(D) and the truncation point used.

    Each (d, f) term is sqrt|d| L(1, chi_d) / pi scaled by w(d)/2, which
    turns the weighted class count into the all-forms count. U is chosen so
    the summed tail bounds stay below ROUNDING_MARGIN.
    """
    pieces = decompose(D)
    budget = 0.0
    for d, _ in pieces:
        q = -d
        budget += unit_factor(d) * math.sqrt(q) * 2 * PV_CONSTANT * math.sqrt(q) * math.log(q) / math.pi
    U = max(1, math.ceil(budget / ROUNDING_MARGIN) + 1)
    total = 0.0
    for d, _ in pieces:
        value, _tail = l1_truncated(d, U)
        total += unit_factor(d) * math.sqrt(-d) * value / math.pi
    return total, U


def kronecker_class_number(D: int, mode: str = "forms") -> int:
    D = check_discriminant(D)
    if mode == "forms":
        return reduced_form_count(D)
    if mode == "lseries":
        value, U = lseries_estimate(D)
        h = round(value)
        if abs(value - h) > ROUNDING_MARGIN:
            raise ConsistencyError(
                f"L-series value {value:.6f} for D={D} (U={U}) is not within "
                f"{ROUNDING_MARGIN} of an integer"
            )
        return int(h)
    raise DomainError(f"unknown class-number mode {mode!r}")


# ---------------------------------------------------------------------------
# Tables over primes
# ---------------------------------------------------------------------------

def traces_below(p: int) -> int:
    """Number of integers r with 0 < r < 2 sqrt(p)."""
    return math.isqrt(4 * p - 1)


@dataclass(frozen=True)
class ClassNumberTable:
    """H(r^2 - 4p) for every prime p <= limit and 0 < r < 2 sqrt(p).

    Values for prime ``primes[i]`` live in ``values[offsets[i]:offsets[i+1]]``
    indexed by r - 1.
    """

    limit: int
    primes: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.values)

    def _index(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise RangeError(f"prime {p} is not covered by the table (limit {self.limit})")
        return i

    def row(self, p: int) -> np.ndarray:
        """H(r^2 - 4p) for r = 1, 2, ... as an array."""
        i = self._index(p)
        return self.values[self.offsets[i] : self.offsets[i + 1]]

    def get(self, p: int, r: int) -> int:
        row = self.row(p)
        r = abs(r)
        if not 0 < r <= len(row):
            raise RangeError(f"r={r} outside 0 < r < 2 sqrt({p})")
        return int(row[r - 1])

    def entries(self) -> Iterator[tuple[int, int, int]]:
        for i, p in enumerate(self.primes.tolist()):
            lo = int(self.offsets[i])
            for r, h in enumerate(self.values[lo : int(self.offsets[i + 1])].tolist(), 1):
                yield p, r, h

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "r", "D", "H"])
        for p, r, h in self.entries():
            w.writerow([p, r, r * r - 4 * p, h])
        return buf.getvalue()

    @classmethod
    def from_entries(cls, limit: int, entries) -> "ClassNumberTable":
        """Rebuild from (p, r, H) records sorted by (p, r)."""
        primes, offsets, values = [], [0], []
        for p, r, h in entries:
            if not primes or primes[-1] != p:
                if primes:
                    offsets.append(len(values))
                primes.append(p)
            if r != len(values) - offsets[-1] + 1:
                raise DomainError(f"class-number records out of order at p={p}, r={r}")
            values.append(h)
        offsets.append(len(values))
        return cls(
            int(limit),
            np.asarray(primes, dtype=np.int64),
            np.asarray(offsets, dtype=np.int64),
            np.asarray(values, dtype=np.int64),
        )


def expected_table_size(x: int) -> int:
    return sum(traces_below(p) for p in cached_primes(max(x, 2)).primes.tolist() if p <= x)


def h_table(
    x: int,
    sample: float = DEFAULT_SAMPLE,
    seed: int = 0,
    workers: int = 1,
) -> ClassNumberTable:
    """Class numbers for all primes p <= x via batched form enumeration.

    A random ``sample`` fraction of the entries (at least one) is re-derived
    with the L-series route; any disagreement raises ConsistencyError.
    """
    if x < 2:
        raise DomainError("table limit must be >= 2")
    primes = cached_primes(x).primes
    counts = np.array([traces_below(p) for p in primes.tolist()], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    cnt = form_count_sieve(4 * x)
    values = np.empty(int(offsets[-1]), dtype=np.int64)
    for i, p in enumerate(primes.tolist()):
        r = np.arange(1, counts[i] + 1, dtype=np.int64)
        values[offsets[i] : offsets[i + 1]] = cnt[4 * p - r * r]
    table = ClassNumberTable(int(x), primes, offsets, values)
    if sample > 0:
        cross_check(table, sample=sample, seed=seed, workers=workers)
    return table


def cross_check(
    table: ClassNumberTable, sample: float = 1.0, seed: int = 0, workers: int = 1
) -> int:
    """Compare table entries against the L-series route; returns entries checked."""
    entries = list(table.entries())
    if sample < 1.0:
        k = max(1, round(sample * len(entries)))
        entries = sorted(random.Random(seed).sample(entries, k))

    def check(entry):
        p, r, h = entry
        return kronecker_class_number(r * r - 4 * p, "lseries")

    got = parallel_map(check, entries, workers)
    for (p, r, h), g in zip(entries, got):
        if g != h:
            raise ConsistencyError(f"class number mismatch at p={p} r={r}: table {h}, lseries {g}")
    return len(entries)


def h_p_sum(table: ClassNumberTable, p: int, iv: IntervalSpec) -> int:
    """Sum of H(r^2 - 4p) over integers r in [2 sqrt(p) alpha, 2 sqrt(p) beta]."""
    row = table.row(p)
    lo, hi = iv.r_range(p)
    lo, hi = max(lo, 1), min(hi, len(row))
    if lo > hi:
        return 0
    return int(row[lo - 1 : hi].sum())

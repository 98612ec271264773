"""Elliptic curves y^2 = x^3 + a x + b over prime fields.

Frobenius traces (naive character sum and baby-step giant-step), Frobenius
angles, F_p-isomorphism classes and log-weighted prime counts of a single
curve.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import DomainError, ReductionError
from .intervals import IntervalSpec
from .numthy import (
    cached_primes,
    enumerate_characters,
    is_prime,
    legendre_by_euler,
    quartic_symbol,
    residue_table,
)
from .parallel import chunks, parallel_map

# Primes at or above this use baby-step giant-step under backend="auto".
BSGS_THRESHOLD = 10_000
# Points tried before baby-step giant-step gives up and falls back to naive.
BSGS_MAX_POINTS = 8

BACKENDS = ("naive", "bsgs", "auto")


@dataclass(frozen=True)
class CurveParams:
    """The Weierstrass pair (a, b) of E(a, b): y^2 = x^3 + a x + b."""

    a: int
    b: int

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a**3 + 27 * self.b**2)

    def is_good(self, p: int) -> bool:
        """Good reduction at p: p odd and p does not divide 4a^3 + 27b^2.

        p = 3 qualifies when 3 does not divide a; its trace comes from the
        same point count as every other prime.
        """
        return p >= 3 and (4 * self.a**3 + 27 * self.b**2) % p != 0

    def reduce(self, p: int) -> "CurveParams":
        return CurveParams(self.a % p, self.b % p)


@dataclass(frozen=True)
class TraceResult:
    p: int
    lam: int

    @property
    def normalized(self) -> float:
        return self.lam / (2.0 * math.sqrt(self.p))


def _require_good(E: CurveParams, p: int) -> None:
    if p >= _kernels.MAX_KERNEL_PRIME or not is_prime(p):
        raise DomainError(f"{p} is not a supported prime")
    if not E.is_good(p):
        raise ReductionError(f"E({E.a},{E.b}) has bad reduction at p={p}")


def count_points(E: CurveParams, p: int) -> int:
    """Projective points of y^2 = x^3 + a x + b over F_p by exhaustive search.

    Works for singular reductions too, where no trace is defined.
    """
    squares: dict[int, int] = {}
    for y in range(p):
        squares[y * y % p] = squares.get(y * y % p, 0) + 1
    return 1 + sum(squares.get((x**3 + E.a * x + E.b) % p, 0) for x in range(p))


def trace_naive(E: CurveParams, p: int) -> TraceResult:
    """lambda = -sum_x (x^3 + a x + b | p)."""
    _require_good(E, p)
    chi = residue_table(p).table
    return TraceResult(p, int(_kernels._naive_one(E.a % p, E.b % p, p, chi)))


def trace_bsgs(E: CurveParams, p: int, max_points: int = BSGS_MAX_POINTS) -> TraceResult:
    """Group-order search in the Hasse interval; falls back to the naive sum
    when the order stays ambiguous (common for very small p)."""
    _require_good(E, p)
    lam, status = _kernels.bsgs_trace(E.a % p, E.b % p, p, max_points)
    if status != _kernels.BSGS_OK:
        return trace_naive(E, p)
    return TraceResult(p, int(lam))


def trace(E: CurveParams, p: int, backend: str = "auto") -> TraceResult:
    if backend == "naive" or (backend == "auto" and p < BSGS_THRESHOLD):
        return trace_naive(E, p)
    if backend in ("bsgs", "auto"):
        return trace_bsgs(E, p)
    raise DomainError(f"unknown backend {backend!r}")


def angle(t: TraceResult) -> float:
    """Frobenius angle in [0, pi]."""
    return math.acos(max(-1.0, min(1.0, t.normalized)))


# ---------------------------------------------------------------------------
# Isomorphism classes
# ---------------------------------------------------------------------------

def _require_large_prime(p: int) -> None:
    if p <= 3 or not is_prime(p):
        raise DomainError(f"isomorphism machinery needs a prime p > 3, got {p}")


def iso_class_size(E: CurveParams, p: int) -> int:
    """Number of pairs (mu^4 a, mu^6 b), mu in F_p^*, i.e. the class size."""
    _require_large_prime(p)
    if not E.is_good(p):
        raise ReductionError(f"E({E.a},{E.b}) is singular mod {p}")
    a, b = E.a % p, E.b % p
    if a == 0 and p % 3 == 1:
        return (p - 1) // 6
    if b == 0 and p % 4 == 1:
        return (p - 1) // 4
    return (p - 1) // 2


def orbit(E: CurveParams, p: int) -> set[tuple[int, int]]:
    """All (mu^4 a, mu^6 b) mod p by exhaustive enumeration of mu."""
    a, b = E.a % p, E.b % p
    out = set()
    for mu in range(1, p):
        m2 = mu * mu % p
        out.add((m2 * m2 * a % p, m2 * m2 % p * m2 * b % p))
    return out


def is_isomorphic_search(E1: CurveParams, E2: CurveParams, p: int) -> bool:
    """True iff c = m^4 a and d = m^6 b for some m in F_p^*."""
    a, b, c, d = E1.a % p, E1.b % p, E2.a % p, E2.b % p
    for m in range(1, p):
        m2 = m * m % p
        m4 = m2 * m2 % p
        if m4 * a % p == c and m4 * m2 * b % p == d:
            return True
    return False


def is_isomorphic(E1: CurveParams, E2: CurveParams, p: int) -> bool:
    """F_p-isomorphism test by residue criteria.

    For p = 1 mod 4: c/a is a fourth power and (c/a)^3 = (d/b)^2.
    For p = 3 mod 4: c/a and d/b are squares and (c/a)^3 = (d/b)^2.
    Curves on an axis (p | abcd) go through the direct search instead.
    """
    _require_large_prime(p)
    a, b, c, d = E1.a % p, E1.b % p, E2.a % p, E2.b % p
    if a * b * c * d % p == 0:
        return is_isomorphic_search(E1, E2, p)
    u = c * pow(a, -1, p) % p
    v = d * pow(b, -1, p) % p
    if pow(u, 3, p) != v * v % p:
        return False
    if p % 4 == 1:
        return pow(u, (p - 1) // 4, p) == 1
    return legendre_by_euler(u, p) == 1 and legendre_by_euler(v, p) == 1


@lru_cache(maxsize=16)
def full_trace_table(p: int) -> tuple[np.ndarray, np.ndarray]:
    """(lambda, good) arrays of shape (p, p) indexed by residues (a, b)."""
    if p < 3 or not is_prime(p):
        raise DomainError(f"trace tables need an odd prime, got {p}")
    lam = _kernels.trace_table(p, residue_table(p).table)
    a = np.arange(p, dtype=np.int64)
    core = (4 * (a**3 % p))[:, None] + (27 * (a * a % p))[None, :]
    good = core % p != 0
    lam.setflags(write=False)
    good.setflags(write=False)
    return lam, good


@lru_cache(maxsize=16)
def orbit_ids(p: int) -> np.ndarray:
    """Class label for every residue pair: the least code a*p + b in its orbit."""
    a = np.arange(p, dtype=np.int64)[:, None]
    b = np.arange(p, dtype=np.int64)[None, :]
    best = np.broadcast_to(a * p + b, (p, p)).copy()
    scalings = {(pow(mu, 4, p), pow(mu, 6, p)) for mu in range(1, p)}
    for m4, m6 in sorted(scalings):
        np.minimum(best, (m4 * a % p) * p + (m6 * b % p), out=best)
    best.setflags(write=False)
    return best


@dataclass(frozen=True)
class IsoClassSet:
    """F_p-isomorphism classes of nonsingular curves with trace r.

    ``representatives`` are off-axis classes (u, v both nonzero);
    ``axis_representatives`` have u = 0 or v = 0. Each representative is the
    least pair (u, v) of its class.
    """

    p: int
    r: int
    representatives: list[tuple[int, int]] = field(default_factory=list)
    sizes: list[int] = field(default_factory=list)
    axis_representatives: list[tuple[int, int]] = field(default_factory=list)
    axis_sizes: list[int] = field(default_factory=list)

    @property
    def off_axis_count(self) -> int:
        return len(self.representatives)

    @property
    def axis_count(self) -> int:
        return len(self.axis_representatives)

    def __len__(self) -> int:
        return self.off_axis_count + self.axis_count

    @property
    def curve_count(self) -> int:
        return sum(self.sizes) + sum(self.axis_sizes)


def classes_by_trace(p: int) -> dict[int, IsoClassSet]:
    """Every isomorphism class over F_p (p > 3), grouped by trace."""
    _require_large_prime(p)
    lam, good = full_trace_table(p)
    ids = orbit_ids(p)
    labels, first = np.unique(ids[good], return_index=True)
    traces = lam[good][first]
    out: dict[int, IsoClassSet] = {}
    for code, r in zip(labels.tolist(), traces.tolist()):
        u, v = divmod(code, p)
        cls = out.setdefault(r, IsoClassSet(p, r))
        size = iso_class_size(CurveParams(u, v), p)
        if u == 0 or v == 0:
            cls.axis_representatives.append((u, v))
            cls.axis_sizes.append(size)
        else:
            cls.representatives.append((u, v))
            cls.sizes.append(size)
    return out


def enumerate_iso_classes(p: int, r: int) -> IsoClassSet:
    return classes_by_trace(p).get(r, IsoClassSet(p, r))


def count_curves_with_trace(p: int, r: int) -> int:
    """Number of (a, b) in F_p^2 with nonzero discriminant and trace r."""
    return enumerate_iso_classes(p, r).curve_count


def trace_csv(p: int) -> str:
    lam, good = full_trace_table(p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "a", "b", "lambda"])
    for a, b in zip(*np.nonzero(good)):
        w.writerow([p, int(a), int(b), int(lam[a, b])])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Character-sum form of the box count
# ---------------------------------------------------------------------------

def box_count_direct(p: int, A: int, B: int, r_lo: int, r_hi: int) -> int:
    """#{|a| <= A, |b| <= B : p does not divide ab, r_lo <= lambda <= r_hi}."""
    lam, good = full_trace_table(p)
    a = np.arange(-A, A + 1) % p
    b = np.arange(-B, B + 1) % p
    sub_l = lam[np.ix_(a, b)]
    ok = good[np.ix_(a, b)] & (sub_l >= r_lo) & (sub_l <= r_hi)
    ok &= (a != 0)[:, None] & (b != 0)[None, :]
    return int(ok.sum())


def box_count_characters(p: int, A: int, B: int, r_lo: int, r_hi: int) -> complex:
    """The same count written as a sum over class representatives and characters.

    Uses quartic residue symbols for p = 1 mod 4 and Legendre symbols for
    p = 3 mod 4; the result is complex and should be an integer up to
    rounding.
    """
    _require_large_prime(p)
    reps = []
    for r, cls in classes_by_trace(p).items():
        if r_lo <= r <= r_hi:
            reps.extend(cls.representatives)
    group = enumerate_characters(p)
    char_total = group.matrix().sum(axis=0)  # sum over all chi of chi(w)
    a = np.arange(-A, A + 1) % p
    b = np.arange(-B, B + 1) % p
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(t, -1, p) for t in range(1, p)]
    if p % 4 == 1:
        quart = np.array([quartic_symbol(t, p) for t in range(p)])
        quart_sum = sum(quart**k for k in range(1, 5))
    else:
        leg = residue_table(p).table.astype(np.float64)
        principal = (np.arange(p) != 0).astype(np.float64)
    b_inv2 = inv[b] ** 2 % p
    terms = []
    for u, v in reps:
        ui, vi = pow(u, -1, p), pow(v, -1, p)
        w = (a[:, None] ** 3 % p * pow(ui, 3, p) % p) * (b_inv2[None, :] * (v * v % p) % p) % p
        chars = char_total[w] * ((b != 0)[None, :])
        if p % 4 == 1:
            weight = quart_sum[a * ui % p][:, None]
        else:
            wa = principal[a] + leg[a * ui % p]
            wb = principal[b] + leg[b * vi % p]
            weight = wa[:, None] * wb[None, :]
        terms.append(complex((weight * chars).sum()))
    norm = 4 * (p - 1)
    return complex(sum(sorted(terms, key=lambda z: (z.real, z.imag)))) / norm


# ---------------------------------------------------------------------------
# Prime sweeps for one curve
# ---------------------------------------------------------------------------

def _chi_pack(primes: np.ndarray, below: int) -> tuple[np.ndarray, np.ndarray]:
    offs = np.zeros(len(primes), dtype=np.int64)
    parts = []
    pos = 0
    for i, p in enumerate(primes.tolist()):
        offs[i] = pos
        if 3 <= p < below:
            parts.append(residue_table(p).table)
            pos += p
    pack = np.concatenate(parts) if parts else np.zeros(1, dtype=np.int8)
    return pack, offs


def _naive_below(backend: str) -> int:
    if backend == "naive":
        return _kernels.MAX_KERNEL_PRIME
    if backend == "bsgs":
        return 0
    if backend == "auto":
        return BSGS_THRESHOLD
    raise DomainError(f"unknown backend {backend!r}")


def window_hits(
    curves: Iterable[tuple[int, int]],
    primes: np.ndarray,
    iv: IntervalSpec,
    backend: str = "auto",
    workers: int = 1,
) -> np.ndarray:
    """Boolean matrix: curve c has good reduction at primes[i] and trace in the window."""
    pairs = np.asarray(list(curves), dtype=np.int64).reshape(-1, 2)
    primes = np.asarray(primes, dtype=np.int64)
    if len(primes) and primes[-1] >= _kernels.MAX_KERNEL_PRIME:
        raise DomainError("prime too large for the trace kernels")
    below = _naive_below(backend)
    pack, offs = _chi_pack(primes, below)
    bounds = [iv.r_range(p) for p in primes.tolist()]
    r_lo = np.array([lo for lo, _ in bounds], dtype=np.int64)
    r_hi = np.array([hi for _, hi in bounds], dtype=np.int64)

    def run(block):
        return _kernels.window_hits(
            block[:, 0].copy(), block[:, 1].copy(), primes, r_lo, r_hi,
            pack, offs, below, BSGS_MAX_POINTS,
        )

    if len(pairs) == 0:
        return np.zeros((0, len(primes)), dtype=bool)
    size = max(1, -(-len(pairs) // (4 * workers)))
    parts = parallel_map(run, chunks(pairs, size), workers)
    return np.concatenate(parts, axis=0)


def theta_curve(E: CurveParams, iv: IntervalSpec, x: int, backend: str = "auto") -> float:
    """Sum of log p over good primes p <= x with alpha <= lambda/(2 sqrt p) <= beta."""
    if x < 2:
        return 0.0
    table = cached_primes(int(x))
    hits = window_hits([(E.a, E.b)], table.primes, iv, backend)[0]
    return math.fsum(table.logp[hits].tolist())

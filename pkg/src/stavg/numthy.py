"""Primes, residue symbols and Dirichlet characters modulo a prime."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from ._kernels import kronecker_period
from .calibration import PV as PV_CONSTANT
from .errors import CapacityError, DomainError

# Largest sieve bound accepted by sieve_primes (bytes of the bool array).
SIEVE_CAPACITY = 2_000_000_000


# ---------------------------------------------------------------------------
# Primes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``limit`` with their natural logarithms.

    Attributes:
        limit: Inclusive upper bound x.
        primes: Strictly increasing int64 array of the primes <= limit.
        logp: float64 array, ``logp[i] == log(primes[i])``.
    """

    limit: int
    primes: np.ndarray = field(repr=False)
    logp: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        for p, lp in zip(self.primes.tolist(), self.logp.tolist()):
            yield p, lp

    def window(self, lo: float, hi: float) -> slice:
        """Index slice of the primes p with lo < p <= hi."""
        i = int(np.searchsorted(self.primes, math.floor(lo), side="right"))
        j = int(np.searchsorted(self.primes, math.floor(hi), side="right"))
        return slice(i, max(i, j))

    def upto(self, x: float) -> "PrimeTable":
        """Sub-table of the primes <= x."""
        s = self.window(0, x)
        return PrimeTable(int(math.floor(x)), self.primes[s], self.logp[s])

    def in_class(self, q: int, a: int) -> np.ndarray:
        """Boolean mask of primes congruent to a modulo q."""
        return self.primes % q == a % q


def sieve_primes(x: int) -> PrimeTable:
    """Sieve of Eratosthenes up to and including ``x``."""
    x = int(x)
    if x < 1:
        raise DomainError(f"sieve bound must be >= 1, got {x}")
    if x > SIEVE_CAPACITY:
        raise CapacityError(f"sieve bound {x} exceeds capacity {SIEVE_CAPACITY}")
    flags = np.ones(x + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(x) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    return PrimeTable(x, primes, np.log(primes.astype(np.float64)))


@lru_cache(maxsize=8)
def cached_primes(x: int) -> PrimeTable:
    return sieve_primes(x)


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        y = pow(a, d, n)
        if y in (1, n - 1):
            continue
        for _ in range(s - 1):
            y = y * y % n
            if y == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of |n| by trial division."""
    n = abs(int(n))
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    result = n
    for l in factorize(n):
        result -= result // l
    return result


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def smallest_factor_sieve(n: int) -> np.ndarray:
    """spf[k] = least prime factor of k for 2 <= k <= n."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, math.isqrt(n) + 1):
        if spf[i] == 0:
            view = spf[i * i :: i]
            view[view == 0] = i
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf


# ---------------------------------------------------------------------------
# Residue symbols
# ---------------------------------------------------------------------------

def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a | n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise DomainError(f"Jacobi symbol needs odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n) for any nonzero n.

    (a | 2) is 0 for even a, +1 for a = +-1 mod 8 and -1 for a = +-3 mod 8;
    (a | -1) is the sign of a.
    """
    if n == 0:
        raise DomainError("Kronecker symbol undefined for n = 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        if a % 2 == 0:
            return 0
        n //= 2
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi(a, n)


def legendre_by_euler(a: int, p: int) -> int:
    t = pow(a % p, (p - 1) // 2, p)
    return -1 if t == p - 1 else t


@dataclass(frozen=True)
class ResidueTable:
    """Quadratic character modulo an odd prime as a lookup table."""

    p: int
    table: np.ndarray = field(repr=False)

    def __call__(self, t: int) -> int:
        return int(self.table[t % self.p])


@lru_cache(maxsize=64)
def residue_table(p: int) -> ResidueTable:
    if p < 3 or not is_prime(p):
        raise DomainError(f"residue table needs an odd prime, got {p}")
    chi = np.full(p, -1, dtype=np.int8)
    squares = (np.arange(1, (p - 1) // 2 + 1, dtype=np.int64) ** 2) % p
    chi[squares] = 1
    chi[0] = 0
    chi.setflags(write=False)
    return ResidueTable(p, chi)


@lru_cache(maxsize=256)
def primitive_root(p: int) -> int:
    """Least primitive root modulo the prime p."""
    if p == 2:
        return 1
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    qs = list(factorize(p - 1))
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def quartic_symbol(a: int, p: int) -> complex:
    """Biquadratic residue symbol (a / p)_4 for p = 1 mod 4.

    The order-4 element g^((p-1)/4), g the least primitive root, is sent
    to 1j.
    """
    if p % 4 != 1 or not is_prime(p):
        raise DomainError(f"quartic symbol needs a prime p = 1 mod 4, got {p}")
    if a % p == 0:
        return 0j
    t = pow(a % p, (p - 1) // 4, p)
    i_p = pow(primitive_root(p), (p - 1) // 4, p)
    return {1: 1 + 0j, p - 1: -1 + 0j, i_p: 1j, p - i_p: -1j}[t]


# ---------------------------------------------------------------------------
# Characters modulo a prime
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharacterGroup:
    """All p-1 Dirichlet characters modulo an odd prime p.

    Character k sends g^j to exp(2 pi i j k / (p-1)) where g is the least
    primitive root; index 0 is the principal character.
    """

    p: int
    g: int
    dlog: np.ndarray = field(repr=False)  # dlog[n] = j with g^j = n, -1 at n = 0

    def __len__(self) -> int:
        return self.p - 1

    def value(self, k: int, n: int) -> complex:
        n %= self.p
        if n == 0:
            return 0j
        j = int(self.dlog[n])
        return cmath.exp(2j * math.pi * ((j * k) % (self.p - 1)) / (self.p - 1))

    def values(self, k: int) -> np.ndarray:
        """Complex vector v with v[n] = chi_k(n) for 0 <= n < p."""
        m = self.p - 1
        phase = (self.dlog[1:] * (k % m)) % m
        out = np.zeros(self.p, dtype=np.complex128)
        out[1:] = np.exp(2j * np.pi * phase / m)
        return out

    def matrix(self) -> np.ndarray:
        """(p-1) x p array of all character tables, row k = character k."""
        m = self.p - 1
        phase = np.outer(np.arange(m), self.dlog[1:]) % m
        out = np.zeros((m, self.p), dtype=np.complex128)
        out[:, 1:] = np.exp(2j * np.pi * phase / m)
        return out


@lru_cache(maxsize=64)
def enumerate_characters(p: int) -> CharacterGroup:
    if p < 3 or not is_prime(p):
        raise DomainError(f"character groups are only built for odd primes, got {p}")
    g = primitive_root(p)
    dlog = np.full(p, -1, dtype=np.int64)
    t = 1
    for j in range(p - 1):
        dlog[t] = j
        t = t * g % p
    dlog.setflags(write=False)
    return CharacterGroup(p, g, dlog)


def orthogonality_sides(coeffs: Sequence[complex], q: int) -> tuple[float, float]:
    """Both sides of the mean-square character identity.

    Returns ``(sum_chi |sum_n a_n chi(n)|^2, phi(q) sum_a |sum_{n=a} a_n|^2)``
    for the sequence a_1..a_N given in ``coeffs``.
    """
    group = enumerate_characters(q)
    a = np.asarray(coeffs, dtype=np.complex128)
    n = np.arange(1, len(a) + 1) % q
    sums = group.matrix()[:, n] @ a
    lhs = math.fsum((np.abs(sums) ** 2).tolist())
    by_class = np.zeros(q, dtype=np.complex128)
    np.add.at(by_class, n, a)
    rhs = (q - 1) * math.fsum((np.abs(by_class[1:]) ** 2).tolist())
    return lhs, rhs


def fourth_moment(q: int, N: int) -> float:
    """sum over non-principal chi mod q of |sum_{n<=N} chi(n)|^4."""
    group = enumerate_characters(q)
    counts = np.bincount(np.arange(1, N + 1) % q, minlength=q).astype(np.float64)
    sums = group.matrix()[1:] @ counts
    return math.fsum((np.abs(sums) ** 4).tolist())


def polya_vinogradov_check(d: int, N: int) -> tuple[int, float]:
    """Character sum of chi_d up to N and the explicit bound 2 sqrt|d| log|d|."""
    if d >= 0 or d % 4 not in (0, 1):
        raise DomainError(f"{d} is not a negative discriminant")
    if N < 1:
        raise DomainError("N must be positive")
    q = -d
    period = np.roll(kronecker_period(d).astype(np.int64), -1)  # chi_d(1), ..., chi_d(q)
    full, rem = divmod(N, q)
    s = full * int(period.sum()) + int(period[:rem].sum())
    return s, PV_CONSTANT * math.sqrt(q) * math.log(q)

"""Arithmetic constants of the average Frobenius distribution.

c_f^r(n), the Euler products K_r and C, the multiplicative weight f(r),
and the partial sums that converge to K_r.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .numthy import cached_primes, factorize, kronecker, smallest_factor_sieve

# Cutoff used by k_window_sum.
WINDOW_CUTOFF = 100_000


@dataclass(frozen=True)
class TruncatedProduct:
    """Euler product over primes <= cutoff.

    The omitted factors all lie in (0, 1); their log-sum is at most
    1/cutoff^2, so the true product is in [value - tail_bound, value].
    """

    value: float
    cutoff: int
    tail_bound: float


def _tail(value: float, cutoff: int) -> float:
    return value * -math.expm1(-1.0 / cutoff**2)


# ---------------------------------------------------------------------------
# c_f^r(n)
# ---------------------------------------------------------------------------

def c_f_r(n: int, f: int, r: int) -> int:
    """Sum of (a | n) over a in [1, 4n] with (a, 4n) = 1 and (r^2 - a f^2, 4n) = 4.

    The symbol is the Kronecker symbol, so even n is allowed.
    """
    if n < 1 or f < 1 or r < 1:
        raise DomainError("c_f_r needs positive n, f, r")
    m = 4 * n
    total = 0
    for a in range(1, m + 1):
        if math.gcd(a, m) == 1 and math.gcd(r * r - a * f * f, m) == 4:
            total += kronecker(a, n)
    return total


def _odd_local(l: int, e: int, f: int, r: int) -> int:
    # sum over a mod l^e, l not dividing a(r^2 - a f^2), of (a|l)^e
    if f % l == 0:
        if r % l == 0:
            return 0
        base = l - 1 if e % 2 == 0 else 0
    elif r % l == 0:
        base = l - 1 if e % 2 == 0 else 0
    else:
        base = l - 2 if e % 2 == 0 else -1
    return l ** (e - 1) * base


def _two_local(s: int, f: int, r: int) -> int:
    # s = v_2(n); the 2-part of 4n is 2^(s+2)
    if s == 0:
        return sum(1 for a in (1, 3) if (r * r - a * f * f) % 4 == 0)
    total = 0
    for a in (1, 3, 5, 7):
        if (r * r - a * f * f) % 8 == 4:
            total += (1 if a in (1, 7) else -1) ** s
    return total << (s - 1)


def c_f_r_multiplicative(n: int, f: int, r: int, fac: dict[int, int] | None = None) -> int:
    """c_f^r(n) from its factorisation over the prime powers of 4n (CRT)."""
    fac = factorize(n) if fac is None else fac
    value = _two_local(fac.get(2, 0), f, r)
    for l, e in fac.items():
        if l == 2 or value == 0:
            continue
        value *= _odd_local(l, e, f, r)
    return value


# ---------------------------------------------------------------------------
# Euler products
# ---------------------------------------------------------------------------

def _generic_log_factor(l: np.ndarray) -> np.ndarray:
    # log of l(l^2-l-1) / ((l-1)(l^2-1)) = log(1 - 1/(l^3 - l^2 - l + 1))
    lf = l.astype(np.float64)
    return np.log1p(-1.0 / (((lf - 1.0) * lf - 1.0) * lf + 1.0))


def _divisor_log_factor(l: int) -> float:
    return -math.log1p(-1.0 / (l * l))


def k_r(r: int, cutoff: int) -> TruncatedProduct:
    """K_r with the product over primes not dividing r cut at ``cutoff``.

    Prime divisors of r always enter with their exact factor.
    """
    if r < 1:
        raise DomainError("K_r needs r >= 1")
    if cutoff < 3:
        raise DomainError("cutoff must be >= 3")
    primes = cached_primes(cutoff).primes
    divides = (r % primes) == 0
    logs = _generic_log_factor(primes)
    logs[divides] = [_divisor_log_factor(l) for l in primes[divides].tolist()]
    extra = [_divisor_log_factor(l) for l in factorize(r) if l > cutoff]
    value = math.exp(math.fsum(logs.tolist() + extra))
    return TruncatedProduct(value, cutoff, _tail(value, cutoff))


def c_constant(cutoff: int) -> TruncatedProduct:
    """C = prod_l (1 + 1/(l(l^2-l-1)))^-1 over primes l <= cutoff."""
    if cutoff < 3:
        raise DomainError("cutoff must be >= 3")
    primes = cached_primes(cutoff).primes
    # (1 + 1/(l(l^2-l-1)))^-1, evaluated through its own log1p
    lf = primes.astype(np.float64)
    logs = -np.log1p(1.0 / (lf * ((lf - 1.0) * lf - 1.0)))
    value = math.exp(math.fsum(logs.tolist()))
    return TruncatedProduct(value, cutoff, _tail(value, cutoff))


def f_mult(r: int) -> Fraction:
    """f(r) = prod_{l | r} (1 + 1/(l^2 - l - 1)), exactly."""
    out = Fraction(1)
    for l in factorize(r):
        out *= 1 + Fraction(1, l * l - l - 1)
    return out


def g_func(n: int) -> Fraction:
    """Moebius transform of f: mu(n)^2 / prod_{l | n} (l^2 - l - 1)."""
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return Fraction(0)
    den = 1
    for l in fac:
        den *= l * l - l - 1
    return Fraction(1, den)


def kr_csv(rows: list[tuple[int, TruncatedProduct]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "cutoff", "K_r", "tail_bound"])
    for r, tp in rows:
        w.writerow([r, tp.cutoff, f"{tp.value:.17g}", f"{tp.tail_bound:.17g}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Partial sums
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def _spf(n: int) -> np.ndarray:
    return smallest_factor_sieve(n)


def _factor_with(spf: np.ndarray, n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    while n > 1:
        l = int(spf[n])
        out[l] = out.get(l, 0) + 1
        n //= l
    return out


def _phi_from(fac: dict[int, int]) -> int:
    out = 1
    for l, e in fac.items():
        out *= (l - 1) * l ** (e - 1)
    return out


def partial_sum_S(U: int, V: int, r: int) -> float:
    """sum_{n <= U} sum_{f <= V, (2r, f) = 1} c_f^r(n) / (f n phi(n f^2)).

    Every c_f^r(n) is an exact integer; the float terms are added with
    math.fsum.
    """
    if U < 1 or V < 1 or r < 1:
        raise DomainError("partial_sum_S needs positive U, V, r")
    spf = _spf(max(U, V, 2))
    fs = [f for f in range(1, V + 1) if math.gcd(2 * r, f) == 1]
    f_fac = {f: _factor_with(spf, f) for f in fs}
    terms = []
    for n in range(1, U + 1):
        n_fac = _factor_with(spf, n)
        for f in fs:
            c = c_f_r_multiplicative(n, f, r, n_fac)
            if c == 0:
                continue
            nf2 = dict(n_fac)
            for l, e in f_fac[f].items():
                nf2[l] = nf2.get(l, 0) + 2 * e
            terms.append(c / (f * n * _phi_from(nf2)))
    return math.fsum(terms)


def k_window_sum(u: int, v: int, cutoff: int = WINDOW_CUTOFF) -> float:
    """sum_{u < r <= u + v} K_r at a fixed cutoff."""
    if u < 0 or v < 1:
        raise DomainError("k_window_sum needs u >= 0 and v >= 1")
    return math.fsum(k_r(r, cutoff).value for r in range(u + 1, u + v + 1))

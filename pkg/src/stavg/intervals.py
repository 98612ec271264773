"""Normalised-trace windows and their exact integer r-ranges."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


def _ceil_sqrt(n: int) -> int:
    s = math.isqrt(n)
    return s if s * s == n else s + 1


def r_lower(p: int, t: float) -> int:
    """Least integer r >= 0 with r >= 2 sqrt(p) t, for t >= 0 (exact)."""
    f = Fraction(t)
    if f <= 0:
        return 0
    num, den = f.numerator, f.denominator
    # (r den)^2 >= 4 p num^2
    return -(-_ceil_sqrt(4 * p * num * num) // den)


def r_upper(p: int, t: float) -> int:
    """Greatest integer r with r <= 2 sqrt(p) t, for t >= 0 (exact)."""
    f = Fraction(t)
    if f < 0:
        raise DomainError("r_upper needs t >= 0")
    num, den = f.numerator, f.denominator
    return math.isqrt(4 * p * num * num) // den


@dataclass(frozen=True)
class IntervalSpec:
    """Closed window alpha <= lambda / (2 sqrt p) <= beta with 0 < alpha <= beta <= 1."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0 < self.alpha <= self.beta <= 1):
            raise DomainError(
                f"interval needs 0 < alpha <= beta <= 1, got [{self.alpha}, {self.beta}]"
            )

    @property
    def gamma(self) -> float:
        return self.beta - self.alpha

    def r_range(self, p: int) -> tuple[int, int]:
        """Inclusive integer range of traces r with 2 sqrt(p) alpha <= r <= 2 sqrt(p) beta.

        The comparison is done in exact rational arithmetic on the binary
        values of alpha and beta; the range is empty when lo > hi.
        """
        return r_lower(p, self.alpha), r_upper(p, self.beta)

    def r_range_open_left(self, p: int) -> tuple[int, int]:
        """Integer range for 2 sqrt(p) alpha < r <= 2 sqrt(p) beta."""
        lo = r_lower(p, self.alpha)
        f = Fraction(self.alpha)
        if (lo * f.denominator) ** 2 == 4 * p * f.numerator ** 2:
            lo += 1
        return lo, r_upper(p, self.beta)

    def contains(self, lam: int, p: int) -> bool:
        lo, hi = self.r_range(p)
        return lo <= lam <= hi

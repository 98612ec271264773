"""Log-weighted prime sums in short intervals and residue classes."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numthy import PrimeTable, cached_primes, euler_phi
from .parallel import parallel_map


@dataclass(frozen=True)
class APWindow:
    """Primes p in (x, x + y] with p = a (mod q)."""

    x: float
    y: float
    q: int = 1
    a: int = 0

    def __post_init__(self):
        if self.x < 0 or self.y <= 0:
            raise DomainError("APWindow needs x >= 0 and y > 0")
        if self.q < 1:
            raise DomainError("APWindow needs q >= 1")

    @property
    def coprime(self) -> bool:
        return math.gcd(self.a, self.q) == 1


def _table_for(hi: float) -> PrimeTable:
    # round the sieve bound up to a power of two so nearby windows share a table
    need = max(2, math.floor(hi))
    return cached_primes(1 << (need - 1).bit_length())


def _window_logs(x: float, y: float) -> tuple[np.ndarray, np.ndarray]:
    table = _table_for(x + y)
    s = table.window(x, x + y)
    return table.primes[s], table.logp[s]


def theta_ap(w: APWindow) -> float:
    primes, logs = _window_logs(w.x, w.y)
    mask = primes % w.q == w.a % w.q
    return math.fsum(logs[mask].tolist())


def e_ap(w: APWindow) -> float:
    if not w.coprime:
        raise DomainError(f"gcd({w.a}, {w.q}) > 1")
    return theta_ap(w) - w.y / euler_phi(w.q)


def class_thetas(x: float, y: float, q: int) -> dict[int, float]:
    """Theta(x, y; q, a) for every reduced residue a mod q, in one pass."""
    primes, logs = _window_logs(x, y)
    res = primes % q
    out = {}
    for a in range(q):
        if math.gcd(a, q) == 1:
            out[a] = math.fsum(logs[res == a].tolist())
    return out


def _moment_for_q(x: float, y: float, q: int) -> float:
    phi = euler_phi(q)
    return math.fsum((t - y / phi) ** 2 for t in class_thetas(x, y, q).values())


def bdh_moment(x: float, y: float, Q: int, workers: int = 1) -> float:
    """sum_{q <= Q} sum_{(a, q) = 1} E(x, y; q, a)^2."""
    if Q < 1:
        raise DomainError("Q must be >= 1")
    if x < 0 or y <= 0:
        raise DomainError("need x >= 0 and y > 0")
    parts = parallel_map(lambda q: _moment_for_q(x, y, q), range(1, Q + 1), workers)
    return math.fsum(parts)


def ap_csv(x: float, y: float, q: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "a", "theta", "E"])
    phi = euler_phi(q)
    for a, t in class_thetas(x, y, q).items():
        w.writerow([q, a, f"{t:.17g}", f"{t - y / phi:.17g}"])
    return buf.getvalue()


def bdh_csv(rows: list[tuple[int, float, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Q", "y", "moment"])
    for Q, y, m in rows:
        w.writerow([Q, f"{y:.17g}", f"{m:.17g}"])
    return buf.getvalue()

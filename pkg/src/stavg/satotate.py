"""Semicircle measure, family averages over a box of curves, the class-number
main term, the centred second moment and exceptional-curve counts."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .curves import full_trace_table, window_hits
from .errors import ConsistencyError, DomainError, RangeError
from .intervals import IntervalSpec
from .numthy import PrimeTable, cached_primes
from .quadforms import ClassNumberTable, h_table

__all__ = [
    "IntervalSpec", "BoxSpec", "ExperimentReport", "f_measure", "f_measure_quad",
    "family_counts", "family_average", "dual_path_average", "main_term",
    "main_term_counts", "second_moment", "exceptional_count", "run_experiment",
]

# Largest prime the per-residue path will tabulate (p^2 traces each).
PER_RESIDUE_LIMIT = 512
# Relative agreement demanded between two float paths.
PATH_TOL = 1e-9
PATHS = ("per_curve", "per_residue")

REPORT_FIELDS = [
    "x", "alpha", "beta", "A", "B", "average", "main_term", "xF",
    "second_moment", "exceptional_count", "rel_tol",
]


def _agree(u: float, v: float, tol: float = PATH_TOL) -> bool:
    return abs(u - v) <= tol * max(1.0, abs(u), abs(v))


# ---------------------------------------------------------------------------
# Semicircle measure
# ---------------------------------------------------------------------------

def _check_measure_range(alpha: float, beta: float) -> None:
    if not (-1 <= alpha <= beta <= 1):
        raise DomainError(f"F needs -1 <= alpha <= beta <= 1, got [{alpha}, {beta}]")


def f_measure(alpha: float, beta: float) -> float:
    """(2/pi) * integral of sqrt(1 - t^2) over [alpha, beta], in closed form."""
    _check_measure_range(alpha, beta)

    def prim(t):
        return math.asin(t) + t * math.sqrt(1.0 - t * t)

    return (prim(beta) - prim(alpha)) / math.pi


def f_measure_quad(alpha: float, beta: float) -> float:
    """Adaptive-quadrature value of the same integral (independent oracle)."""
    _check_measure_range(alpha, beta)
    with warnings.catch_warnings():
        # the endpoint singularity of the derivative trips a roundoff notice
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _err = integrate.quad(lambda t: math.sqrt(1.0 - t * t), alpha, beta,
                                   epsabs=1e-14, epsrel=1e-14, limit=200)
    return 2.0 * val / math.pi


# ---------------------------------------------------------------------------
# Boxes of curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxSpec:
    """All (a, b) with |a| <= A and |b| <= B."""

    A: int
    B: int

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise DomainError("box needs A, B >= 1")

    @property
    def size(self) -> int:
        return (2 * self.A + 1) * (2 * self.B + 1)

    @property
    def norm(self) -> int:
        return 4 * self.A * self.B

    def curves(self) -> np.ndarray:
        """(size, 2) array in row-major (a, b) order."""
        a = np.repeat(np.arange(-self.A, self.A + 1, dtype=np.int64), 2 * self.B + 1)
        b = np.tile(np.arange(-self.B, self.B + 1, dtype=np.int64), 2 * self.A + 1)
        return np.stack([a, b], axis=1)

    def multiplicity(self, p: int) -> tuple[np.ndarray, np.ndarray]:
        """N_A(a mod p) and N_B(b mod p): how many box entries reduce to each residue."""
        na = np.bincount(np.arange(-self.A, self.A + 1) % p, minlength=p)
        nb = np.bincount(np.arange(-self.B, self.B + 1) % p, minlength=p)
        return na.astype(np.int64), nb.astype(np.int64)


def _primes(x: int) -> PrimeTable:
    if x < 2:
        return PrimeTable(max(int(x), 1), np.zeros(0, np.int64), np.zeros(0))
    return cached_primes(int(x))


def curve_hits(box: BoxSpec, iv: IntervalSpec, x: int, backend: str = "auto",
               workers: int = 1) -> np.ndarray:
    """hits[c, i]: curve c of the box is good at the i-th prime and its trace is in range."""
    return window_hits(box.curves(), _primes(x).primes, iv, backend, workers)


def _residue_counts(box: BoxSpec, iv: IntervalSpec, primes: np.ndarray) -> np.ndarray:
    out = np.zeros(len(primes), dtype=np.int64)
    for i, p in enumerate(primes.tolist()):
        if p < 3:
            continue  # every curve is bad at 2
        lam, good = full_trace_table(p)
        lo, hi = iv.r_range(p)
        inside = (good & (lam >= lo) & (lam <= hi)).astype(np.int64)
        na, nb = box.multiplicity(p)
        out[i] = int(na @ inside @ nb)
    return out


def family_counts(box: BoxSpec, iv: IntervalSpec, x: int, path: str = "per_curve",
                  backend: str = "auto", workers: int = 1) -> np.ndarray:
    """Per prime p <= x: number of box curves with trace in the window at p."""
    if path == "per_curve":
        return curve_hits(box, iv, x, backend, workers).sum(axis=0).astype(np.int64)
    if path == "per_residue":
        if x > PER_RESIDUE_LIMIT:
            raise DomainError(f"per_residue path is limited to x <= {PER_RESIDUE_LIMIT}")
        return _residue_counts(box, iv, _primes(x).primes)
    raise DomainError(f"unknown path {path!r}")


def _average_from_thetas(thetas: np.ndarray, box: BoxSpec) -> float:
    return math.fsum(thetas.tolist()) / box.norm


def _thetas(hits: np.ndarray, logp: np.ndarray) -> np.ndarray:
    """Per-curve Theta, each an exactly rounded sum of its log p."""
    return np.array([math.fsum(logp[row].tolist()) for row in hits], dtype=np.float64)


def family_average(box: BoxSpec, iv: IntervalSpec, x: int, path: str = "per_curve",
                   backend: str = "auto", workers: int = 1) -> float:
    """(1/4AB) times the sum of Theta over the box."""
    logp = _primes(x).logp
    if path == "per_curve":
        return _average_from_thetas(_thetas(curve_hits(box, iv, x, backend, workers), logp), box)
    counts = family_counts(box, iv, x, path)
    return math.fsum((counts * logp).tolist()) / box.norm


def dual_path_average(box: BoxSpec, iv: IntervalSpec, x: int, backend: str = "auto",
                      workers: int = 1) -> tuple[float, np.ndarray]:
    """Run both paths; raise ConsistencyError unless they agree."""
    logp = _primes(x).logp
    hits = curve_hits(box, iv, x, backend, workers)
    c1 = hits.sum(axis=0).astype(np.int64)
    c2 = family_counts(box, iv, x, "per_residue")
    if not np.array_equal(c1, c2):
        i = int(np.flatnonzero(c1 != c2)[0])
        p = int(_primes(x).primes[i])
        raise ConsistencyError(f"path counts differ at p={p}: per_curve {c1[i]}, per_residue {c2[i]}")
    v1 = _average_from_thetas(_thetas(hits, logp), box)
    v2 = math.fsum((c2 * logp).tolist()) / box.norm
    if not _agree(v1, v2):
        raise ConsistencyError(f"path averages differ: {v1!r} vs {v2!r}")
    return v1, c1


# ---------------------------------------------------------------------------
# Main term
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def default_table(x: int) -> ClassNumberTable:
    return h_table(max(int(x), 5))


def main_term_counts(x: int, iv: IntervalSpec, table: ClassNumberTable | None = None,
                     open_left: bool = False) -> np.ndarray:
    """Per prime p <= x: sum of H(r^2 - 4p) over the window's integer r."""
    primes = _primes(x).primes
    if len(primes) == 0:
        return np.zeros(0, dtype=np.int64)
    table = default_table(int(x)) if table is None else table
    if len(table.primes) == 0 or table.primes[-1] < primes[-1]:
        raise RangeError(f"class-number table covers p <= {table.limit}, need {x}")
    out = np.zeros(len(primes), dtype=np.int64)
    for i, p in enumerate(primes.tolist()):
        row = table.row(p)
        lo, hi = iv.r_range_open_left(p) if open_left else iv.r_range(p)
        lo, hi = max(lo, 1), min(hi, len(row))
        if lo <= hi:
            out[i] = int(row[lo - 1 : hi].sum())
    return out


def main_term(x: int, iv: IntervalSpec, table: ClassNumberTable | None = None,
              open_left: bool = False) -> float:
    """sum_{p <= x} log p * sum_r H(r^2 - 4p) / (2p)."""
    tab = _primes(x)
    counts = main_term_counts(x, iv, table, open_left)
    terms = counts * tab.logp / (2.0 * tab.primes)
    return math.fsum(terms.tolist())


# ---------------------------------------------------------------------------
# Second moment and exceptional curves
# ---------------------------------------------------------------------------

def _moment_direct(thetas: np.ndarray, center: float, box: BoxSpec) -> float:
    return math.fsum(((thetas - center) ** 2).tolist()) / box.norm


def _moment_decomposed(hits: np.ndarray, logp: np.ndarray, center: float, box: BoxSpec) -> float:
    # sum_c Theta_c^2 from pair counts #{c : c hits both p and q}
    h = hits.astype(np.float64)
    pairs = h.T @ h
    sq = math.fsum((pairs * np.outer(logp, logp)).ravel().tolist())
    total = math.fsum((h.sum(axis=0) * logp).tolist())
    return math.fsum([sq, -2.0 * center * total, box.size * center * center]) / box.norm


def second_moment(box: BoxSpec, iv: IntervalSpec, x: int, backend: str = "auto",
                  workers: int = 1, hits: np.ndarray | None = None) -> float:
    """(1/4AB) sum over the box of |Theta - xF|^2, checked by two routes."""
    logp = _primes(x).logp
    if hits is None:
        hits = curve_hits(box, iv, x, backend, workers)
    center = x * f_measure(iv.alpha, iv.beta)
    direct = _moment_direct(_thetas(hits, logp), center, box)
    other = _moment_decomposed(hits, logp, center, box)
    if not _agree(direct, other):
        raise ConsistencyError(f"second moment paths differ: {direct!r} vs {other!r}")
    return direct


def exceptional_count(box: BoxSpec, iv: IntervalSpec, x: int, rel_tol: float,
                      backend: str = "auto", workers: int = 1,
                      hits: np.ndarray | None = None) -> int:
    """Curves with |Theta - xF| > rel_tol * xF."""
    if not rel_tol > 0:
        raise DomainError("rel_tol must be positive")
    if hits is None:
        hits = curve_hits(box, iv, x, backend, workers)
    xf = x * f_measure(iv.alpha, iv.beta)
    dev = np.abs(_thetas(hits, _primes(x).logp) - xf)
    return int((dev > rel_tol * xf).sum())


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    x: int
    alpha: float
    beta: float
    A: int
    B: int
    average: float
    main_term: float
    xF: float
    second_moment: float
    exceptional_count: int
    rel_tol: float
    counts: list[int] = field(default_factory=list, repr=False)
    wall_time: float = 0.0

    def row(self) -> list[str]:
        out = []
        for name in REPORT_FIELDS:
            v = getattr(self, name)
            out.append(f"{v:.17g}" if isinstance(v, float) else str(v))
        return out

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("counts")
        d.pop("wall_time")
        return d


def run_experiment(box: BoxSpec, iv: IntervalSpec, x: int, rel_tol: float = 0.2,
                   backend: str = "auto", workers: int = 1,
                   table: ClassNumberTable | None = None) -> ExperimentReport:
    """One sweep over the box; every statistic reuses the same hit matrix."""
    start = time.perf_counter()
    logp = _primes(x).logp
    hits = curve_hits(box, iv, x, backend, workers)
    thetas = _thetas(hits, logp)
    report = ExperimentReport(
        x=int(x), alpha=iv.alpha, beta=iv.beta, A=box.A, B=box.B,
        average=_average_from_thetas(thetas, box),
        main_term=main_term(x, iv, table),
        xF=x * f_measure(iv.alpha, iv.beta),
        second_moment=second_moment(box, iv, x, hits=hits),
        exceptional_count=exceptional_count(box, iv, x, rel_tol, hits=hits),
        rel_tol=float(rel_tol),
        counts=hits.sum(axis=0).astype(np.int64).tolist(),
    )
    report.wall_time = time.perf_counter() - start
    return report


def reports_csv(reports: list[ExperimentReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def reports_json(reports: list[ExperimentReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2)

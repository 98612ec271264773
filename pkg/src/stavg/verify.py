"""Acceptance checks, grouped into the ``exact`` and ``statistical`` suites.

Every check returns a CheckResult; checks that detect disagreement between
two independent computations raise ConsistencyError instead of returning
a plain failure, so callers can tell a broken oracle from a missed trend.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import calibration as cal
from .approgressions import bdh_moment, class_thetas, theta_ap, APWindow
from .cache import load_or_build_class_numbers
from .curves import (
    CurveParams,
    classes_by_trace,
    full_trace_table,
    iso_class_size,
    is_isomorphic,
    orbit,
    orbit_ids,
    trace_bsgs,
    trace_naive,
)
from .errors import ConsistencyError, StavgError
from .lconstants import c_constant, f_mult, k_r, k_window_sum, partial_sum_S
from .numthy import cached_primes
from .quadforms import ClassNumberTable, cross_check, h_table, traces_below
from .satotate import (
    BoxSpec,
    IntervalSpec,
    dual_path_average,
    f_measure,
    main_term,
    reports_csv,
    run_experiment,
)

SUITES = ("exact", "statistical", "all")


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.number:2d}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class Context:
    """Shared state for one verification run (tables and experiment results)."""

    cache_dir: str | None = None
    workers: int = 1
    seed: int = 0
    memo: dict = field(default_factory=dict)

    def table(self, x: int, sample: float = 0.0) -> ClassNumberTable:
        key = ("table", x)
        if key not in self.memo:
            self.memo[key] = load_or_build_class_numbers(
                self.cache_dir, x, lambda n: h_table(n, sample=sample, seed=self.seed)
            )
        return self.memo[key]


def _interval() -> IntervalSpec:
    return IntervalSpec(*cal.INTERVAL)


def _large_primes(lo: int, hi: int) -> list[int]:
    return [p for p in cached_primes(hi).primes.tolist() if lo < p <= hi]


# ---------------------------------------------------------------------------
# Exact checks
# ---------------------------------------------------------------------------

def check_class_numbers(ctx: Context) -> tuple[bool, str]:
    table = ctx.table(500)
    sub = ClassNumberTable.from_entries(500, [e for e in table.entries() if e[0] > 3])
    n = cross_check(sub, sample=1.0, workers=ctx.workers)
    return True, f"{n} entries, lseries == forms"


def check_deuring(ctx: Context) -> tuple[bool, str]:
    table = ctx.table(500)
    checked = 0
    for p in _large_primes(3, 150):
        classes = classes_by_trace(p)
        for r in range(1, traces_below(p) + 1):
            got = len(classes[r]) if r in classes else 0
            want = table.get(p, r)
            if got != want:
                raise ConsistencyError(f"class count {got} != H={want} at p={p} r={r}")
            checked += 1
    return True, f"{checked} (p, r) pairs"


def check_count_band(ctx: Context) -> tuple[bool, str]:
    table = ctx.table(500)
    worst = 0.0
    for p in _large_primes(3, 150):
        classes = classes_by_trace(p)
        for r in range(1, traces_below(p) + 1):
            expected = (p - 1) * table.get(p, r) / 2
            for s in (r, -r):
                n = classes[s].curve_count if s in classes else 0
                dev = abs(n - expected) / (p - 1)
                worst = max(worst, dev)
                if dev > 4:
                    return False, f"p={p} r={s}: count {n}, (p-1)H/2 = {expected}"
    return True, f"max |count - (p-1)H/2| / (p-1) = {worst:.3f} <= 4"


def check_orbits(ctx: Context) -> tuple[bool, str]:
    n = 0
    for p in _large_primes(3, 60):
        _, good = full_trace_table(p)
        for a, b in zip(*np.nonzero(good)):
            E = CurveParams(int(a), int(b))
            if len(orbit(E, p)) != iso_class_size(E, p):
                raise ConsistencyError(f"orbit size mismatch for E({a},{b}) mod {p}")
            n += 1
    return True, f"{n} curves"


def check_iso_criteria(ctx: Context) -> tuple[bool, str]:
    n = 0
    seen = {1: 0, 3: 0}
    for p in _large_primes(3, 60):
        lam, good = full_trace_table(p)
        ids = orbit_ids(p)
        off = good.copy()
        off[0, :] = False
        off[:, 0] = False
        for r in np.unique(lam[off]).tolist():
            pts = list(zip(*np.nonzero(off & (lam == r))))
            for i, (a, b) in enumerate(pts):
                E1 = CurveParams(int(a), int(b))
                for c, d in pts[i + 1 :]:
                    crit = is_isomorphic(E1, CurveParams(int(c), int(d)), p)
                    if crit != (ids[a, b] == ids[c, d]):
                        raise ConsistencyError(
                            f"criteria/search disagree for E({a},{b}), E({c},{d}) mod {p}"
                        )
                    n += 1
        seen[p % 4] += 1
    return seen[1] > 0 and seen[3] > 0, f"{n} pairs, primes 1 mod 4: {seen[1]}, 3 mod 4: {seen[3]}"


def family_dual_csv(workers: int) -> tuple[str, np.ndarray]:
    box, iv, x = BoxSpec(25, 25), _interval(), 200
    _avg, counts = dual_path_average(box, iv, x, workers=workers)
    rep = run_experiment(box, iv, x, rel_tol=cal.EXCEPTION_REL_TOL, workers=workers)
    return reports_csv([rep]), counts


def check_family_dual(ctx: Context) -> tuple[bool, str]:
    csv_text, counts = family_dual_csv(ctx.workers)
    ctx.memo[("family_dual", ctx.workers)] = csv_text
    return True, f"{len(counts)} primes, {int(counts.sum())} in-range (curve, p) pairs"


def check_backends(ctx: Context) -> tuple[bool, str]:
    rng = random.Random(ctx.seed)
    primes = [p for p in cached_primes(100_000).primes.tolist() if p > 3]
    n = 0
    while n < 1000:
        p = rng.choice(primes)
        E = CurveParams(rng.randrange(p), rng.randrange(p))
        if not E.is_good(p):
            continue
        if trace_bsgs(E, p).lam != trace_naive(E, p).lam:
            raise ConsistencyError(f"bsgs and naive disagree for E({E.a},{E.b}) mod {p}")
        n += 1
    return True, f"{n} random instances"


def check_twist_completeness(ctx: Context) -> tuple[bool, str]:
    for p in _large_primes(3, 150):
        counts = {r: c.curve_count for r, c in classes_by_trace(p).items()}
        for r, c in counts.items():
            if counts.get(-r, 0) != c:
                return False, f"p={p}: count({r}) = {c} but count({-r}) = {counts.get(-r, 0)}"
        total = sum(counts.values())
        if total != p * p - p:
            return False, f"p={p}: {total} nonsingular curves, expected {p * p - p}"
    return True, "all primes 3 < p <= 150"


def check_constants(ctx: Context) -> tuple[bool, str]:
    cutoff = 100_000
    k1, k2 = k_r(1, cutoff), k_r(2, cutoff)
    ratio = k2.value / k1.value
    if abs(ratio - 2) > 1e-12:
        return False, f"K_2/K_1 = {ratio!r}"
    C = c_constant(cutoff)
    for r in range(1, 51):
        kr = k_r(r, cutoff)
        fc = float(f_mult(r)) * C.value
        tol = kr.tail_bound + float(f_mult(r)) * C.tail_bound + 1e-12 * kr.value
        if abs(kr.value - fc) > tol:
            return False, f"K_{r} = {kr.value!r} vs f(r)C = {fc!r}"
    window = k_window_sum(0, 1000)
    if abs(window - 1000) > cal.WINDOW_SUM:
        return False, f"sum K_r (r <= 1000) = {window}"
    s = partial_sum_S(10_000, 100, 1)
    if abs(s - k1.value) >= cal.PARTIAL_SUM_ABS:
        return False, f"S(10^4, 10^2, 1) - K_1 = {s - k1.value}"
    return True, (f"K2/K1-2 = {ratio - 2:.1e}, sum K_r - 1000 = {window - 1000:.4f}, "
                  f"S - K_1 = {s - k1.value:.5f}")


def check_progressions(ctx: Context) -> tuple[bool, str]:
    worst = 0.0
    windows = [(0.0, 100_000.0), (50_000.0, 50_000.0), (12_345.0, 6_789.0)]
    primes = cached_primes(200_000)
    for x, y in windows:
        total = theta_ap(APWindow(x, y))
        s = primes.window(x, x + y)
        ps, lp = primes.primes[s], primes.logp[s]
        for q in range(1, 101):
            lhs = math.fsum(class_thetas(x, y, q).values())
            rhs = total - math.fsum(lp[q % ps == 0].tolist())
            worst = max(worst, abs(lhs - rhs))
    if worst > 1e-9:
        return False, f"partition error {worst:.2e}"
    m = bdh_moment(10, 10, 2)
    if abs(m - 1.0965) > 1e-3:
        return False, f"bdh_moment(10, 10, 2) = {m}"
    return True, f"partition error {worst:.1e}, bdh_moment(10,10,2) = {m:.5f}"


# ---------------------------------------------------------------------------
# Statistical checks
# ---------------------------------------------------------------------------

def main_term_ratios(ctx: Context) -> list[tuple[int, float]]:
    key = "main_term_ratios"
    if key not in ctx.memo:
        iv = _interval()
        xmax = max(cal.MAIN_TERM_XS)
        table = ctx.table(xmax, sample=0.01)
        F = f_measure(iv.alpha, iv.beta)
        ctx.memo[key] = [(x, main_term(x, iv, table) / (x * F)) for x in cal.MAIN_TERM_XS]
    return ctx.memo[key]


def check_main_term_trend(ctx: Context) -> tuple[bool, str]:
    ratios = main_term_ratios(ctx)
    (x0, r0), (x1, r1) = ratios[0], ratios[-1]
    lo, hi = cal.RATIO_BAND
    ok = lo <= r1 <= hi and abs(r1 - 1) < abs(r0 - 1)
    table = ", ".join(f"x={x}: {r:.5f}" for x, r in ratios)
    return ok, table


def family_trend_reports(ctx: Context, workers: int) -> list:
    key = ("family_trend", workers)
    if key not in ctx.memo:
        iv = _interval()
        table = ctx.table(cal.FAMILY_X, sample=0.01)
        ctx.memo[key] = [
            run_experiment(BoxSpec(s, s), iv, cal.FAMILY_X, cal.EXCEPTION_REL_TOL,
                           backend="bsgs", workers=workers, table=table)
            for s in cal.FAMILY_SIDES
        ]
    return ctx.memo[key]


def check_family_trend(ctx: Context) -> tuple[bool, str]:
    reps = family_trend_reports(ctx, ctx.workers)
    gaps = [abs(r.average - r.main_term) for r in reps]
    moments = [r.second_moment / r.xF**2 for r in reps]
    ok = all(b <= a * cal.HYSTERESIS for a, b in zip(gaps, gaps[1:]))
    ok = ok and moments[-1] < moments[0]
    sides = cal.FAMILY_SIDES
    detail = "; ".join(
        f"A=B={s}: |avg-main|={g:.3f}, M2/(xF)^2={m:.5f}" for s, g, m in zip(sides, gaps, moments)
    )
    return ok, detail


def check_determinism(ctx: Context, parts: tuple[str, ...] = ("family_dual", "family_trend")) -> tuple[bool, str]:
    notes = []
    ok = True
    if "family_dual" in parts:
        same = family_dual_csv(1)[0] == family_dual_csv(8)[0]
        ok &= same
        notes.append(f"A=B=25 x=200 csv {'identical' if same else 'DIFFERS'}")
    if "family_trend" in parts:
        same = reports_csv(family_trend_reports(ctx, 1)) == reports_csv(family_trend_reports(ctx, 8))
        ok &= same
        notes.append(f"x={cal.FAMILY_X} trend csv {'identical' if same else 'DIFFERS'}")
    return ok, "; ".join(notes) + " for workers 1 and 8"


CHECKS: dict[int, tuple[str, str, Callable[[Context], tuple[bool, str]]]] = {
    1: ("exact", "class numbers: lseries == forms, 3 < p <= 500", check_class_numbers),
    2: ("exact", "isomorphism classes with trace r == H(r^2-4p), p <= 150", check_deuring),
    3: ("exact", "|count - (p-1)H/2| <= 4(p-1), p <= 150", check_count_band),
    4: ("exact", "orbit sizes == class-size formula, p <= 60", check_orbits),
    5: ("exact", "residue criteria == orbit search, p <= 60", check_iso_criteria),
    6: ("exact", "family average per_curve == per_residue, A=B=25 x=200", check_family_dual),
    7: ("exact", "bsgs == naive on 1000 random instances", check_backends),
    8: ("exact", "twist symmetry and completeness, p <= 150", check_twist_completeness),
    9: ("exact", "K_r, f(r)C, window sum and partial sum", check_constants),
    10: ("exact", "progression partition and bdh moment", check_progressions),
    11: ("statistical", "main term / xF trend", check_main_term_trend),
    12: ("statistical", "family average and second moment trend", check_family_trend),
    13: ("statistical", "worker-count determinism", check_determinism),
}


def run_check(number: int, ctx: Context) -> CheckResult:
    _suite, name, fn = CHECKS[number]
    start = time.perf_counter()
    try:
        passed, detail = fn(ctx)
    except StavgError as exc:
        result = CheckResult(number, name, False, f"{type(exc).__name__}: {exc}",
                             time.perf_counter() - start)
        result.error = exc  # type: ignore[attr-defined]
        return result
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - start)


def select(suite: str) -> list[int]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return [n for n, (s, _, _) in CHECKS.items() if suite == "all" or s == suite]

import math
import random

import numpy as np
import pytest

from stavg.errors import DomainError, ReductionError
from stavg.intervals import IntervalSpec
from stavg.curves import (
    CurveParams,
    TraceResult,
    angle,
    box_count_characters,
    box_count_direct,
    classes_by_trace,
    count_curves_with_trace,
    count_points,
    enumerate_iso_classes,
    full_trace_table,
    is_isomorphic,
    is_isomorphic_search,
    iso_class_size,
    orbit,
    orbit_ids,
    theta_curve,
    trace,
    trace_bsgs,
    trace_csv,
    trace_naive,
    window_hits,
)
from stavg.numthy import cached_primes
from stavg.quadforms import h_table, traces_below

SMALL = [p for p in cached_primes(150).primes.tolist() if p > 3]


def test_trace_examples():
    assert trace_naive(CurveParams(0, 1), 5).lam == 0
    assert count_points(CurveParams(0, 1), 5) == 6
    assert trace_naive(CurveParams(2, 3), 7).lam == 2
    assert count_points(CurveParams(2, 3), 7) == 6
    assert trace_bsgs(CurveParams(2, 3), 7).lam == 2
    assert trace_bsgs(CurveParams(0, 1), 5).lam == 0
    E = CurveParams(1, 1)
    assert trace_bsgs(E, 10007) == trace_naive(E, 10007)


def test_singular_reduction_is_rejected():
    # 4*8 + 27*9 = 275 = 0 mod 5: the raw point count exists, the trace does not
    E = CurveParams(2, 3)
    assert count_points(E, 5) == 7
    with pytest.raises(ReductionError):
        trace_naive(E, 5)
    with pytest.raises(ReductionError):
        trace_bsgs(E, 5)
    with pytest.raises(DomainError):
        trace(E, 7, backend="fast")


def test_trace_matches_point_count():
    rng = random.Random(3)
    for _ in range(300):
        p = rng.choice(SMALL + [3])
        E = CurveParams(rng.randrange(-50, 50), rng.randrange(-50, 50))
        if E.is_good(p):
            assert trace_naive(E, p).lam == p + 1 - count_points(E, p)


def test_hasse_bound():
    rng = random.Random(5)
    primes = [p for p in cached_primes(2000).primes.tolist() if p > 3]
    n = 0
    while n < 10_000:
        p = rng.choice(primes)
        E = CurveParams(rng.randrange(p), rng.randrange(p))
        if not E.is_good(p):
            continue
        t = trace_naive(E, p)
        assert abs(t.lam) <= math.isqrt(4 * p)
        assert -1 <= t.normalized <= 1
        n += 1


def test_backend_equivalence():
    rng = random.Random(11)
    primes = [p for p in cached_primes(100_000).primes.tolist() if p > 3]
    n = 0
    while n < 1000:
        p = rng.choice(primes)
        E = CurveParams(rng.randrange(p), rng.randrange(p))
        if E.is_good(p):
            assert trace_bsgs(E, p) == trace_naive(E, p)
            n += 1


def test_angle():
    assert angle(TraceResult(11, 0)) == pytest.approx(math.pi / 2)
    assert angle(TraceResult(4, 4)) == pytest.approx(0.0)
    assert angle(trace_naive(CurveParams(2, 3), 7)) == pytest.approx(math.acos(1 / math.sqrt(7)))
    assert angle(trace_naive(CurveParams(2, 3), 7)) == pytest.approx(1.1832, abs=1e-4)


def test_iso_class_size_examples():
    assert iso_class_size(CurveParams(0, 1), 13) == 2
    assert iso_class_size(CurveParams(1, 0), 13) == 3
    assert iso_class_size(CurveParams(1, 1), 7) == 3


def test_is_isomorphic_examples():
    assert is_isomorphic(CurveParams(1, 1), CurveParams(1, 4), 5)
    assert not is_isomorphic(CurveParams(1, 1), CurveParams(1, 2), 5)
    assert is_isomorphic(CurveParams(1, 1), CurveParams(1, 1), 7)
    assert is_isomorphic_search(CurveParams(1, 1), CurveParams(1, 4), 5)


def test_orbit_ids_agree_with_search():
    rng = random.Random(2)
    for p in (13, 19, 29, 31):
        ids = orbit_ids(p)
        for _ in range(300):
            a, b, c, d = (rng.randrange(p) for _ in range(4))
            same = is_isomorphic_search(CurveParams(a, b), CurveParams(c, d), p)
            assert same == (ids[a, b] == ids[c, d])


def test_orbit_sizes_match_formula():
    for p in [p for p in SMALL if p <= 60]:
        _, good = full_trace_table(p)
        for a, b in zip(*np.nonzero(good)):
            E = CurveParams(int(a), int(b))
            assert len(orbit(E, p)) == iso_class_size(E, p)


def test_p5_classes():
    c1 = enumerate_iso_classes(5, 1)
    assert c1.off_axis_count == 1 and c1.axis_count == 0 and c1.sizes == [2]
    c2 = enumerate_iso_classes(5, 2)
    assert c2.axis_representatives == [(1, 0)] and c2.axis_sizes == [1]
    assert c2.off_axis_count == 1 and c2.sizes == [2]
    c4 = enumerate_iso_classes(5, 4)
    assert len(c4) == 1 and c4.axis_representatives == [(2, 0)] and c4.curve_count == 1
    assert [count_curves_with_trace(5, r) for r in (1, 2, 4)] == [2, 3, 1]


def test_deuring_class_counts():
    table = h_table(150, sample=0)
    for p in SMALL:
        classes = classes_by_trace(p)
        for r in range(1, traces_below(p) + 1):
            assert len(classes.get(r, ())) == table.get(p, r), (p, r)


def test_twist_symmetry_and_completeness():
    for p in SMALL:
        counts = {r: c.curve_count for r, c in classes_by_trace(p).items()}
        for r, c in counts.items():
            assert counts.get(-r) == c
        assert sum(counts.values()) == p * p - p


def test_count_band():
    table = h_table(150, sample=0)
    for p in SMALL:
        for r in range(1, traces_below(p) + 1):
            expected = (p - 1) * table.get(p, r) / 2
            assert abs(count_curves_with_trace(p, r) - expected) <= 4 * (p - 1)


def test_axis_classes_bounded():
    for p in [p for p in cached_primes(500).primes.tolist() if p > 3]:
        assert sum(c.axis_count for c in classes_by_trace(p).values()) <= 10


def test_classes_are_complete_and_disjoint():
    for p in (7, 13, 23):
        lam, good = full_trace_table(p)
        for r, cls in classes_by_trace(p).items():
            reps = cls.representatives + cls.axis_representatives
            for i, u in enumerate(reps):
                for v in reps[i + 1 :]:
                    assert not is_isomorphic_search(CurveParams(*u), CurveParams(*v), p)
            covered = set()
            for u in reps:
                covered |= orbit(CurveParams(*u), p)
            members = {(int(a), int(b)) for a, b in zip(*np.nonzero(good & (lam == r)))}
            assert covered == members


@pytest.mark.parametrize("p", [5, 13, 17, 29, 37, 7, 11, 19])
def test_character_sum_box_count(p):
    for A, B in [(2, 3), (p, p), (3 * p, 2 * p)]:
        for lo, hi in [(1, 3), (-2, 2), (-100, 100)]:
            direct = box_count_direct(p, A, B, lo, hi)
            via = box_count_characters(p, A, B, lo, hi)
            assert abs(via - direct) < 1e-6


def test_trace_csv():
    lines = trace_csv(5).splitlines()
    assert lines[0] == "p,a,b,lambda"
    assert len(lines) == 1 + 20


def test_theta_curve_examples():
    iv = IntervalSpec(0.1, 1.0)
    assert theta_curve(CurveParams(2, 3), iv, 10) == pytest.approx(math.log(7))
    assert theta_curve(CurveParams(5, 7), iv, 1) == 0
    assert theta_curve(CurveParams(0, 0), iv, 1000) == 0


def test_window_hits_backends_agree():
    curves = [(a, b) for a in range(-4, 5) for b in range(-4, 5)]
    primes = cached_primes(3000).primes
    iv = IntervalSpec(0.2, 0.8)
    naive = window_hits(curves, primes, iv, backend="naive")
    assert np.array_equal(naive, window_hits(curves, primes, iv, backend="bsgs"))
    assert np.array_equal(naive, window_hits(curves, primes, iv, backend="auto", workers=3))


@pytest.mark.parametrize("p", [13, 17, 19, 23])
def test_residue_criteria_match_orbits(p):
    lam, good = full_trace_table(p)
    ids = orbit_ids(p)
    pts = [(a, b) for a in range(1, p) for b in range(1, p) if good[a, b]]
    for i, (a, b) in enumerate(pts):
        for c, d in pts[i + 1 :]:
            if lam[a, b] == lam[c, d]:
                crit = is_isomorphic(CurveParams(a, b), CurveParams(c, d), p)
                assert crit == (ids[a, b] == ids[c, d])

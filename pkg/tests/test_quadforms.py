import math

import numpy as np
import pytest

from stavg.errors import ConsistencyError, DomainError, RangeError
from stavg.intervals import IntervalSpec
from stavg.quadforms import (
    ClassNumberTable,
    cross_check,
    decompose,
    expected_table_size,
    form_count_sieve,
    h_p_sum,
    h_table,
    kronecker_class_number,
    l1_truncated,
    lseries_estimate,
    reduced_form_count,
    reduced_forms,
    traces_below,
)


def test_decompose_examples():
    assert decompose(-19) == [(-19, 1)]
    assert decompose(-16) == [(-16, 1), (-4, 2)]
    assert decompose(-36) == [(-36, 1), (-4, 3)]
    for bad in (0, 5, -2, -5):
        with pytest.raises(DomainError):
            decompose(bad)


def test_reduced_forms_examples():
    assert reduced_forms(-19) == [(1, 1, 5)]
    assert sorted(reduced_forms(-16)) == [(1, 0, 4), (2, 0, 2)]
    assert reduced_forms(-4) == [(1, 0, 1)]
    assert sorted(reduced_forms(-24)) == [(1, 0, 6), (2, 0, 3)]
    assert sorted(reduced_forms(-27)) == [(1, 1, 7), (3, 3, 3)]
    for D, want in [(-19, 1), (-16, 2), (-24, 2), (-27, 2), (-36, 3), (-3, 1)]:
        assert reduced_form_count(D) == want


def _primitive_counts(N):
    prim = np.zeros(N + 1, dtype=np.int64)
    for A in range(1, math.isqrt(N // 3) + 1):
        for B in range(-A + 1, A + 1):
            C = A if B >= 0 else A + 1
            while 4 * A * C - B * B <= N:
                if math.gcd(math.gcd(A, B), C) == 1:
                    prim[4 * A * C - B * B] += 1
                C += 1
    return prim


def test_all_forms_equal_sum_of_primitive_counts():
    N = 10_000
    total = form_count_sieve(N)
    prim = _primitive_counts(N)
    for n in range(3, N + 1):
        if (-n) % 4 not in (0, 1):
            assert total[n] == 0
            continue
        assert total[n] == sum(prim[-d] for d, _ in decompose(-n))


def test_sieve_matches_direct_enumeration():
    cnt = form_count_sieve(3000)
    for n in range(3, 3001, 7):
        if (-n) % 4 in (0, 1):
            assert cnt[n] == reduced_form_count(-n)


@pytest.mark.parametrize("d,limit", [
    (-4, math.pi / 4),
    (-3, math.pi / (3 * math.sqrt(3))),
    (-19, math.pi / math.sqrt(19)),
])
def test_l1_limits(d, limit):
    value, tail = l1_truncated(d, 2_000_000)
    assert abs(value - limit) <= tail
    assert abs(value - limit) < 1e-5


def test_l1_tail_and_errors():
    _, tail = l1_truncated(-19, 100)
    assert tail == pytest.approx(4 * math.sqrt(19) * math.log(19) / 100)
    with pytest.raises(DomainError):
        l1_truncated(-4, 0)


@pytest.mark.parametrize("d", [-3, -4, -7, -19, -163])
@pytest.mark.parametrize("U", [1_000, 10_000, 100_000])
def test_l1_stability(d, U):
    v1, tail = l1_truncated(d, U)
    v2, _ = l1_truncated(d, 2 * U)
    assert abs(v1 - v2) <= tail


def test_lseries_mode_examples():
    for D in (-19, -16, -24, -3, -4, -27, -36, -163, -1000):
        assert kronecker_class_number(D, "lseries") == kronecker_class_number(D, "forms")
    value, U = lseries_estimate(-16)
    assert abs(value - 2) < 0.4 and U > 1
    with pytest.raises(DomainError):
        kronecker_class_number(-16, "other")


def test_h_table_small():
    t5 = h_table(5, sample=1.0)
    assert [t5.get(5, r) for r in range(1, 5)] == [1, 2, 1, 1]
    t7 = h_table(7, sample=1.0)
    assert [t7.get(7, r) for r in range(1, 6)] == [2, 2, 1, 2, 1]
    assert t7.get(7, -2) == t7.get(7, 2)
    with pytest.raises(RangeError):
        t7.get(7, 6)
    with pytest.raises(RangeError):
        t7.row(11)


def test_h_table_size_and_oracle():
    t = h_table(300, sample=0.05, seed=3)
    assert len(t) == expected_table_size(300)
    assert len(t) == sum(math.ceil(2 * math.sqrt(p)) - 1 for p in t.primes.tolist())
    for p, r, h in list(t.entries())[::37]:
        assert h == reduced_form_count(r * r - 4 * p)
    assert traces_below(5) == 4 and traces_below(4) == 3


def test_cross_check_names_bad_entry():
    t = h_table(50, sample=0)
    values = t.values.copy()
    i = int(t.offsets[3]) + 2  # p = 7, r = 3
    values[i] += 1
    bad = ClassNumberTable(t.limit, t.primes, t.offsets, values)
    with pytest.raises(ConsistencyError, match="p=7 r=3"):
        cross_check(bad)


def test_csv_and_roundtrip():
    t = h_table(7, sample=0)
    lines = t.to_csv().splitlines()
    assert lines[0] == "p,r,D,H"
    assert "5,2,-16,2" in lines
    again = ClassNumberTable.from_entries(7, t.entries())
    assert np.array_equal(again.values, t.values)


def test_h_p_sum_examples():
    t = h_table(7, sample=0)
    assert h_p_sum(t, 5, IntervalSpec(0.3, 0.9)) == 4
    assert h_p_sum(t, 5, IntervalSpec(0.5, 0.5)) == 0
    assert h_p_sum(t, 7, IntervalSpec(0.1, 0.2)) == 2
    with pytest.raises(RangeError):
        h_p_sum(t, 11, IntervalSpec(0.1, 0.2))

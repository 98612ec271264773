import math
import random
from fractions import Fraction

import pytest

from stavg.calibration import PARTIAL_SUM, PARTIAL_SUM_SLACK, WINDOW_SUM
from stavg.errors import DomainError
from stavg.lconstants import (
    c_constant,
    c_f_r,
    c_f_r_multiplicative,
    f_mult,
    g_func,
    k_r,
    k_window_sum,
    kr_csv,
    partial_sum_S,
)
from stavg.numthy import euler_phi


def test_c_f_r_examples():
    assert c_f_r(1, 1, 1) == 1
    assert c_f_r(3, 1, 1) == -1
    assert c_f_r(1, 1, 2) == 0
    with pytest.raises(DomainError):
        c_f_r(0, 1, 1)


def test_c_f_r_bound_and_local_factors():
    for n in range(1, 120):
        for f in range(1, 6):
            for r in range(1, 10):
                v = c_f_r(n, f, r)
                assert abs(v) <= euler_phi(4 * n)
                assert v == c_f_r_multiplicative(n, f, r)


def test_c_f_r_periodic_in_r():
    rng = random.Random(4)
    for _ in range(200):
        n, f, r = rng.randrange(1, 60), rng.randrange(1, 8), rng.randrange(1, 40)
        assert c_f_r(n, f, r) == c_f_r(n, f, r + 4 * n)


def test_k_r_ratios():
    for cutoff in (1000, 100_000):
        k1 = k_r(1, cutoff).value
        assert k_r(2, cutoff).value / k1 == pytest.approx(2, abs=1e-12)
        assert k_r(6, cutoff).value / k1 == pytest.approx(2.4, abs=1e-12)


def test_k1_value_and_tail():
    a, b = k_r(1, 10**5), k_r(1, 10**6)
    assert b.value == pytest.approx(0.615, abs=0.001)
    assert abs(a.value - b.value) <= a.tail_bound
    assert b.value <= a.value
    with pytest.raises(DomainError):
        k_r(1, 2)


@pytest.mark.parametrize("r", [1, 2, 3, 10, 97])
def test_k_r_cutoff_doubling(r):
    for L in (100, 1000, 10_000):
        lo, hi = k_r(r, L), k_r(r, 2 * L)
        assert abs(hi.value - lo.value) <= lo.tail_bound


def test_k_r_equals_f_times_c():
    C = c_constant(10**5)
    for r in range(1, 51):
        kr = k_r(r, 10**5)
        f = float(f_mult(r))
        assert abs(kr.value - f * C.value) <= kr.tail_bound + f * C.tail_bound + 1e-12


def test_f_mult():
    assert f_mult(1) == 1
    assert f_mult(2) == 2
    assert f_mult(12) == 2 * (1 + Fraction(1, 5))


def test_g_inverts_f():
    gs = [Fraction(0)] + [g_func(d) for d in range(1, 1001)]
    for v in (1, 10, 99, 500, 1000):
        lhs = sum(gs[d] * (v // d) for d in range(1, v + 1))
        assert lhs == sum(f_mult(r) for r in range(1, v + 1))


def test_window_sums():
    assert abs(k_window_sum(0, 1000) - 1000) <= WINDOW_SUM
    assert abs(k_window_sum(10_000, 100) - 100) <= WINDOW_SUM
    assert k_window_sum(0, 1) == k_r(1, 10**5).value


def test_partial_sum_shapes():
    k1 = k_r(1, 10**5).value
    assert abs(partial_sum_S(100, 10, 1) - k1) <= PARTIAL_SUM * (1 / 10 + 1 / 100)
    assert abs(partial_sum_S(10_000, 100, 1) - k1) < 0.05


@pytest.mark.parametrize("r", [1, 3, 5])
def test_partial_sum_convergence(r):
    kr = k_r(r, 10**5).value
    errs = [abs(partial_sum_S(U, 50, r) - kr) for U in (100, 1000, 5000)]
    for a, b in zip(errs, errs[1:]):
        assert b <= a + PARTIAL_SUM_SLACK


def test_kr_csv():
    text = kr_csv([(1, k_r(1, 1000))])
    assert text.splitlines()[0] == "r,cutoff,K_r,tail_bound"
    assert text.splitlines()[1].startswith("1,1000,0.61")

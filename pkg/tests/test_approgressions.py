import math

import pytest

from stavg.approgressions import APWindow, ap_csv, bdh_csv, bdh_moment, class_thetas, e_ap, theta_ap
from stavg.errors import DomainError
from stavg.numthy import cached_primes


def test_theta_examples():
    assert theta_ap(APWindow(10, 10, 4, 1)) == pytest.approx(math.log(13) + math.log(17))
    assert theta_ap(APWindow(0, 10, 1, 0)) == pytest.approx(math.log(210))
    assert theta_ap(APWindow(0, 1, 3, 2)) == 0


def test_e_examples():
    assert e_ap(APWindow(10, 10, 4, 1)) == pytest.approx(0.3981, abs=1e-4)
    assert e_ap(APWindow(0, 10, 1, 0)) == pytest.approx(-4.6529, abs=1e-4)
    assert e_ap(APWindow(0, 1, 2, 1)) == -1
    with pytest.raises(DomainError):
        e_ap(APWindow(10, 10, 4, 2))
    with pytest.raises(DomainError):
        APWindow(0, 0)


def test_bdh_examples():
    assert bdh_moment(10, 10, 2) == pytest.approx(1.0965, abs=1e-3)
    assert bdh_moment(10, 10, 1) == pytest.approx(0.5482, abs=1e-3)
    assert bdh_moment(0, 1, 5) == pytest.approx(3.25)
    assert bdh_moment(1000, 500, 30, workers=4) == bdh_moment(1000, 500, 30)


@pytest.mark.parametrize("x,y", [(0, 100_000), (50_000, 50_000), (99_000, 1000)])
def test_partition(x, y):
    t = cached_primes(200_000)
    s = t.window(x, x + y)
    ps, lp = t.primes[s], t.logp[s]
    total = theta_ap(APWindow(x, y))
    for q in range(1, 101):
        lhs = math.fsum(class_thetas(x, y, q).values())
        rhs = total - math.fsum(lp[q % ps == 0].tolist())
        assert abs(lhs - rhs) <= 1e-9


def test_additivity():
    for q, a in [(1, 0), (4, 1), (7, 3), (30, 11)]:
        for x, y, z in [(0, 100, 50), (1000, 333, 667), (12345, 2000, 1)]:
            left = theta_ap(APWindow(x, y, q, a)) + theta_ap(APWindow(x + y, z, q, a))
            assert left == pytest.approx(theta_ap(APWindow(x, y + z, q, a)), rel=1e-15, abs=1e-12)


def test_csv_shapes():
    lines = ap_csv(10, 10, 4).splitlines()
    assert lines[0] == "q,a,theta,E"
    assert lines[1].startswith("4,1,5.398")
    assert bdh_csv([(2, 10.0, 1.5)]).splitlines() == ["Q,y,moment", "2,10,1.5"]


def test_bdh_shape_is_recorded():
    # the ratio is only reported; the assertion guards against gross blow-ups
    for x in (10**4, 10**5):
        y = x**0.7
        for Q in (10, 100):
            ratio = bdh_moment(x, y, Q) / (Q * y * math.log(x) ** 2)
            assert 0 <= ratio < 10

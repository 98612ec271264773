import math

import numpy as np
import pytest

from stavg.errors import ConsistencyError, DomainError, RangeError
from stavg.quadforms import h_table
from stavg.satotate import (
    BoxSpec,
    IntervalSpec,
    dual_path_average,
    exceptional_count,
    f_measure,
    f_measure_quad,
    family_average,
    family_counts,
    main_term,
    main_term_counts,
    reports_csv,
    reports_json,
    run_experiment,
    second_moment,
)


def test_f_measure_examples():
    assert f_measure(-1, 1) == pytest.approx(1, abs=1e-15)
    assert f_measure(0, 1) == pytest.approx(0.5, abs=1e-15)
    expected = (math.asin(0.8) - math.asin(0.6)) / math.pi
    assert f_measure(0.6, 0.8) == pytest.approx(expected, abs=1e-15)
    assert f_measure(0.6, 0.8) == pytest.approx(0.090334, abs=1e-6)
    with pytest.raises(DomainError):
        f_measure(-1.5, 0)


@pytest.mark.parametrize("a,b", [(-1, 1), (0, 1), (0.6, 0.8), (0.2, 0.8), (-0.3, 0.99), (0.5, 0.5)])
def test_f_measure_against_quadrature(a, b):
    assert abs(f_measure(a, b) - f_measure_quad(a, b)) <= 1e-12


def test_f_measure_additive():
    for a, b, c in [(-1, 0, 1), (0.1, 0.35, 0.9), (-0.7, -0.2, 0.4)]:
        assert f_measure(a, c) == pytest.approx(f_measure(a, b) + f_measure(b, c), abs=1e-12)


def test_box_spec():
    box = BoxSpec(2, 3)
    assert box.size == 35 and box.norm == 24
    assert box.curves().shape == (35, 2)
    na, nb = box.multiplicity(3)
    assert na.tolist() == [1, 2, 2] and nb.sum() == 7
    with pytest.raises(DomainError):
        BoxSpec(0, 1)


def test_family_average_trivial_cases():
    iv = IntervalSpec(0.2, 0.8)
    assert family_average(BoxSpec(3, 3), iv, 1) == 0
    assert family_average(BoxSpec(1, 1), IntervalSpec(0.3, 0.3), 20) == 0
    assert family_average(BoxSpec(1, 1), IntervalSpec(0.3, 0.3), 20, path="per_residue") == 0


def test_dual_path_a25_x200():
    box, iv = BoxSpec(25, 25), IntervalSpec(0.2, 0.8)
    avg, counts = dual_path_average(box, iv, 200)
    assert np.array_equal(counts, family_counts(box, iv, 200, "per_residue"))
    other = family_average(box, iv, 200, path="per_residue")
    assert abs(avg - other) <= 1e-9 * max(1, abs(avg))


def test_per_residue_limit():
    with pytest.raises(DomainError):
        family_counts(BoxSpec(1, 1), IntervalSpec(0.2, 0.8), 1000, "per_residue")
    with pytest.raises(DomainError):
        family_counts(BoxSpec(1, 1), IntervalSpec(0.2, 0.8), 10, "sideways")


def test_main_term_examples():
    iv = IntervalSpec(0.3, 0.9)
    want = (math.log(2) * 2 / 4 + math.log(3) * 2 / 6 + math.log(5) * 4 / 10
            + math.log(7) * 5 / 14)
    assert main_term(10, iv) == pytest.approx(want, rel=1e-15)
    assert main_term(10, iv) == pytest.approx(2.0515, abs=1e-4)
    assert main_term(4, IntervalSpec(0.9, 1.0)) == 0
    assert main_term(1, iv) == 0


def test_main_term_needs_coverage():
    with pytest.raises(RangeError):
        main_term(100, IntervalSpec(0.2, 0.8), h_table(50, sample=0))


def test_main_term_additive():
    table = h_table(3000, sample=0)
    a, b, d = 0.1, 0.45, 0.95
    whole = main_term_counts(3000, IntervalSpec(a, d), table)
    left = main_term_counts(3000, IntervalSpec(a, b), table)
    right = main_term_counts(3000, IntervalSpec(b, d), table, open_left=True)
    assert np.array_equal(whole, left + right)
    total = main_term(3000, IntervalSpec(a, b), table) + main_term(3000, IntervalSpec(b, d), table, open_left=True)
    assert main_term(3000, IntervalSpec(a, d), table) == pytest.approx(total, rel=1e-14)


def test_second_moment_x1():
    box, iv = BoxSpec(2, 3), IntervalSpec(0.2, 0.8)
    F = f_measure(0.2, 0.8)
    # every Theta is 0, and the box has (2A+1)(2B+1) points but weight 1/4AB
    assert second_moment(box, iv, 1) == pytest.approx(box.size / box.norm * F * F, rel=1e-15)


def test_second_moment_paths_and_lower_bound():
    box, iv, x = BoxSpec(10, 10), IntervalSpec(0.2, 0.8), 100
    m = second_moment(box, iv, x)  # raises if the two routes disagree
    avg = family_average(box, iv, x)
    xf = x * f_measure(0.2, 0.8)
    empirical_mean = avg * box.norm / box.size
    assert m >= box.size / box.norm * (empirical_mean - xf) ** 2 - 1e-9
    assert m >= 0


def test_exceptional_count_limits():
    box, iv = BoxSpec(3, 3), IntervalSpec(0.2, 0.8)
    assert exceptional_count(box, iv, 500, math.inf) == 0
    assert exceptional_count(box, iv, 500, 1e-12) == box.size
    with pytest.raises(DomainError):
        exceptional_count(box, iv, 500, 0)


def test_report_outputs():
    rep = run_experiment(BoxSpec(4, 4), IntervalSpec(0.2, 0.8), 300, rel_tol=0.3)
    header, row = reports_csv([rep]).splitlines()
    assert header == "x,alpha,beta,A,B,average,main_term,xF,second_moment,exceptional_count,rel_tol"
    assert row.startswith("300,0.20000000000000001,0.80000000000000004,4,4,")
    assert rep.average >= 0 and rep.second_moment >= 0
    assert '"exceptional_count"' in reports_json([rep])
    assert sum(rep.counts) > 0


def test_workers_do_not_change_reports():
    box, iv = BoxSpec(6, 6), IntervalSpec(0.2, 0.8)
    one = reports_csv([run_experiment(box, iv, 2000, workers=1)])
    many = reports_csv([run_experiment(box, iv, 2000, workers=5)])
    assert one == many


@pytest.mark.slow
def test_exceptional_fraction_falls_with_x():
    box, iv = BoxSpec(40, 40), IntervalSpec(0.2, 0.8)
    fractions = [exceptional_count(box, iv, x, 0.2, backend="bsgs") / box.size
                 for x in (1000, 2500, 5000)]
    assert fractions[0] > fractions[1] > fractions[2]

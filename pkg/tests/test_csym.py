import random
from fractions import Fraction

import pytest

from symprune.codes import ClassCode, build_sr, ifdp, ifdp_fraction
from symprune.csym import (
    NotACube,
    OutOfRange,
    csym1,
    expanded_subboxes,
    generate_subbox,
    process_representative,
    select_bisection_point,
)
from symprune.interval import Box, Interval
from symprune.problems import cyclic_n_roots, example_sphere, parse_problem
from symprune.solver import BudgetExceeded, Provenance, SolutionSet, SolverConfig, SolveStats
from symprune.symmetry import CycleSymmetry, apply_box, box_period


def test_midpoint():
    assert select_bisection_point(-10, 10) == 0
    assert select_bisection_point(0, 2) == 1


def test_fixed_point_must_be_interior():
    assert select_bisection_point(0, 2, 0.5) == 0.5
    with pytest.raises(OutOfRange):
        select_bisection_point(0, 2, 2.0)
    with pytest.raises(OutOfRange):
        select_bisection_point(0, 2, -1)


def test_subbox_two_dims():
    sym = CycleSymmetry.full(2)
    cube = Box.cube(0, 2, 2)
    assert generate_subbox("01", 0, 2, 1, cube, sym) == Box.from_bounds([0, 1], [1, 2])
    assert generate_subbox("00", 0, 2, 1, cube, sym) == Box.cube(0, 1, 2)


def test_subbox_from_code():
    sym = CycleSymmetry.full(3)
    cube = Box.cube(-1, 1, 3)
    want = Box.from_bounds([0, 0, -1], [1, 1, 0])
    assert generate_subbox("110", -1, 1, 0, cube, sym) == want
    assert generate_subbox(ClassCode((0, 0), 2), 0, 2, 1, Box.cube(0, 2, 2), CycleSymmetry.full(2)) \
        == Box.cube(1, 2, 2)


def test_subbox_passes_other_dims_through():
    sym = CycleSymmetry(3, (0, 2))
    full = Box([Interval(0, 2), Interval(5, 7), Interval(0, 2)])
    assert generate_subbox("01", 0, 2, 1, full, sym) == Box([Interval(0, 1), Interval(5, 7), Interval(1, 2)])


def test_subbox_rejects_non_cube():
    sym = CycleSymmetry.full(2)
    with pytest.raises(NotACube):
        generate_subbox("01", 0, 2, 1, Box.from_bounds([0, 0], [2, 3]), sym)


def test_csym_rejects_non_cube():
    p = parse_problem("var x in [0, 1]\nvar y in [0, 2]\ncycle (x y)\nconstraint x + y in [1, 1]\n")
    with pytest.raises(NotACube):
        csym1(p)


def test_csym_needs_cycle():
    with pytest.raises(ValueError):
        csym1(parse_problem("var x in [0, 1]\nconstraint x in [0, 1]\n"))


def _fake_solved(boxes):
    return SolutionSet([(b, Provenance()) for b in boxes]), SolveStats(len(boxes), 0, len(boxes))


def test_period_five_representative_expands_to_ten():
    sym = CycleSymmetry.full(5)
    rep = generate_subbox("00101", -10, 10, 0, Box.cube(-10, 10, 5), sym)
    found = [Box.from_bounds([-1, -1, 1, -1, 1], [-0.9, -0.9, 1.1, -0.9, 1.1]),
             Box.from_bounds([-3, -2, 1, -1, 1], [-2.9, -1.9, 1.1, -0.9, 1.1])]
    total, stats, n_own = process_representative(rep, sym, None, rep_id=4, solved=_fake_solved(found))
    assert n_own == 2 and len(total) == 10
    assert [prov.shift for _, prov in total.boxes] == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]
    assert all(prov.representative == 4 for _, prov in total.boxes)
    assert len(set(total.just_boxes())) == 10


def test_period_one_representative_unchanged():
    sym = CycleSymmetry.full(3)
    rep = Box.cube(0, 1, 3)
    found = [Box.cube(0.25, 0.5, 3)]
    total, _, _ = process_representative(rep, sym, None, solved=_fake_solved(found))
    assert total.just_boxes() == found


def test_empty_result_stays_empty():
    sym = CycleSymmetry.full(4)
    rep = generate_subbox("0001", 0, 2, 1, Box.cube(0, 2, 4), sym)
    total, _, _ = process_representative(rep, sym, None, solved=_fake_solved([]))
    assert len(total) == 0


def test_sphere_is_empty_with_four_representatives():
    sols, report = csym1(example_sphere())
    assert len(sols) == 0
    assert report.representatives_solved == 4
    assert report.fraction_processed == Fraction(1, 2)


@pytest.mark.parametrize("k", range(2, 11))
def test_classes_tile_the_cube(k):
    rng = random.Random(k)
    x_star = rng.uniform(-0.9, 0.9)
    boxes = expanded_subboxes(k, -1.0, 1.0, x_star)
    assert len(boxes) == 2 ** k
    # each subbox is one binary choice per dimension, so exact tiling
    # means every choice vector appears exactly once
    keys = {tuple(d.lo == -1.0 for d in b) for b in boxes}
    assert len(keys) == 2 ** k
    for b in boxes:
        for d in b:
            assert (d.lo, d.hi) in ((-1.0, x_star), (x_star, 1.0))
    vol = sum(Fraction(b.volume()) for b in boxes)
    assert abs(vol - 2 ** k) <= 2 ** k * 1e-12


def test_tiling_volume_with_extra_dimension():
    sym = CycleSymmetry(3, (0, 1))
    full = Box([Interval(-1, 1), Interval(-1, 1), Interval(0, 3)])
    total = 0.0
    for e in build_sr(2):
        b = generate_subbox(e.code, -1, 1, 0.25, full, sym)
        total += sum(apply_box(sym, b, i).volume() for i in range(box_period(sym, b)))
    assert total == pytest.approx(full.volume())


def test_report_totals_and_fraction():
    cfg = SolverConfig(epsilon=1e-3)
    sols, report = csym1(cyclic_n_roots(3), cfg)
    assert len(sols) == 0
    assert report.representatives_solved == len(build_sr(3))
    per = report.per_representative
    assert report.totals.boxes_processed == sum(r.stats.boxes_processed for r in per)
    assert report.totals.boxes_rejected == sum(r.stats.boxes_rejected for r in per)
    assert report.fraction_processed == 1 / ifdp_fraction(3)
    assert report.ifdp == ifdp(3)


def test_parallel_matches_sequential():
    cfg = SolverConfig(epsilon=1e-2)
    p = parse_problem(
        "var x in [-2, 2]\nvar y in [-2, 2]\ncycle (x y)\nsigma (1 -> 1)\n"
        "constraint x^2 + y^2 in [1, 1]\n")
    a, ra = csym1(p, cfg)
    b, rb = csym1(p, cfg, parallel=2)
    assert a.boxes == b.boxes
    assert [r.n_solutions for r in ra.per_representative] == [r.n_solutions for r in rb.per_representative]


def test_budget_exceeded_carries_report():
    p = parse_problem(
        "var x in [-2, 2]\nvar y in [-2, 2]\ncycle (x y)\n"
        "constraint x^2 + y^2 in [1, 1]\n")
    with pytest.raises(BudgetExceeded) as err:
        csym1(p, SolverConfig(epsilon=1e-4, max_boxes=200))
    report = err.value.stats
    assert report.totals.boxes_processed >= 200
    assert len(err.value.solutions) > 0


def test_expansion_accounting_circle():
    # wall duplicates are kept as separate boxes, so the count is exact
    p = parse_problem(
        "var x in [-2, 2]\nvar y in [-2, 2]\ncycle (x y)\n"
        "constraint x^2 + y^2 in [1, 1]\n")
    sols, report = csym1(p, SolverConfig(epsilon=1e-2), bisection=0.3)
    want = sum(r.period * r.n_solutions for r in report.per_representative)
    assert len(sols) == want == report.total_solutions

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from symprune.interval import Interval
from symprune.problems import (
    SPHERE_EXAMPLE,
    Add,
    BadInterval,
    Const,
    Div,
    DuplicateVariable,
    Mul,
    Neg,
    Pow,
    ProblemSyntaxError,
    Sub,
    UnknownVariable,
    Var,
    check_problem_symmetry,
    cyclic_n_roots,
    emit_problem,
    example_sphere,
    parse_problem,
)
from symprune.symmetry import apply_point


def test_parse_sphere_file():
    p = parse_problem(SPHERE_EXAMPLE)
    assert p.var_names == ("x1", "x2", "x3")
    assert len(p.constraints) == 4
    assert p.symmetry.cycle == (0, 1, 2)
    assert list(p.sigma) == [0, 2, 3, 1]


def test_sphere_ranges():
    p = example_sphere()
    assert p.constraints[0].range == (5, 5)
    assert p.constraints[1].range == (0, math.inf)
    assert p.initial_box == tuple(Interval(-1, 1) for _ in range(3))


def test_expression_tree():
    p = parse_problem("var a in [0, 1]\nvar b in [0, 1]\nconstraint -a + 2*b^3 / (a - 1) in [0, 0]\n")
    x0, x1 = Var(0), Var(1)
    assert p.constraints[0].expr == Add(Neg(x0), Div(Mul(Const(2.0), Pow(x1, 3)), Sub(x0, Const(1.0))))


def test_evaluate_and_gradient():
    p = example_sphere()
    f = p.constraints[0].expr
    assert f.evaluate((1.0, 2.0, 3.0)) == 14.0
    value, grad = f.gradient((1.0, 2.0, 3.0))
    assert value == 14.0 and grad == {0: 2.0, 1: 4.0, 2: 6.0}


def test_bad_interval():
    with pytest.raises(BadInterval):
        parse_problem("var x in [2, 1]\n")


def test_unknown_variable():
    with pytest.raises(UnknownVariable) as err:
        parse_problem("var x in [0, 1]\nconstraint x + y in [0, 0]\n")
    assert err.value.line == 2


def test_duplicate_variable():
    with pytest.raises(DuplicateVariable):
        parse_problem("var x in [0, 1]\nvar x in [0, 2]\n")


@pytest.mark.parametrize("text", [
    "var x in 0, 1]\n",
    "var x in [0, 1]\nconstraint x +* x in [0, 0]\n",
    "var x in [0, 1]\nconstraint x^2^2 in [0, 0]\n",
    "var x in [0, 1]\nconstraint x^0 in [0, 0]\n",
    "var x in [0, 1]\nconstraint (x in [0, 0]\n",
    "var x in [0, 1]\ncycle (x)\n",
    "var x in [0, 1]\nvar y in [0, 1]\nconstraint x in [0, 1]\nsigma (1 -> 2)\n",
    "bogus x\n",
])
def test_syntax_errors(text):
    with pytest.raises(ProblemSyntaxError):
        parse_problem(text)


def test_error_carries_column():
    with pytest.raises(ProblemSyntaxError) as err:
        parse_problem("var x in [0, 1]\nconstraint x + ) in [0, 0]\n")
    assert err.value.line == 2 and err.value.column > 1


def test_comments_and_blank_lines():
    p = parse_problem("# header\n\nvar x in [0, 1]  # trailing\nconstraint x in [0, 1]\n")
    assert p.n_vars == 1 and len(p.constraints) == 1


def test_round_trip_sphere():
    p = example_sphere()
    assert parse_problem(emit_problem(p)) == p


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_round_trip_cyclic(n):
    p = cyclic_n_roots(n)
    assert parse_problem(emit_problem(p)) == p


def test_cyclic_five_equations():
    p = cyclic_n_roots(5)
    x = (1.5, -2.0, 0.5, 3.0, -1.25)
    x1, x2, x3, x4, x5 = x
    want = [
        x1 + x2 + x3 + x4 + x5,
        x1 * x2 + x2 * x3 + x3 * x4 + x4 * x5 + x5 * x1,
        x1 * x2 * x3 + x2 * x3 * x4 + x3 * x4 * x5 + x4 * x5 * x1 + x5 * x1 * x2,
        x1 * x2 * x3 * x4 + x2 * x3 * x4 * x5 + x3 * x4 * x5 * x1 + x4 * x5 * x1 * x2 + x5 * x1 * x2 * x3,
        x1 * x2 * x3 * x4 * x5 - 1,
    ]
    got = [c.expr.evaluate(x) for c in p.constraints]
    assert got == pytest.approx(want, rel=1e-12)
    assert all(c.range == (0, 0) for c in p.constraints)
    assert p.initial_box == tuple(Interval(-10, 10) for _ in range(5))


def test_cyclic_sizes_and_domains():
    assert len(cyclic_n_roots(3).constraints) == 3
    assert cyclic_n_roots(8).initial_box[0] == (-5, 5)
    assert cyclic_n_roots(4, (-2, 2)).initial_box[3] == (-2, 2)
    with pytest.raises(ValueError):
        cyclic_n_roots(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_generated_problems_are_symmetric(n):
    assert check_problem_symmetry(cyclic_n_roots(n))


def test_sphere_is_symmetric():
    assert check_problem_symmetry(example_sphere())


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2 ** 31))
def test_cyclic_invariant_under_shifts(n, seed):
    p = cyclic_n_roots(n)
    rng = random.Random(seed)
    x = [rng.uniform(-2, 2) for _ in range(n)]
    base = [c.expr.evaluate(x) for c in p.constraints]
    for i in range(1, n):
        y = apply_point(p.symmetry, x, i)
        assert [c.expr.evaluate(y) for c in p.constraints] == pytest.approx(base, rel=1e-9, abs=1e-9)


def test_text_form_of_negative_constant():
    p = parse_problem("var x in [-1, 1]\nconstraint x * -2 in [-inf, 0]\n")
    text = emit_problem(p)
    assert "(-2)" in text and "-inf" in text
    assert parse_problem(text) == p

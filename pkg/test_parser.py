import math

import numpy as np
import pytest

from hessbb.core.expr import (
    Add,
    Const,
    Div,
    Mul,
    Neg,
    PowInt,
    Sub,
    Var,
    add,
    div,
    eval_point,
    free_vars,
    mul,
    pow_int,
    reindex,
    substitute,
    to_numpy,
)
from hessbb.core.parser import format_expr, parse
from hessbb.errors import EvaluationError, ParseError

X = ["x"]
X12 = ["x1", "x2"]


class TestParse:
    def test_polynomial(self):
        e = parse("x^2 - 6*x + 9", X)
        assert eval_point(e, [2.0]) == 1.0
        assert eval_point(e, [3.0]) == 0.0

    def test_power_binds_tighter_than_unary_minus(self):
        e = parse("-x^2", X)
        assert e == Neg(PowInt(Var(0), 2))
        assert eval_point(e, [3.0]) == -9.0

    def test_negative_exponent_becomes_reciprocal(self):
        assert parse("x^-2", X) == Div(Const(1.0), PowInt(Var(0), 2))

    def test_negative_literal_folds(self):
        assert parse("-3*x", X) == Mul((Const(-3.0), Var(0)))

    def test_functions(self):
        e = parse("cos(x1)*sin(x2) - x1/(x2^2+1)", X12)
        assert eval_point(e, [0.0, 0.0]) == 0.0
        assert eval_point(e, [1.0, 1.0]) == pytest.approx(math.cos(1) * math.sin(1) - 0.5)

    def test_flat_sums(self):
        e = parse("x1 + x2 + 1", X12)
        assert isinstance(e, Add) and len(e.args) == 3

    def test_variable_order_follows_names(self):
        assert parse("x2", X12) == Var(1)
        assert parse("x2", ["x2", "x1"]) == Var(0)

    @pytest.mark.parametrize("text, position", [
        ("x^2.5", 2),
        ("2 x", 2),
        ("(x", 2),
        ("x$", 1),
        ("y + 1", 0),
    ])
    def test_errors_report_position(self, text, position):
        with pytest.raises(ParseError) as exc:
            parse(text, X)
        assert exc.value.position == position

    def test_implicit_multiplication_message(self):
        with pytest.raises(ParseError, match="implicit multiplication"):
            parse("2 x", X)

    def test_exponent_tower(self):
        assert parse("x^2^3", X) == PowInt(Var(0), 8)
        with pytest.raises(ParseError, match="exponent exceeds 1000"):
            parse("x^9^9^9", X)
        with pytest.raises(ParseError, match="exponent exceeds 1000"):
            parse("x^1001", X)
        with pytest.raises(ParseError, match="exponent exceeds 1000"):
            parse("x^" + "9" * 5000, X)

    def test_unknown_identifier_message(self):
        with pytest.raises(ParseError, match="unknown identifier 'y'"):
            parse("y", X)


class TestFormat:
    def test_parse_format_parse(self, corpus):
        for problem in corpus.values():
            names = problem.settings.var_names
            e = problem.objective
            assert parse(format_expr(e, names), names) == e

    def test_random_trees_round_trip(self, random_expr, rng):
        for _ in range(1000):
            e = random_expr(depth=3, n=2)
            once = parse(format_expr(e), X12)
            assert parse(format_expr(once), X12) == once
            x = rng.uniform(-1, 1, 2)
            assert eval_point(once, x) == pytest.approx(eval_point(e, x), rel=1e-12, abs=1e-12)

    def test_textbook_output(self):
        text = "(x1+10*x2)^2+5*(x3-x4)^2+(x2-2*x3)^4+10*(x1-x4)^4"
        assert format_expr(parse(text, ["x1", "x2", "x3", "x4"])) == text

    def test_default_names_and_parentheses(self):
        e = Sub(Var(0), Add((Var(1), Const(1.0))))
        assert format_expr(e) == "x1-(x2+1)"
        assert format_expr(Div(Var(0), Mul((Const(2.0), Var(1))))) == "x1/(2*x2)"
        assert format_expr(PowInt(Neg(Var(0)), 2)) == "(-x1)^2"


class TestSmartConstructors:
    def test_add_folds_constants(self):
        assert add(Const(1.0), Var(0), Const(2.0)) == Add((Const(3.0), Var(0)))
        assert add(Const(1.0), Const(-1.0)) == Const(0.0)

    def test_mul_coefficient_first(self):
        assert mul(Var(0), Const(2.0), Const(3.0)) == Mul((Const(6.0), Var(0)))
        assert mul(Const(-1.0), Var(0)) == Neg(Var(0))
        assert mul(Const(0.0), Var(0)) == Const(0.0)

    def test_div_and_pow(self):
        assert div(Const(1.0), Const(4.0)) == Const(0.25)
        assert div(Var(0), Const(0.0)) == Div(Var(0), Const(0.0))
        assert pow_int(PowInt(Var(0), 2), 3) == PowInt(Var(0), 6)
        assert pow_int(Var(0), 1) == Var(0)


class TestEvaluation:
    def test_error_path_points_at_node(self):
        e = parse("1 + 1/(x-1)", X)
        with pytest.raises(EvaluationError) as exc:
            eval_point(e, [1.0])
        assert exc.value.path == ("Add", "1", "Div")

    def test_log_domain(self):
        with pytest.raises(EvaluationError):
            eval_point(parse("log(x)", X), [-1.0])

    def test_numpy_matches_points(self, corpus, rng):
        for problem in corpus.values():
            box = problem.box
            pts = np.array([rng.uniform(iv.lo, iv.hi, 25) for iv in box])
            values = to_numpy(problem.objective)(pts)
            expected = [eval_point(problem.objective, pts[:, k]) for k in range(pts.shape[1])]
            np.testing.assert_allclose(values, expected, rtol=1e-12, atol=1e-9)

    def test_numpy_broadcasts_constants(self):
        assert to_numpy(Const(2.0))(np.zeros((1, 5))).shape == (5,)

    def test_substitute_and_reindex(self):
        e = parse("x1*x2 + x2", X12)
        fixed = substitute(e, 0, 2.0)
        assert free_vars(fixed) == frozenset({1})
        assert eval_point(fixed, [0.0, 3.0]) == 9.0
        moved = reindex(fixed, {1: 0})
        assert eval_point(moved, [3.0]) == 9.0

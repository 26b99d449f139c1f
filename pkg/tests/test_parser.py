import random

import pytest

from opcalc.operators import DiffOp, compose
from opcalc.parser import (
    ParseError,
    evaluate_action,
    normalize,
    parse_expression,
    parse_operator,
    parse_polynomial,
    parse_symbol,
)
from opcalc.poly import Polynomial
from opcalc.sampling import random_operator, random_polynomial, random_symbol
from opcalc.symbols import PhaseSymbol


class TestGrammar:
    def test_noncommutative_product(self):
        expr = parse_expression("d1*x1", 1)
        assert normalize(expr, 1) == compose(
            DiffOp.partial(1, 0), DiffOp.from_poly(Polynomial.variable(1, 0))
        )

    def test_two_term_sum(self):
        op = parse_operator("x1^2*d1*d2 + d3", 3)
        assert len(op) == 2
        assert op.order() == 2

    def test_precedence(self):
        assert parse_operator("1 + 2*3", 1) == DiffOp.const(1, 7)
        assert parse_operator("2*x1^2", 1) == DiffOp.from_poly(
            2 * Polynomial.variable(1, 0) ** 2
        )

    def test_power_binds_to_factor(self):
        got = parse_operator("x1*d1^2", 1)
        dd = compose(DiffOp.partial(1, 0), DiffOp.partial(1, 0))
        assert got == compose(DiffOp.from_poly(Polynomial.variable(1, 0)), dd)

    def test_parenthesized_power_is_written_order(self):
        assert parse_operator("(x1*d1)^2", 1) == parse_operator("x1*d1*x1*d1", 1)

    def test_rationals(self):
        from fractions import Fraction

        assert parse_operator("1/2 + 1/2", 1) == DiffOp.identity(1)
        assert parse_polynomial("-3/4*x1", 1) == Polynomial(1, {(1,): Fraction(-3, 4)})

    def test_leading_sign(self):
        assert parse_operator("-x1 + 1", 1) == DiffOp.from_poly(
            1 - Polynomial.variable(1, 0)
        )
        assert parse_operator("+d1", 1) == DiffOp.partial(1, 0)


class TestErrors:
    def test_zero_index(self):
        with pytest.raises(ParseError) as err:
            parse_expression("d0", 1)
        assert err.value.position == 0

    def test_index_beyond_dimension(self):
        with pytest.raises(ParseError):
            parse_expression("x3", 2)

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_expression("x1 + * 2", 1)
        assert err.value.position == 5

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError):
            parse_expression("(x1 + 1", 1)

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse_expression("x1 )", 1)

    def test_bad_character(self):
        with pytest.raises(ParseError):
            parse_expression("x1 $ 2", 1)

    def test_fiber_vars_rejected_in_operator_mode(self):
        with pytest.raises(ParseError):
            parse_expression("xi1", 1, "operator")

    def test_derivations_rejected_in_symbol_mode(self):
        with pytest.raises(ParseError):
            parse_expression("d1", 1, "symbol")

    def test_derivations_rejected_in_polynomial_mode(self):
        with pytest.raises(ParseError):
            parse_polynomial("d1", 1)

    def test_fractional_exponent_rejected(self):
        with pytest.raises(ParseError):
            parse_expression("x1^1/2", 1)


class TestNormalize:
    def test_reorders_to_canonical(self):
        assert str(parse_operator("d1*x1", 1)) == "x1*d1 + 1"

    def test_already_normal(self):
        assert str(parse_operator("x1*d1", 1)) == "x1*d1"

    def test_euler_squared(self):
        assert str(parse_operator("x1*d1*x1*d1", 1)) == "x1^2*d1^2 + x1*d1"

    def test_agrees_with_direct_action(self):
        # the expression applied factor-by-factor must equal the
        # normalized operator applied once
        rng = random.Random(1)
        texts = [
            "d1*x1*d1 + 2*x1",
            "(x1 + d1)^2",
            "x1^2*d1 - d1*x1^2",
            "3*(d1*x1)^2 - 1/2*x1",
        ]
        for text in texts:
            expr = parse_expression(text, 1)
            op = normalize(expr, 1)
            for _ in range(5):
                f = random_polynomial(rng, 1, 5)
                assert op.apply(f) == evaluate_action(expr, f)

    def test_random_expressions_match_action(self):
        rng = random.Random(2)
        atoms = ["x1", "x2", "d1", "d2", "2", "1/2"]
        for _ in range(100):
            parts = [rng.choice(atoms) for _ in range(rng.randint(1, 5))]
            text = "*".join(parts)
            if rng.random() < 0.5:
                text += f" + {rng.choice(atoms)}"
            expr = parse_expression(text, 2)
            op = normalize(expr, 2)
            f = random_polynomial(rng, 2, 5)
            assert op.apply(f) == evaluate_action(expr, f)


class TestRoundTrip:
    def test_operator_fixed_point(self):
        rng = random.Random(3)
        for _ in range(40):
            dim = rng.randint(1, 3)
            op = random_operator(rng, dim, 4, 4)
            text = str(op)
            assert parse_operator(text, dim) == op
            assert str(parse_operator(text, dim)) == text

    def test_symbol_fixed_point(self):
        rng = random.Random(4)
        for _ in range(40):
            dim = rng.randint(1, 3)
            s = random_symbol(rng, dim, 4, 4)
            text = str(s)
            assert parse_symbol(text, dim) == s
            assert str(parse_symbol(text, dim)) == text

    def test_polynomial_fixed_point(self):
        rng = random.Random(5)
        for _ in range(40):
            dim = rng.randint(1, 3)
            p = random_polynomial(rng, dim, 4)
            text = str(p)
            assert parse_polynomial(text, dim) == p

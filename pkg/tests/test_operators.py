import random
from fractions import Fraction

import pytest

from opcalc.operators import (
    DiffOp,
    ad_nilpotency_witness,
    commutator,
    compose,
    conjugation,
    divergence,
    formal_adjoint,
    grothendieck_member,
    is_vector_field,
    left_mult,
    right_mult,
    split_first_order,
)
from opcalc.poly import Polynomial
from opcalc.sampling import (
    dense_random_polynomial,
    random_operator,
    random_operator_of_order,
    random_polynomial,
    random_vector_field,
)


def x(dim, i):
    return Polynomial.variable(dim, i)


def d(dim, i):
    return DiffOp.partial(dim, i)


def m(p):
    return DiffOp.from_poly(p)


# --- independent action oracle ------------------------------------------
# Naive monomial calculus on raw dicts, sharing no code with DiffOp.


def naive_diff(terms, var, dim):
    out = {}
    for mono, c in terms.items():
        if mono[var]:
            lowered = mono[:var] + (mono[var] - 1,) + mono[var + 1 :]
            out[lowered] = out.get(lowered, 0) + c * mono[var]
    return {k: v for k, v in out.items() if v}


def naive_mul(a, b):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = tuple(p + q for p, q in zip(ma, mb))
            out[mono] = out.get(mono, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def naive_apply(op, f):
    """Apply raw operator data {alpha: {mono: coeff}} to raw polynomial data."""
    dim = len(next(iter(f), ()) or next(iter(op)))
    total = {}
    for alpha, coeff in op.items():
        df = dict(f)
        for var, k in enumerate(alpha):
            for _ in range(k):
                df = naive_diff(df, var, dim)
        for mono, c in naive_mul(coeff, df).items():
            total[mono] = total.get(mono, 0) + c
    return {k: v for k, v in total.items() if v}


def raw_poly(p):
    return {mono: Fraction(c) for mono, c in p.terms()}


def raw_op(op):
    return {alpha: raw_poly(c) for alpha, c in op.terms()}


class TestApply:
    def test_euler_on_square(self):
        euler = compose(m(x(1, 0)), d(1, 0))
        assert euler.apply(x(1, 0) ** 2) == 2 * x(1, 0) ** 2

    def test_second_derivative(self):
        dd = compose(d(1, 0), d(1, 0))
        assert dd.apply(x(1, 0) ** 3) == 6 * x(1, 0)

    def test_identity(self):
        f = x(2, 0) * x(2, 1) + 3
        assert DiffOp.identity(2).apply(f) == f

    def test_against_naive_oracle(self):
        rng = random.Random(1)
        for _ in range(25):
            dim = rng.randint(1, 3)
            op = random_operator(rng, dim, 3, 3)
            f = random_polynomial(rng, dim, 4)
            assert raw_poly(op.apply(f)) == naive_apply(raw_op(op), raw_poly(f))


class TestCompose:
    def test_derivative_after_coordinate(self):
        got = compose(d(1, 0), m(x(1, 0)))
        assert got == compose(m(x(1, 0)), d(1, 0)) + DiffOp.identity(1)
        assert str(got) == "x1*d1 + 1"

    def test_disjoint_derivatives(self):
        got = compose(d(2, 0), d(2, 1))
        assert got == DiffOp(2, {(1, 1): Polynomial.one(2)})

    def test_euler_squared(self):
        euler = compose(m(x(1, 0)), d(1, 0))
        got = compose(euler, euler)
        assert str(got) == "x1^2*d1^2 + x1*d1"

    def test_order_subadditive(self):
        rng = random.Random(2)
        for _ in range(40):
            dim = rng.randint(1, 3)
            a = random_operator(rng, dim, 4, 3)
            b = random_operator(rng, dim, 4, 3)
            c = compose(a, b)
            if a.order() is None or b.order() is None:
                assert c.order() is None
            else:
                assert c.order() is not None and c.order() <= a.order() + b.order()

    def test_action_oracle(self):
        # compose must agree with applying the factors in sequence
        rng = random.Random(3)
        for _ in range(30):
            dim = rng.randint(1, 3)
            a = random_operator(rng, dim, 3, 3)
            b = random_operator(rng, dim, 3, 3)
            f = random_polynomial(rng, dim, 6)
            assert compose(a, b).apply(f) == a.apply(b.apply(f))


class TestCommutator:
    def test_canonical_pair(self):
        assert commutator(d(1, 0), m(x(1, 0))) == DiffOp.identity(1)

    def test_euler_with_derivative(self):
        euler = compose(m(x(1, 0)), d(1, 0))
        assert commutator(euler, d(1, 0)) == -d(1, 0)

    def test_second_derivative_with_coordinate(self):
        dd = compose(d(1, 0), d(1, 0))
        assert commutator(dd, m(x(1, 0))) == 2 * d(1, 0)

    def test_filtration_law(self):
        rng = random.Random(4)
        for _ in range(60):
            dim = rng.randint(1, 3)
            a = random_operator(rng, dim, 4, 4)
            b = random_operator(rng, dim, 4, 4)
            br = commutator(a, b)
            if a.order() is None or b.order() is None:
                assert br.order() is None
            else:
                bound = a.order() + b.order() - 1
                assert br.order() is None or br.order() <= bound

    def test_jacobi(self):
        rng = random.Random(5)
        for _ in range(20):
            dim = rng.randint(1, 2)
            a, b, c = (random_operator(rng, dim, 3, 2, 5) for _ in range(3))
            total = (
                commutator(a, commutator(b, c))
                + commutator(b, commutator(c, a))
                + commutator(c, commutator(a, b))
            )
            assert not total


class TestOrder:
    def test_normal_form_order(self):
        op = DiffOp(
            3,
            {
                (1, 1, 0): x(3, 0) ** 2,
                (0, 0, 1): Polynomial.one(3),
            },
        )
        assert op.order() == 2

    def test_multiplication_operator(self):
        assert m(x(2, 0) + 1).order() == 0

    def test_zero(self):
        assert DiffOp.zero(2).order() is None


class TestGrothendieck:
    def probes(self, dim, rng=None):
        rng = rng or random.Random(6)
        return [x(dim, i) for i in range(dim)] + [
            dense_random_polynomial(rng, dim, 3) for _ in range(5)
        ]

    def test_derivative_levels(self):
        probes = self.probes(2)
        assert grothendieck_member(d(2, 0), 1, probes)
        assert not grothendieck_member(d(2, 0), 0, probes)

    def test_multiplication_is_level_zero(self):
        probes = self.probes(1)
        assert grothendieck_member(m(x(1, 0)), 0, probes)

    def test_second_derivative_not_first_order(self):
        probes = self.probes(1)
        dd = compose(d(1, 0), d(1, 0))
        assert not grothendieck_member(dd, 1, probes)
        assert grothendieck_member(dd, 2, probes)

    def test_zero_operator(self):
        probes = self.probes(1)
        assert grothendieck_member(DiffOp.zero(1), -1, probes)
        assert not grothendieck_member(d(1, 0), -1, probes)

    def test_matches_normal_form_order(self):
        rng = random.Random(7)
        for _ in range(15):
            dim = rng.randint(1, 2)
            order = rng.randint(0, 3)
            op = random_operator_of_order(rng, dim, order, 3)
            probes = self.probes(dim, rng)
            for level in range(-1, order + 2):
                assert grothendieck_member(op, level, probes) == (level >= order)

    def test_rejects_empty_probes(self):
        with pytest.raises(ValueError):
            grothendieck_member(d(1, 0), 0, [])


class TestAdjoint:
    def test_derivative(self):
        assert formal_adjoint(d(1, 0)) == -d(1, 0)

    def test_multiplication_fixed(self):
        f = x(2, 0) ** 2 + 3
        assert formal_adjoint(m(f)) == m(f)

    def test_euler(self):
        euler = compose(m(x(1, 0)), d(1, 0))
        assert formal_adjoint(euler) == -euler - DiffOp.identity(1)

    def test_product_rule_and_involution(self):
        rng = random.Random(8)
        for _ in range(25):
            dim = rng.randint(1, 3)
            a = random_operator(rng, dim, 3, 3)
            b = random_operator(rng, dim, 3, 3)
            assert formal_adjoint(compose(a, b)) == compose(
                formal_adjoint(b), formal_adjoint(a)
            )
            assert formal_adjoint(formal_adjoint(a)) == a

    def test_conjugation(self):
        assert conjugation(d(1, 0)) == d(1, 0)
        assert conjugation(m(x(1, 0))) == -m(x(1, 0))
        euler = compose(m(x(1, 0)), d(1, 0))
        assert conjugation(euler) == euler + DiffOp.identity(1)

    def test_conjugation_preserves_brackets(self):
        rng = random.Random(9)
        for _ in range(20):
            dim = rng.randint(1, 2)
            a = random_operator(rng, dim, 3, 3)
            b = random_operator(rng, dim, 3, 3)
            assert conjugation(commutator(a, b)) == commutator(
                conjugation(a), conjugation(b)
            )
            assert conjugation(conjugation(a)) == a


class TestNilpotency:
    def test_cubic_witness(self):
        assert ad_nilpotency_witness(d(1, 0), x(1, 0) ** 3, 8) == 4

    def test_euler_never_terminates(self):
        euler = compose(m(x(1, 0)), d(1, 0))
        assert ad_nilpotency_witness(euler, x(1, 0), 20) is None

    def test_multiplication_immediate(self):
        g = x(2, 0) * x(2, 1)
        assert ad_nilpotency_witness(m(g), x(2, 1) ** 2, 5) == 1

    def test_monomial_degree_rule(self):
        for k in range(7):
            f = Polynomial.monomial(1, (k,))
            assert ad_nilpotency_witness(d(1, 0), f, 8) == k + 1


class TestDivergence:
    def test_euler_field(self):
        assert divergence(compose(m(x(1, 0)), d(1, 0))) == Polynomial.one(1)

    def test_constant_field(self):
        assert not divergence(d(1, 0))

    def test_rotation_free(self):
        field = compose(m(x(2, 1)), d(2, 0)) + compose(m(x(2, 0)), d(2, 1))
        assert not divergence(field)

    def test_rejects_non_fields(self):
        with pytest.raises(ValueError):
            divergence(m(x(1, 0)))
        with pytest.raises(ValueError):
            divergence(compose(d(1, 0), d(1, 0)))

    def test_cocycle(self):
        rng = random.Random(10)
        for _ in range(20):
            dim = rng.randint(1, 3)
            a = random_vector_field(rng, dim, 3)
            b = random_vector_field(rng, dim, 3)
            lhs = divergence(commutator(a, b))
            assert lhs == a.apply(divergence(b)) - b.apply(divergence(a))


class TestMultOperators:
    def test_left(self):
        assert left_mult(x(1, 0), d(1, 0)) == compose(m(x(1, 0)), d(1, 0))

    def test_right(self):
        got = right_mult(x(1, 0), d(1, 0))
        assert got == compose(m(x(1, 0)), d(1, 0)) + DiffOp.identity(1)

    def test_left_minus_right_is_ad(self):
        rng = random.Random(11)
        for _ in range(20):
            dim = rng.randint(1, 3)
            f = random_polynomial(rng, dim, 4)
            op = random_operator(rng, dim, 3, 3)
            assert left_mult(f, op) - right_mult(f, op) == commutator(m(f), op)

    def test_centralizer_membership(self):
        rng = random.Random(12)
        for _ in range(15):
            dim = rng.randint(1, 2)
            f = random_polynomial(rng, dim, 3)
            g = random_polynomial(rng, dim, 3)
            op = random_operator(rng, dim, 3, 3)
            ad_g = commutator(m(g), op)
            assert left_mult(f, ad_g) == commutator(m(g), left_mult(f, op))
            assert right_mult(f, ad_g) == commutator(m(g), right_mult(f, op))


class TestSplitting:
    def test_split(self):
        w = m(x(2, 0) ** 2) + compose(m(x(2, 1)), d(2, 0))
        f, field = split_first_order(w)
        assert f == x(2, 0) ** 2
        assert field == compose(m(x(2, 1)), d(2, 0))
        assert is_vector_field(field)

    def test_rejects_high_order(self):
        with pytest.raises(ValueError):
            split_first_order(compose(d(1, 0), d(1, 0)))


class TestTextForm:
    def test_canonical(self):
        op = DiffOp(
            3,
            {
                (1, 1, 0): x(3, 0) ** 2,
                (0, 0, 1): Polynomial.one(3),
                (0, 0, 0): Polynomial.one(3),
            },
        )
        assert str(op) == "x1^2*d1*d2 + d3 + 1"

    def test_zero(self):
        assert str(DiffOp.zero(1)) == "0"

    def test_negative_leading(self):
        assert str(-d(1, 0)) == "-d1"

import random
from fractions import Fraction

import pytest

from opcalc.automorphisms import (
    D1AutoSpec,
    DAutoSpec,
    SAutoSpec,
    d1_apply,
    d1_apply_op,
    d_apply,
    exp_omega,
    exp_omega_by_brackets,
    extract_d1_params,
    omega_of_field,
    pushforward,
    s_apply,
    verify_filtration_respect,
    verify_lie_automorphism,
)
from opcalc.operators import DiffOp, commutator, compose, conjugation
from opcalc.poly import AffineMap, OneForm, Polynomial, differential
from opcalc.sampling import (
    random_closed_form,
    random_d1_spec,
    random_d_spec,
    random_first_order,
    random_operator,
    random_s_spec,
    random_symbol,
)
from opcalc.specfile import format_auto_spec, parse_auto_spec
from opcalc.symbols import PhaseSymbol, phase_lift, poisson_bracket, total_symbol


def x(dim, i):
    return Polynomial.variable(dim, i)


def d(dim, i):
    return DiffOp.partial(dim, i)


def m(p):
    return DiffOp.from_poly(p)


class TestSpecs:
    def test_d1_validation(self):
        with pytest.raises(ValueError):
            D1AutoSpec(0, 1, OneForm.zero(1), AffineMap.identity(1))
        with pytest.raises(ValueError):
            D1AutoSpec(1, 0, OneForm([x(2, 1), Polynomial.zero(2)]), AffineMap.identity(2))

    def test_d_validation(self):
        with pytest.raises(ValueError):
            DAutoSpec(AffineMap.identity(1), 2, OneForm.zero(1))

    def test_s_validation(self):
        with pytest.raises(ValueError):
            SAutoSpec(0, AffineMap.identity(1), OneForm.zero(1))


class TestPushforward:
    def test_identity(self):
        rng = random.Random(1)
        op = random_operator(rng, 2, 3, 3)
        assert pushforward(AffineMap.identity(2), op) == op

    def test_translation_of_constant_field(self):
        phi = AffineMap([[1]], [1])
        assert pushforward(phi, d(1, 0)) == d(1, 0)

    def test_translation_of_coordinate(self):
        phi = AffineMap([[1]], [1])
        assert pushforward(phi, m(x(1, 0))) == m(x(1, 0) - 1)

    def test_action_oracle(self):
        # the defining identity: image(f) = (D(f o phi)) o phi^{-1}
        rng = random.Random(2)
        from opcalc.sampling import random_affine_map, random_polynomial

        for _ in range(20):
            dim = rng.randint(1, 3)
            phi = random_affine_map(rng, dim)
            op = random_operator(rng, dim, 3, 3)
            image = pushforward(phi, op)
            inv = phi.inverse()
            for _ in range(3):
                f = random_polynomial(rng, dim, 4)
                assert image.apply(f) == inv.pullback(op.apply(phi.pullback(f)))

    def test_functorial(self):
        rng = random.Random(3)
        from opcalc.sampling import random_affine_map

        for _ in range(10):
            dim = rng.randint(1, 2)
            phi = random_affine_map(rng, dim)
            psi = random_affine_map(rng, dim)
            op = random_operator(rng, dim, 3, 2)
            assert pushforward(phi.compose(psi), op) == pushforward(
                phi, pushforward(psi, op)
            )

    def test_symbol_compatibility(self):
        rng = random.Random(4)
        from opcalc.sampling import random_affine_map

        for _ in range(15):
            dim = rng.randint(1, 3)
            phi = random_affine_map(rng, dim)
            op = random_operator(rng, dim, 3, 3)
            assert total_symbol(pushforward(phi, op)) == phase_lift(phi, total_symbol(op))


class TestExpOmega:
    def test_shift_of_derivative(self):
        omega = OneForm([Polynomial.one(1)])  # d(x1)
        assert exp_omega(omega, d(1, 0)) == d(1, 0) + DiffOp.identity(1)

    def test_functions_fixed(self):
        omega = differential(x(2, 0) ** 2 * x(2, 1))
        g = m(x(2, 0) * x(2, 1) + 7)
        assert exp_omega(omega, g) == g

    def test_second_order_expansion(self):
        omega = OneForm([Polynomial.one(1)])
        dd = compose(d(1, 0), d(1, 0))
        assert exp_omega(omega, dd) == dd + 2 * d(1, 0) + DiffOp.identity(1)

    def test_rejects_non_closed(self):
        bad = OneForm([x(2, 1), Polynomial.zero(2)])
        with pytest.raises(ValueError):
            exp_omega(bad, d(2, 0))

    def test_closed_form_equals_bracket_sum(self):
        rng = random.Random(5)
        for _ in range(30):
            dim = rng.randint(1, 3)
            omega = random_closed_form(rng, dim, 2)
            op = random_operator(rng, dim, 4, 3)
            assert exp_omega(omega, op) == exp_omega_by_brackets(omega, op)

    def test_conjugation_orientation(self):
        # exp is conjugation by e^{-f} on the left: picks up [D, m_f]
        omega = differential(x(1, 0) ** 2)
        got = exp_omega(omega, d(1, 0))
        assert got == d(1, 0) + m(2 * x(1, 0))


class TestD1Apply:
    def test_identity_spec(self):
        spec = D1AutoSpec(1, 0, OneForm.zero(2), AffineMap.identity(2))
        f = x(2, 0) ** 2
        field = compose(m(x(2, 1)), d(2, 0))
        assert d1_apply(spec, f, field) == m(f) + field

    def test_conjugation_branch(self):
        # (kappa, lambda) = (-1, 1) with trivial omega and phi matches C
        spec = D1AutoSpec(-1, 1, OneForm.zero(2), AffineMap.identity(2))
        rng = random.Random(6)
        for _ in range(20):
            w = random_first_order(rng, 2, 4)
            assert d1_apply_op(spec, w) == conjugation(w)

    def test_omega_contribution(self):
        spec = D1AutoSpec(1, 0, differential(x(1, 0) ** 2), AffineMap.identity(1))
        got = d1_apply(spec, Polynomial.zero(1), d(1, 0))
        assert got == d(1, 0) + m(2 * x(1, 0))

    def test_exp_branch(self):
        # exp restricted to first order matches (kappa, lambda) = (1, 0)
        rng = random.Random(7)
        for _ in range(15):
            dim = rng.randint(1, 3)
            omega = random_closed_form(rng, dim, 3)
            spec = D1AutoSpec(1, 0, omega, AffineMap.identity(dim))
            w = random_first_order(rng, dim, 3)
            assert d1_apply_op(spec, w) == exp_omega(omega, w)

    def test_rejects_non_field(self):
        spec = D1AutoSpec(1, 0, OneForm.zero(1), AffineMap.identity(1))
        with pytest.raises(ValueError):
            d1_apply(spec, Polynomial.zero(1), compose(d(1, 0), d(1, 0)))

    def test_is_automorphism(self):
        rng = random.Random(8)
        for _ in range(5):
            dim = rng.randint(1, 3)
            spec = random_d1_spec(rng, dim)
            samples = [
                (random_first_order(rng, dim, 3), random_first_order(rng, dim, 3))
                for _ in range(40)
            ]
            report = verify_lie_automorphism(
                lambda w: d1_apply_op(spec, w), "operators", samples, rng
            )
            assert report.passed, report.counterexample


class TestOmegaOfField:
    def test_contraction(self):
        omega = OneForm([x(2, 1), x(2, 0)])
        field = compose(m(x(2, 0)), d(2, 0)) + d(2, 1)
        assert omega_of_field(omega, field) == x(2, 0) * x(2, 1) + x(2, 0)

    def test_rejects_operators(self):
        with pytest.raises(ValueError):
            omega_of_field(OneForm.zero(1), m(x(1, 0)))


class TestDApply:
    def test_identity_spec(self):
        spec = DAutoSpec(AffineMap.identity(2), 0, OneForm.zero(2))
        rng = random.Random(9)
        op = random_operator(rng, 2, 3, 3)
        assert d_apply(spec, op) == op

    def test_pure_conjugation(self):
        spec = DAutoSpec(AffineMap.identity(1), 1, OneForm.zero(1))
        rng = random.Random(10)
        for _ in range(10):
            op = random_operator(rng, 1, 3, 3)
            assert d_apply(spec, op) == conjugation(op)

    def test_pure_exp(self):
        omega = OneForm([Polynomial.one(1)])
        spec = DAutoSpec(AffineMap.identity(1), 0, omega)
        dd = compose(d(1, 0), d(1, 0))
        assert d_apply(spec, dd) == dd + 2 * d(1, 0) + DiffOp.identity(1)

    def test_restriction_to_functions(self):
        rng = random.Random(11)
        from opcalc.sampling import random_polynomial

        for _ in range(10):
            dim = rng.randint(1, 2)
            spec = random_d_spec(rng, dim)
            f = random_polynomial(rng, dim, 3)
            sign = -1 if spec.a else 1
            expected = m(spec.phi.inverse().pullback(f) * sign)
            assert d_apply(spec, m(f)) == expected

    def test_is_automorphism(self):
        rng = random.Random(12)
        for _ in range(4):
            dim = rng.randint(1, 2)
            spec = random_d_spec(rng, dim, max_degree=1)
            samples = [
                (random_operator(rng, dim, 3, 3, 5), random_operator(rng, dim, 3, 3, 5))
                for _ in range(30)
            ]
            report = verify_lie_automorphism(
                lambda op: d_apply(spec, op), "operators", samples, rng
            )
            assert report.passed, report.counterexample

    def test_group_closure_on_samples(self):
        rng = random.Random(13)
        dim = 2
        first = random_d_spec(rng, dim, max_degree=1)
        second = random_d_spec(rng, dim, max_degree=1)
        samples = [
            (random_operator(rng, dim, 3, 2, 5), random_operator(rng, dim, 3, 2, 5))
            for _ in range(25)
        ]
        report = verify_lie_automorphism(
            lambda op: d_apply(second, d_apply(first, op)), "operators", samples, rng
        )
        assert report.passed, report.counterexample


class TestSApply:
    def test_identity_spec(self):
        spec = SAutoSpec(1, AffineMap.identity(2), OneForm.zero(2))
        rng = random.Random(14)
        s = random_symbol(rng, 2, 4, 4)
        assert s_apply(spec, s) == s

    def test_grade_scaling_only(self):
        spec = SAutoSpec(Fraction(3), AffineMap.identity(1), OneForm.zero(1))
        xi = PhaseSymbol.fiber(1, 0)
        assert s_apply(spec, xi * xi) == Fraction(1, 3) * xi * xi

    def test_translation_only(self):
        spec = SAutoSpec(1, AffineMap.identity(1), differential(x(1, 0) ** 2))
        xi = PhaseSymbol.fiber(1, 0)
        assert s_apply(spec, xi) == xi + PhaseSymbol.from_poly(2 * x(1, 0))

    def test_preserves_bracket(self):
        rng = random.Random(15)
        for _ in range(5):
            dim = rng.randint(1, 3)
            spec = random_s_spec(rng, dim)
            samples = [
                (random_symbol(rng, dim, 3, 3), random_symbol(rng, dim, 3, 3))
                for _ in range(30)
            ]
            report = verify_lie_automorphism(
                lambda s: s_apply(spec, s), "symbols", samples, rng
            )
            assert report.passed, report.counterexample


class TestVerifiers:
    def test_scaling_fails_bracket(self):
        rng = random.Random(16)
        samples = [
            (random_operator(rng, 1, 2, 2), random_operator(rng, 1, 2, 2))
            for _ in range(10)
        ]
        report = verify_lie_automorphism(lambda op: 2 * op, "operators", samples, rng)
        assert not report.passed
        assert "bracket" in report.counterexample

    def test_projection_fails_injectivity(self):
        # dropping the zero-order part is linear and kills injectivity
        rng = random.Random(17)

        def project(op):
            return DiffOp(op.dim, {a: p for a, p in op.terms() if sum(a) > 0})

        samples = [
            (
                m(Polynomial.one(1)) + d(1, 0),
                m(x(1, 0)) + d(1, 0),
            ),
            (m(x(1, 0) ** 2), m(x(1, 0) ** 2) + d(1, 0)),
        ]
        report = verify_lie_automorphism(project, "operators", samples, rng)
        assert not report.passed

    def test_unknown_domain(self):
        with pytest.raises(ValueError):
            verify_lie_automorphism(lambda v: v, "groups", [(1, 2)])

    def test_filtration_identity(self):
        rng = random.Random(18)
        report = verify_filtration_respect(lambda op: op, 1, 4, dim=2, rng=rng)
        assert report.passed

    def test_filtration_conjugation(self):
        rng = random.Random(19)
        report = verify_filtration_respect(conjugation, -1, 4, dim=2, rng=rng)
        assert report.passed

    def test_filtration_exp(self):
        rng = random.Random(20)
        omega = OneForm([Polynomial.one(2), Polynomial.zero(2)])
        report = verify_filtration_respect(
            lambda op: exp_omega(omega, op), 1, 3, dim=2, rng=rng
        )
        assert report.passed

    def test_filtration_wrong_kappa_fails(self):
        rng = random.Random(21)
        report = verify_filtration_respect(conjugation, 1, 3, dim=1, rng=rng)
        assert not report.passed

    def test_filtration_rejects_zero_kappa(self):
        rng = random.Random(22)
        with pytest.raises(ValueError):
            verify_filtration_respect(lambda op: op, 0, 2, dim=1, rng=rng)


class TestExtraction:
    def test_identity_round_trip(self):
        spec = D1AutoSpec(1, 0, OneForm.zero(2), AffineMap.identity(2))
        got = extract_d1_params(lambda w: d1_apply_op(spec, w), 2)
        assert got == spec

    def test_conjugation_branch_round_trip(self):
        spec = D1AutoSpec(-1, 1, OneForm.zero(2), AffineMap.identity(2))
        got = extract_d1_params(lambda w: d1_apply_op(spec, w), 2)
        assert got == spec

    def test_extracts_conjugation_itself(self):
        got = extract_d1_params(conjugation, 2)
        assert got == D1AutoSpec(-1, 1, OneForm.zero(2), AffineMap.identity(2))

    def test_random_round_trips(self):
        rng = random.Random(23)
        for _ in range(10):
            dim = rng.randint(1, 3)
            spec = random_d1_spec(rng, dim)
            got = extract_d1_params(lambda w: d1_apply_op(spec, w), dim)
            assert got == spec

    def test_rejects_scaling(self):
        with pytest.raises(ValueError):
            extract_d1_params(lambda w: 2 * w + DiffOp.identity(w.dim), 1)

    def test_rejects_non_family_map(self):
        # linear, bracket-ish on small samples, but not of the family shape
        def weird(op):
            f, field = (op.zero_order_part(), None)
            return m(f * f) if f else op

        with pytest.raises(ValueError):
            extract_d1_params(weird, 1)


class TestSpecFiles:
    def test_round_trip_all_families(self):
        rng = random.Random(24)
        for make in (random_d1_spec, random_d_spec, random_s_spec):
            for _ in range(6):
                dim = rng.randint(1, 3)
                spec = make(rng, dim)
                assert parse_auto_spec(format_auto_spec(spec)) == spec

    def test_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            parse_auto_spec("family = q\ndim = 1\n")

    def test_rejects_missing_keys(self):
        with pytest.raises(ValueError):
            parse_auto_spec("family = d1\ndim = 1\nkappa = 1\n")

    def test_rejects_extra_keys(self):
        spec = D1AutoSpec(1, 0, OneForm.zero(1), AffineMap.identity(1))
        text = format_auto_spec(spec) + "mystery = 3\n"
        with pytest.raises(ValueError):
            parse_auto_spec(text)

    def test_comments_and_blank_lines(self):
        spec = D1AutoSpec(Fraction(-3, 2), 2, OneForm.zero(1), AffineMap([[2]], [Fraction(1, 2)]))
        text = "# header\n\n" + format_auto_spec(spec)
        assert parse_auto_spec(text) == spec

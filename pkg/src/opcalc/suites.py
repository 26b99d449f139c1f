"""Seeded verification suites for the algebraic identities.

Each suite draws its own deterministic generator from the master seed,
runs a block of exact checks at the configured bounds, and returns a
:class:`SuiteReport` whose failure strings carry the offending inputs in
canonical text form.  ``all`` runs every suite.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .automorphisms import (
    D1AutoSpec,
    d1_apply_op,
    d_apply,
    extract_d1_params,
    pushforward,
    s_apply,
    verify_filtration_respect,
    verify_lie_automorphism,
)
from .operators import (
    DiffOp,
    ad_nilpotency_witness,
    commutator,
    compose,
    conjugation,
    divergence,
    formal_adjoint,
    grothendieck_levels,
    left_mult,
    right_mult,
)
from .poly import AffineMap, OneForm, Polynomial, differential
from .sampling import (
    Bounds,
    dense_random_polynomial,
    random_affine_map,
    random_closed_form,
    random_d1_spec,
    random_d_spec,
    random_first_order,
    random_operator,
    random_operator_of_order,
    random_polynomial,
    random_s_spec,
    random_scalar,
    random_symbol,
    random_vector_field,
)
from .symbols import (
    PhaseSymbol,
    degree_derivation,
    fiber_translation,
    phase_lift,
    poisson_bracket,
    principal_symbol,
    quantize,
    total_symbol,
    u_kappa,
)

SUITE_NAMES = (
    "filtration",
    "symbol-compat",
    "grothendieck",
    "nilpotency",
    "centralizer",
    "adjoint",
    "cocycle",
    "aut-d1",
    "aut-d",
    "aut-s",
    "roundtrip",
)


@dataclass
class SuiteReport:
    name: str
    cases: int
    failures: list[str]
    seconds: float
    seed: int

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "cases": self.cases,
            "failures": list(self.failures),
            "seconds": round(self.seconds, 3),
            "seed": self.seed,
            "passed": self.passed,
        }

    def summary(self) -> str:
        status = "pass" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.name}: {status}, {self.cases} cases, {self.seconds:.2f}s"


class _Run:
    def __init__(self):
        self.cases = 0
        self.failures: list[str] = []

    def check(self, ok: bool, describe: str) -> None:
        self.cases += 1
        if not ok:
            self.failures.append(describe)


def _order_bound_holds(value: int | None, bound: int | None) -> bool:
    # None plays -infinity on both sides.
    if value is None:
        return True
    return bound is not None and value <= bound


def _suite_filtration(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(500)):
        dim = rng.randint(1, bounds.max_dim)
        d = random_operator(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        e = random_operator(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        od, oe = d.order(), e.order()
        bound = od + oe - 1 if od is not None and oe is not None else None
        run.check(
            _order_bound_holds(commutator(d, e).order(), bound),
            f"bracket order too high: D = {d}; E = {e}",
        )
    for _ in range(bounds.count(100)):
        dim = rng.randint(1, bounds.max_dim)
        a, b, c = (
            random_operator(rng, dim, 3, 3, bounds.coeff_bound) for _ in range(3)
        )
        jacobi = (
            commutator(a, commutator(b, c))
            + commutator(b, commutator(c, a))
            + commutator(c, commutator(a, b))
        )
        run.check(not jacobi, f"Jacobi fails: {a}; {b}; {c}")
        c1, c2 = random_scalar(rng, 5), random_scalar(rng, 5)
        linear = commutator(c1 * a + c2 * b, c) == c1 * commutator(a, c) + c2 * commutator(b, c)
        run.check(linear, f"bracket not bilinear: {a}; {b}; {c}")


def _suite_symbol_compat(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(500)):
        dim = rng.randint(1, bounds.max_dim)
        d = random_operator(
            rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound, nonzero=True
        )
        e = random_operator(
            rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound, nonzero=True
        )
        d1, d2 = d.order(), e.order()
        sd, se = principal_symbol(d), principal_symbol(e)
        run.check(
            poisson_bracket(sd, se) == principal_symbol(commutator(d, e), d1 + d2 - 1),
            f"bracket/symbol mismatch: D = {d}; E = {e}",
        )
        run.check(
            sd * se == principal_symbol(compose(d, e), d1 + d2),
            f"product/symbol mismatch: D = {d}; E = {e}",
        )
    for _ in range(bounds.count(100)):
        dim = rng.randint(1, bounds.max_dim)
        p, q, r = (random_symbol(rng, dim, 3, 3, bounds.coeff_bound) for _ in range(3))
        run.check(
            poisson_bracket(p, q) == -poisson_bracket(q, p),
            f"antisymmetry fails: {p}; {q}",
        )
        jacobi = (
            poisson_bracket(p, poisson_bracket(q, r))
            + poisson_bracket(q, poisson_bracket(r, p))
            + poisson_bracket(r, poisson_bracket(p, q))
        )
        run.check(not jacobi, f"Poisson Jacobi fails: {p}; {q}; {r}")
        leibniz = poisson_bracket(p, q * r) == poisson_bracket(p, q) * r + q * poisson_bracket(p, r)
        run.check(leibniz, f"Leibniz fails: {p}; {q}; {r}")
        for i in p.grades():
            for j in q.grades():
                br = poisson_bracket(p.grade(i), q.grade(j))
                run.check(
                    all(g == i + j - 1 for g in br.grades()),
                    f"bracket grading off: {p}; {q}",
                )


def _suite_grothendieck(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(200)):
        dim = rng.randint(1, bounds.max_dim)
        order = rng.randint(0, 3)
        d = random_operator_of_order(rng, dim, order, 3, bounds.coeff_bound)
        probes = [Polynomial.variable(dim, i) for i in range(dim)]
        probes += [dense_random_polynomial(rng, dim, 3, bounds.coeff_bound) for _ in range(5)]
        memberships = grothendieck_levels(d, order + 1, probes)
        for level, got in zip(range(-1, order + 2), memberships):
            run.check(
                got == (level >= order),
                f"membership at level {level} wrong for {d}",
            )


def _suite_nilpotency(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    ddx = DiffOp.partial(1, 0)
    for k in range(7):
        f = Polynomial.monomial(1, (k,))
        run.check(
            ad_nilpotency_witness(ddx, f, 8) == k + 1,
            f"witness for d1 against x1^{k} is not {k + 1}",
        )
    euler = compose(DiffOp.from_poly(Polynomial.variable(1, 0)), ddx)
    run.check(
        ad_nilpotency_witness(euler, Polynomial.variable(1, 0), 20) is None,
        "x1*d1 unexpectedly nilpotent against x1",
    )
    for _ in range(bounds.count(50)):
        dim = rng.randint(1, bounds.max_dim)
        g = random_polynomial(rng, dim, bounds.max_degree, bounds.coeff_bound)
        f = random_polynomial(rng, dim, bounds.max_degree, bounds.coeff_bound)
        run.check(
            ad_nilpotency_witness(DiffOp.from_poly(g), f, 4) == 1,
            f"multiplication operators should commute: g = {g}; f = {f}",
        )


def _suite_centralizer(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    ddx = DiffOp.partial(1, 0)
    mx = DiffOp.from_poly(Polynomial.variable(1, 0))
    run.check(
        commutator(ddx, mx) == DiffOp.identity(1),
        "bracket of d1 with x1 is not 1",
    )
    for _ in range(bounds.count(200)):
        dim = rng.randint(1, bounds.max_dim)
        f = random_polynomial(rng, dim, bounds.max_degree, bounds.coeff_bound)
        g = random_polynomial(rng, dim, bounds.max_degree, bounds.coeff_bound)
        d = random_operator(rng, dim, 3, 3, bounds.coeff_bound)
        mf = DiffOp.from_poly(f)
        mg = DiffOp.from_poly(g)
        run.check(
            left_mult(f, d) - right_mult(f, d) == commutator(mf, d),
            f"left minus right is not ad: f = {f}; D = {d}",
        )
        run.check(
            left_mult(f, commutator(mg, d)) == commutator(mg, left_mult(f, d)),
            f"left multiplication outside centralizer: f = {f}; g = {g}; D = {d}",
        )
        run.check(
            right_mult(f, commutator(mg, d)) == commutator(mg, right_mult(f, d)),
            f"right multiplication outside centralizer: f = {f}; g = {g}; D = {d}",
        )


def _suite_adjoint(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(200)):
        dim = rng.randint(1, bounds.max_dim)
        d = random_operator(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        e = random_operator(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        run.check(
            formal_adjoint(compose(d, e)) == compose(formal_adjoint(e), formal_adjoint(d)),
            f"adjoint of a product: D = {d}; E = {e}",
        )
        run.check(formal_adjoint(formal_adjoint(d)) == d, f"adjoint not involutive: {d}")
        run.check(
            conjugation(commutator(d, e)) == commutator(conjugation(d), conjugation(e)),
            f"conjugation not a bracket map: D = {d}; E = {e}",
        )
    for _ in range(bounds.count(50)):
        dim = rng.randint(1, bounds.max_dim)
        w = random_first_order(rng, dim, bounds.max_degree, bounds.coeff_bound)
        branch = D1AutoSpec(-1, 1, OneForm.zero(dim), AffineMap.identity(dim))
        run.check(
            conjugation(w) == d1_apply_op(branch, w),
            f"conjugation branch mismatch on {w}",
        )


def _suite_cocycle(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(200)):
        dim = rng.randint(1, bounds.max_dim)
        x = random_vector_field(rng, dim, bounds.max_degree, bounds.coeff_bound)
        y = random_vector_field(rng, dim, bounds.max_degree, bounds.coeff_bound)
        lhs = divergence(commutator(x, y))
        rhs = x.apply(divergence(y)) - y.apply(divergence(x))
        run.check(lhs == rhs, f"divergence cocycle fails: X = {x}; Y = {y}")


def _cached(transform):
    cache: dict = {}

    def apply(value):
        got = cache.get(value)
        if got is None:
            got = transform(value)
            cache[value] = got
        return got

    return apply


def _suite_aut_d1(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(20)):
        dim = rng.randint(1, bounds.max_dim)
        spec = random_d1_spec(rng, dim)
        transform = _cached(lambda w, s=spec: d1_apply_op(s, w))
        samples = [
            (
                random_first_order(rng, dim, bounds.max_degree, bounds.coeff_bound),
                random_first_order(rng, dim, bounds.max_degree, bounds.coeff_bound),
            )
            for _ in range(bounds.count(200))
        ]
        report = verify_lie_automorphism(transform, "operators", samples, rng)
        run.check(report.passed, f"first-order family: {report.counterexample}")
        recovered = extract_d1_params(transform, dim)
        run.check(recovered == spec, f"parameter extraction drifted for kappa={spec.kappa}")


def _suite_aut_d(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(12)):
        dim = rng.randint(1, bounds.max_dim)
        spec = random_d_spec(rng, dim, max_degree=1)
        transform = _cached(lambda op, s=spec: d_apply(s, op))
        samples = [
            (
                random_operator(rng, dim, bounds.max_order, bounds.max_degree, 5, max_terms=2),
                random_operator(rng, dim, bounds.max_order, bounds.max_degree, 5, max_terms=2),
            )
            for _ in range(bounds.count(200))
        ]
        report = verify_lie_automorphism(transform, "operators", samples, rng)
        run.check(report.passed, f"full family: {report.counterexample}")
        # The scalar graded structure belongs to the base-point-fixing
        # reduction; the pushforward factor is stripped before checking.
        inverse_phi = spec.phi.inverse()
        reduced = _cached(lambda op, s=spec, inv=inverse_phi: pushforward(inv, d_apply(s, op)))
        kappa = -1 if spec.a else 1
        structure = verify_filtration_respect(
            reduced, kappa, 4, dim=dim, rng=rng, cases_per_order=10, coeff_degree=3
        )
        run.check(structure.passed, f"graded structure: {structure.counterexample}")
        for level in range(5):
            op = random_operator_of_order(rng, dim, level, 3, 5)
            run.check(
                _order_bound_holds(transform(op).order(), level),
                f"image order rose above {level} for {op}",
            )
        f = random_polynomial(rng, dim, bounds.max_degree, bounds.coeff_bound)
        sign = -1 if spec.a else 1
        expected = DiffOp.from_poly(inverse_phi.pullback(f) * sign)
        run.check(
            transform(DiffOp.from_poly(f)) == expected,
            f"restriction to functions drifted on {f}",
        )
    for _ in range(bounds.count(100)):
        dim = rng.randint(1, bounds.max_dim)
        phi = random_affine_map(rng, dim)
        d = random_operator(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        run.check(
            total_symbol(pushforward(phi, d)) == phase_lift(phi, total_symbol(d)),
            f"pushforward/phase-lift mismatch on {d}",
        )
    for _ in range(bounds.count(4)):
        dim = rng.randint(1, bounds.max_dim)
        first = random_d_spec(rng, dim, max_degree=1)
        second = random_d_spec(rng, dim, max_degree=1)
        composite = _cached(lambda op, s1=first, s2=second: d_apply(s2, d_apply(s1, op)))
        samples = [
            (
                random_operator(rng, dim, 3, 3, 5, max_terms=2),
                random_operator(rng, dim, 3, 3, 5, max_terms=2),
            )
            for _ in range(40)
        ]
        report = verify_lie_automorphism(composite, "operators", samples, rng)
        run.check(report.passed, f"composite not an automorphism: {report.counterexample}")


def _suite_aut_s(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(20)):
        dim = rng.randint(1, bounds.max_dim)
        spec = random_s_spec(rng, dim)
        transform = _cached(lambda p, s=spec: s_apply(s, p))
        samples = [
            (
                random_symbol(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound),
                random_symbol(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound),
            )
            for _ in range(bounds.count(200))
        ]
        report = verify_lie_automorphism(transform, "symbols", samples, rng)
        run.check(report.passed, f"symbol family: {report.counterexample}")
    # Negative control: a non-closed form must break the bracket somewhere.
    bad = OneForm([Polynomial.variable(2, 1), Polynomial.zero(2)])
    xi1, xi2 = PhaseSymbol.fiber(2, 0), PhaseSymbol.fiber(2, 1)
    broken = poisson_bracket(fiber_translation(bad, xi1), fiber_translation(bad, xi2))
    original = fiber_translation(bad, poisson_bracket(xi1, xi2))
    run.check(broken != original, "non-closed translation failed to break the bracket")
    for _ in range(bounds.count(200)):
        dim = rng.randint(1, bounds.max_dim)
        p = random_symbol(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        q = random_symbol(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        lhs = degree_derivation(poisson_bracket(p, q))
        rhs = poisson_bracket(degree_derivation(p), q) + poisson_bracket(p, degree_derivation(q))
        run.check(lhs == rhs, f"degree map is not a bracket derivation: {p}; {q}")
    xi = PhaseSymbol.fiber(1, 0)
    run.check(
        u_kappa(2, xi * xi) != u_kappa(2, xi) * u_kappa(2, xi),
        "grade scaling unexpectedly multiplicative at kappa=2",
    )
    for _ in range(bounds.count(50)):
        dim = rng.randint(1, bounds.max_dim)
        kappa = random_scalar(rng, 5, nonzero=True)
        p = random_symbol(rng, dim, 3, 3, bounds.coeff_bound)
        q = random_symbol(rng, dim, 3, 3, bounds.coeff_bound)
        run.check(
            u_kappa(kappa, poisson_bracket(p, q))
            == poisson_bracket(u_kappa(kappa, p), u_kappa(kappa, q)),
            f"grade scaling broke the bracket: kappa = {kappa}; {p}; {q}",
        )


def _suite_roundtrip(rng: random.Random, bounds: Bounds, run: _Run) -> None:
    for _ in range(bounds.count(200)):
        dim = rng.randint(1, bounds.max_dim)
        d = random_operator(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        run.check(quantize(total_symbol(d)) == d, f"operator round trip drifted: {d}")
        p = random_symbol(rng, dim, bounds.max_order, bounds.max_degree, bounds.coeff_bound)
        run.check(total_symbol(quantize(p)) == p, f"symbol round trip drifted: {p}")
    for _ in range(bounds.count(100)):
        dim = rng.randint(1, bounds.max_dim)
        f = random_polynomial(rng, dim, bounds.max_degree, bounds.coeff_bound)
        omega = differential(f)
        potential = omega.potential()
        run.check(differential(potential) == omega, f"potential gradient drifted: f = {f}")
        run.check(
            potential == f - f.constant_term(),
            f"potential differs from its source beyond a constant: f = {f}",
        )


_SUITES = {
    "filtration": _suite_filtration,
    "symbol-compat": _suite_symbol_compat,
    "grothendieck": _suite_grothendieck,
    "nilpotency": _suite_nilpotency,
    "centralizer": _suite_centralizer,
    "adjoint": _suite_adjoint,
    "cocycle": _suite_cocycle,
    "aut-d1": _suite_aut_d1,
    "aut-d": _suite_aut_d,
    "aut-s": _suite_aut_s,
    "roundtrip": _suite_roundtrip,
}


def run_verification_suite(name: str, seed: int = 0, bounds: Bounds | None = None) -> SuiteReport:
    """Run one named suite with a deterministic per-suite generator."""
    try:
        suite = _SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}") from None
    bounds = bounds or Bounds()
    rng = random.Random(f"{seed}:{name}")
    run = _Run()
    start = time.perf_counter()
    suite(rng, bounds, run)
    return SuiteReport(name, run.cases, run.failures, time.perf_counter() - start, seed)


def run_suites(names: list[str], seed: int = 0, bounds: Bounds | None = None) -> list[SuiteReport]:
    """Run the given suites (or all of them for ``["all"]``)."""
    if names == ["all"]:
        names = list(SUITE_NAMES)
    return [run_verification_suite(name, seed, bounds) for name in names]

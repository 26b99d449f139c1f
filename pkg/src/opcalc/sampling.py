"""Seeded random generators for polynomials, operators, symbols and specs.

Everything is driven by an explicit ``random.Random`` so suites and
tests are reproducible from a single seed.  Defaults follow the desk
bounds: dimension <= 3, operator order <= 4, coefficient degree <= 4,
coefficients in [-9, 9], sparse term counts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .automorphisms import D1AutoSpec, DAutoSpec, SAutoSpec
from .operators import DiffOp
from .poly import AffineMap, MultiIndex, OneForm, Polynomial, Scalar, differential, make_ratio
from .symbols import PhaseSymbol


@dataclass(frozen=True)
class Bounds:
    """Size knobs shared by the verification suites."""

    max_dim: int = 3
    max_order: int = 4
    max_degree: int = 4
    coeff_bound: int = 9
    cases: int | None = None

    def count(self, default: int) -> int:
        return self.cases if self.cases is not None else default


def random_scalar(rng: random.Random, bound: int = 9, nonzero: bool = False) -> Scalar:
    num = rng.randint(-bound, bound)
    while nonzero and num == 0:
        num = rng.randint(-bound, bound)
    if rng.random() < 0.2:
        return make_ratio(num, rng.randint(2, 4))
    return num


def random_multi_index(rng: random.Random, dim: int, max_total: int) -> MultiIndex:
    total = rng.randint(0, max_total)
    exps = [0] * dim
    for _ in range(total):
        exps[rng.randrange(dim)] += 1
    return tuple(exps)


def random_polynomial(
    rng: random.Random,
    dim: int,
    max_degree: int,
    bound: int = 9,
    max_terms: int = 3,
    nonzero: bool = False,
) -> Polynomial:
    while True:
        terms: dict[MultiIndex, Scalar] = {}
        for _ in range(rng.randint(1, max_terms)):
            terms[random_multi_index(rng, dim, max_degree)] = random_scalar(rng, bound)
        p = Polynomial(dim, terms)
        if p or not nonzero:
            return p


def dense_random_polynomial(
    rng: random.Random, dim: int, max_degree: int, bound: int = 9
) -> Polynomial:
    """Every monomial up to the degree bound, with random coefficients."""

    def monos(prefix: tuple[int, ...], remaining: int, left: int):
        if left == 0:
            yield prefix
            return
        for e in range(remaining + 1):
            yield from monos(prefix + (e,), remaining - e, left - 1)

    terms = {m: random_scalar(rng, bound) for m in monos((), max_degree, dim)}
    return Polynomial(dim, terms)


def random_operator(
    rng: random.Random,
    dim: int,
    max_order: int,
    max_degree: int,
    bound: int = 9,
    max_terms: int = 3,
    nonzero: bool = False,
) -> DiffOp:
    while True:
        terms: dict[MultiIndex, Polynomial] = {}
        for _ in range(rng.randint(1, max_terms)):
            alpha = random_multi_index(rng, dim, max_order)
            terms[alpha] = random_polynomial(rng, dim, max_degree, bound, max_terms=2)
        op = DiffOp(dim, terms)
        if op or not nonzero:
            return op


def random_operator_of_order(
    rng: random.Random, dim: int, order: int, max_degree: int, bound: int = 9
) -> DiffOp:
    """An operator whose top derivative length is exactly ``order``."""
    top = random_multi_index(rng, dim, order)
    while sum(top) != order:
        top = random_multi_index(rng, dim, order)
    terms: dict[MultiIndex, Polynomial] = {
        top: random_polynomial(rng, dim, max_degree, bound, max_terms=2, nonzero=True)
    }
    for _ in range(rng.randint(0, 2)):
        alpha = random_multi_index(rng, dim, order)
        if alpha not in terms:
            terms[alpha] = random_polynomial(rng, dim, max_degree, bound, max_terms=2)
    return DiffOp(dim, terms)


def random_vector_field(
    rng: random.Random, dim: int, max_degree: int, bound: int = 9
) -> DiffOp:
    terms: dict[MultiIndex, Polynomial] = {}
    for var in range(dim):
        if dim == 1 or rng.random() < 0.8:
            alpha = tuple(1 if i == var else 0 for i in range(dim))
            terms[alpha] = random_polynomial(rng, dim, max_degree, bound, max_terms=2)
    return DiffOp(dim, terms)


def random_first_order(
    rng: random.Random, dim: int, max_degree: int, bound: int = 9
) -> DiffOp:
    op = random_vector_field(rng, dim, max_degree, bound)
    return op + DiffOp.from_poly(random_polynomial(rng, dim, max_degree, bound, max_terms=2))


def random_symbol(
    rng: random.Random,
    dim: int,
    max_grade: int,
    max_degree: int,
    bound: int = 9,
    max_terms: int = 3,
    nonzero: bool = False,
) -> PhaseSymbol:
    while True:
        terms: dict[MultiIndex, Polynomial] = {}
        for _ in range(rng.randint(1, max_terms)):
            beta = random_multi_index(rng, dim, max_grade)
            terms[beta] = random_polynomial(rng, dim, max_degree, bound, max_terms=2)
        s = PhaseSymbol(dim, terms)
        if s or not nonzero:
            return s


def random_closed_form(
    rng: random.Random, dim: int, max_degree: int, bound: int = 9
) -> OneForm:
    """A closed form, generated as the differential of a random polynomial."""
    return differential(random_polynomial(rng, dim, max_degree + 1, bound))


def random_affine_map(rng: random.Random, dim: int, bound: int = 3) -> AffineMap:
    while True:
        matrix = [[rng.randint(-bound, bound) for _ in range(dim)] for _ in range(dim)]
        try:
            return AffineMap(matrix, [random_scalar(rng, bound) for _ in range(dim)])
        except ValueError:
            continue


def random_sparse_affine_map(rng: random.Random, dim: int) -> AffineMap:
    """An invertible affine map with little off-diagonal mixing.

    Used where the operand sizes, not the map, carry the cost of a
    check: pullbacks through dense matrices inflate every coefficient
    into a dense polynomial, which multiplies runtime without adding
    verification power.
    """
    while True:
        matrix = [
            [
                rng.choice((-2, -1, 1, 2))
                if i == j
                else (rng.choice((-1, 1)) if rng.random() < 0.35 else 0)
                for j in range(dim)
            ]
            for i in range(dim)
        ]
        try:
            return AffineMap(matrix, [rng.randint(-2, 2) for _ in range(dim)])
        except ValueError:
            continue


def random_d1_spec(rng: random.Random, dim: int, max_degree: int = 2) -> D1AutoSpec:
    return D1AutoSpec(
        kappa=random_scalar(rng, 5, nonzero=True),
        lam=random_scalar(rng, 5),
        omega=random_closed_form(rng, dim, max_degree),
        phi=random_sparse_affine_map(rng, dim),
    )


def random_d_spec(rng: random.Random, dim: int, max_degree: int = 3) -> DAutoSpec:
    return DAutoSpec(
        phi=random_sparse_affine_map(rng, dim),
        a=rng.randint(0, 1),
        omega=random_closed_form(rng, dim, max_degree),
    )


def random_s_spec(rng: random.Random, dim: int, max_degree: int = 2) -> SAutoSpec:
    return SAutoSpec(
        kappa=random_scalar(rng, 5, nonzero=True),
        phi=random_sparse_affine_map(rng, dim),
        omega=random_closed_form(rng, dim, max_degree),
    )

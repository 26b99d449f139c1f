"""Constructors and verifiers for the classified automorphism families.

Three parameter records name the families: ``D1AutoSpec`` for the
first-order operator algebra, ``DAutoSpec`` for the full operator
algebra, ``SAutoSpec`` for the symbol algebra.  Constructors turn a
record into the corresponding linear map; the verifiers treat any map as
a black box and check the Lie-automorphism and filtration-structure
properties exactly on sampled elements.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence
from weakref import WeakKeyDictionary

from .operators import (
    DiffOp,
    commutator,
    compose,
    conjugation,
    divergence,
    is_vector_field,
    split_first_order,
)
from .poly import (
    AffineMap,
    MultiIndex,
    OneForm,
    Polynomial,
    Scalar,
    index_box,
    make_ratio,
    multi_binom,
    normalize_scalar,
    scalar_pow,
    scalar_recip,
)
from .symbols import PhaseSymbol, phase_lift, poisson_bracket, u_kappa, vertical_translation


@dataclass(frozen=True)
class D1AutoSpec:
    """Parameters (kappa, lambda, omega, phi) of a first-order automorphism."""

    kappa: Scalar
    lam: Scalar
    omega: OneForm
    phi: AffineMap

    def __post_init__(self):
        object.__setattr__(self, "kappa", normalize_scalar(self.kappa))
        object.__setattr__(self, "lam", normalize_scalar(self.lam))
        if not self.kappa:
            raise ValueError("kappa must be nonzero")
        if self.omega.dim != self.phi.dim:
            raise ValueError("omega and phi dimensions differ")
        if not self.omega.is_closed():
            raise ValueError("omega must be closed")

    @property
    def dim(self) -> int:
        return self.phi.dim


@dataclass(frozen=True)
class DAutoSpec:
    """Parameters (phi, a, omega) of a full operator-algebra automorphism."""

    phi: AffineMap
    a: int
    omega: OneForm

    def __post_init__(self):
        if self.a not in (0, 1):
            raise ValueError("a must be 0 or 1")
        if self.omega.dim != self.phi.dim:
            raise ValueError("omega and phi dimensions differ")
        if not self.omega.is_closed():
            raise ValueError("omega must be closed")

    @property
    def dim(self) -> int:
        return self.phi.dim


@dataclass(frozen=True)
class SAutoSpec:
    """Parameters (kappa, phi, omega) of a symbol-algebra automorphism."""

    kappa: Scalar
    phi: AffineMap
    omega: OneForm

    def __post_init__(self):
        object.__setattr__(self, "kappa", normalize_scalar(self.kappa))
        if not self.kappa:
            raise ValueError("kappa must be nonzero")
        if self.omega.dim != self.phi.dim:
            raise ValueError("omega and phi dimensions differ")
        if not self.omega.is_closed():
            raise ValueError("omega must be closed")

    @property
    def dim(self) -> int:
        return self.phi.dim


def omega_of_field(omega: OneForm, field: DiffOp) -> Polynomial:
    """Contract a 1-form with a vector field: ``sum_i X^i omega_i``."""
    if omega.dim != field.dim:
        raise ValueError(f"dimension mismatch: {omega.dim} vs {field.dim}")
    if not is_vector_field(field):
        raise ValueError("expected a vector field")
    total = Polynomial.zero(field.dim)
    for alpha, a in field.terms():
        var = next(i for i, e in enumerate(alpha) if e)
        total = total + a * omega.components[var]
    return total


# Images of pure derivative monomials are constant-coefficient operators;
# they are memoized per map as scalar-coefficient index maps.
_pushforward_cache: "WeakKeyDictionary[AffineMap, dict]" = WeakKeyDictionary()


def _derivative_image(phi: AffineMap, alpha: MultiIndex) -> dict[MultiIndex, Scalar]:
    """Image of ``d^alpha``: the expansion of ``prod_j (sum_k A_kj d_k)^alpha_j``."""
    memo = _pushforward_cache.get(phi)
    if memo is None:
        memo = {}
        _pushforward_cache[phi] = memo
    got = memo.get(alpha)
    if got is not None:
        return got
    n = phi.dim
    image: dict[MultiIndex, Scalar] = {(0,) * n: 1}
    for j, e in enumerate(alpha):
        for _ in range(e):
            nxt: dict[MultiIndex, Scalar] = {}
            for k in range(n):
                a = phi.matrix[k][j]
                if not a:
                    continue
                for delta, c in image.items():
                    raised = delta[:k] + (delta[k] + 1,) + delta[k + 1 :]
                    s = nxt.get(raised, 0) + c * a
                    if s:
                        nxt[raised] = normalize_scalar(s)
                    else:
                        nxt.pop(raised, None)
            image = nxt
    memo[alpha] = image
    return image


def pushforward(phi: AffineMap, op: DiffOp) -> DiffOp:
    """Conjugate an operator by the pullback of ``phi``.

    The image of ``m_g`` is ``m_(g o phi^-1)`` and the image of ``d_j``
    is the constant-coefficient field ``sum_k A_kj d_k``; the extension
    to all normal-ordered terms is multiplicative.  Constant-coefficient
    factors compose commutatively, so no Leibniz expansion is needed.
    """
    if phi.dim != op.dim:
        raise ValueError(f"dimension mismatch: {phi.dim} vs {op.dim}")
    inverse = phi.inverse()
    out: dict[MultiIndex, Polynomial] = {}
    for alpha, a in op.terms():
        pulled = inverse.pullback(a)
        for delta, c in _derivative_image(phi, alpha).items():
            scaled = pulled * c
            s = out.get(delta)
            if s is None:
                out[delta] = scaled
            else:
                s = s + scaled
                if s:
                    out[delta] = s
                else:
                    del out[delta]
    return DiffOp._raw(op.dim, {d: p for d, p in out.items() if p})


def exp_omega_by_brackets(omega: OneForm, op: DiffOp) -> DiffOp:
    """Exponential of the inner derivation, summed bracket by bracket.

    Sums ``ad^k(op)/k!`` where one step is ``E -> [E, m_f]`` with ``f``
    the primitive of the closed form.  Each bracket with a
    multiplication operator lowers the order, so the sum stops after at
    most ``order + 1`` steps; a guard trips if it ever failed to.  This
    is the defining form; :func:`exp_omega` evaluates the same map in
    closed form and is checked against this one.
    """
    if omega.dim != op.dim:
        raise ValueError(f"dimension mismatch: {omega.dim} vs {op.dim}")
    if not omega.is_closed():
        raise ValueError("one-form is not closed")
    order = op.order()
    if order is None:
        return op
    mf = DiffOp.from_poly(omega.potential())
    total = op
    bracket = op
    k = 0
    while True:
        k += 1
        bracket = commutator(bracket, mf)
        if not bracket:
            return total
        if k > order + 1:
            raise RuntimeError("bracket chain with a multiplication operator did not terminate")
        total = total + make_ratio(1, factorial(k)) * bracket


def exp_omega(omega: OneForm, op: DiffOp) -> DiffOp:
    """Exponential of the inner derivation by the potential of ``omega``.

    Equal to the bracket sum ``sum_k ad^k(op)/k!`` (one step is
    ``E -> [E, m_f]``), evaluated in closed form as the conjugation
    ``e^{-f} . op . e^{f}``: a term ``a d^alpha`` maps to
    ``sum_{gamma <= alpha} C(alpha, gamma) a E_gamma d^(alpha-gamma)``
    with ``E_gamma = e^{-f} d^gamma(e^f)`` polynomial, built by the
    recursion ``E_{gamma+e_i} = d_i E_gamma + (d_i f) E_gamma``.
    """
    if omega.dim != op.dim:
        raise ValueError(f"dimension mismatch: {omega.dim} vs {op.dim}")
    if not omega.is_closed():
        raise ValueError("one-form is not closed")
    if not op:
        return op
    dim = op.dim
    f = omega.potential()
    gradients = [f.partial(i) for i in range(dim)]
    bell: dict[MultiIndex, Polynomial] = {(0,) * dim: Polynomial.one(dim)}

    def bell_factor(gamma: MultiIndex) -> Polynomial:
        got = bell.get(gamma)
        if got is None:
            var = next(i for i, g in enumerate(gamma) if g)
            parent = gamma[:var] + (gamma[var] - 1,) + gamma[var + 1 :]
            prev = bell_factor(parent)
            got = prev.partial(var) + gradients[var] * prev
            bell[gamma] = got
        return got

    out: dict[MultiIndex, Polynomial] = {}
    for alpha, a in op.terms():
        for gamma in index_box(alpha):
            factor = bell_factor(gamma)
            if not factor:
                continue
            idx = tuple(x - g for x, g in zip(alpha, gamma))
            term = a * factor * multi_binom(alpha, gamma)
            s = out.get(idx)
            if s is None:
                out[idx] = term
            else:
                s = s + term
                if s:
                    out[idx] = s
                else:
                    del out[idx]
    return DiffOp._raw(dim, {i: p for i, p in out.items() if p})


def d1_apply(spec: D1AutoSpec, f: Polynomial, field: DiffOp) -> DiffOp:
    """The first-order family map on ``f + X``.

    Function part ``kappa f + lambda div X + omega(X)`` composed with
    ``phi^-1``, plus the pushforward of the field.
    """
    if f.dim != spec.dim or field.dim != spec.dim:
        raise ValueError("operand dimensions do not match the parameter record")
    if not is_vector_field(field):
        raise ValueError("expected a vector field")
    g = spec.kappa * f + spec.lam * divergence(field) + omega_of_field(spec.omega, field)
    pulled = spec.phi.inverse().pullback(g)
    return DiffOp.from_poly(pulled) + pushforward(spec.phi, field)


def d1_apply_op(spec: D1AutoSpec, op: DiffOp) -> DiffOp:
    """Apply the first-order family map to a combined order <= 1 operator."""
    f, field = split_first_order(op)
    return d1_apply(spec, f, field)


def d_apply(spec: DAutoSpec, op: DiffOp) -> DiffOp:
    """The full-algebra family map: pushforward after conjugation power after exp."""
    if op.dim != spec.dim:
        raise ValueError("operand dimension does not match the parameter record")
    image = exp_omega(spec.omega, op)
    if spec.a:
        image = conjugation(image)
    return pushforward(spec.phi, image)


def s_apply(spec: SAutoSpec, symbol: PhaseSymbol) -> PhaseSymbol:
    """The symbol family map: grade scaling, then the two point maps."""
    if symbol.dim != spec.dim:
        raise ValueError("operand dimension does not match the parameter record")
    image = u_kappa(spec.kappa, symbol)
    image = phase_lift(spec.phi, image)
    return vertical_translation(spec.omega, image)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a sampled verification: pass/fail plus the first witness."""

    passed: bool
    checks: int
    counterexample: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def _vectorize(element) -> dict[tuple[MultiIndex, MultiIndex], Scalar]:
    vec: dict[tuple[MultiIndex, MultiIndex], Scalar] = {}
    for idx, poly in element.terms():
        for mono, c in poly.terms():
            vec[(idx, mono)] = c
    return vec


class _RationalSpan:
    """Incremental exact Gaussian elimination over sparse rational vectors."""

    def __init__(self):
        self._pivots: dict[tuple[MultiIndex, MultiIndex], dict] = {}

    def try_add(self, vec: dict) -> bool:
        """Reduce against the basis; add the residual. True if independent."""
        residual = {k: v for k, v in vec.items() if v}
        while residual:
            lead = max(residual)
            pivot = self._pivots.get(lead)
            if pivot is None:
                inv = scalar_recip(residual[lead])
                self._pivots[lead] = {
                    k: normalize_scalar(v * inv) for k, v in residual.items()
                }
                return True
            coeff = residual.pop(lead)
            # Pivot rows are echelon: their lead is their greatest key, so
            # elimination only ever introduces strictly smaller keys.
            for k, v in pivot.items():
                if k == lead:
                    continue
                s = residual.get(k, 0) - coeff * v
                if s:
                    residual[k] = normalize_scalar(s)
                else:
                    residual.pop(k, None)
        return False


def verify_lie_automorphism(
    transform: Callable,
    domain: str,
    samples: Sequence[tuple],
    rng: random.Random | None = None,
    linearity_cases: int = 50,
) -> CheckReport:
    """Check a black-box linear map for Lie-automorphism behaviour.

    Bracket preservation is checked exactly on every sample pair;
    linearity on random rational combinations of the first
    ``linearity_cases`` pairs.  Afterwards, injectivity on the span of
    all sampled elements: a basis of the input span must map to
    independent images.  Failures are reported, never raised.
    """
    if domain == "operators":
        bracket = commutator
    elif domain == "symbols":
        bracket = poisson_bracket
    else:
        raise ValueError(f"unknown domain {domain!r}")
    if not samples:
        raise ValueError("need at least one sample pair")
    rng = rng if rng is not None else random.Random(0)
    checks = 0
    for index, (a, b) in enumerate(samples):
        fa = transform(a)
        fb = transform(b)
        if transform(bracket(a, b)) != bracket(fa, fb):
            return CheckReport(False, checks, f"bracket not preserved on ({a}, {b})")
        checks += 1
        if index < linearity_cases:
            c1 = make_ratio(rng.randint(1, 5), rng.randint(1, 3))
            c2 = make_ratio(rng.randint(-5, -1), rng.randint(1, 3))
            if transform(c1 * a + c2 * b) != c1 * fa + c2 * fb:
                return CheckReport(
                    False, checks, f"not linear on {c1}*({a}) + {c2}*({b})"
                )
            checks += 1
    span = _RationalSpan()
    basis = []
    for pair in samples:
        for element in pair:
            if span.try_add(_vectorize(element)):
                basis.append(element)
    image_span = _RationalSpan()
    for element in basis:
        if not image_span.try_add(_vectorize(transform(element))):
            return CheckReport(
                False, checks, f"images are dependent on the span (witness {element})"
            )
        checks += 1
    return CheckReport(True, checks)


def _order_at_most(value: int | None, bound: int) -> bool:
    return value is None or value <= bound


def verify_filtration_respect(
    transform: Callable[[DiffOp], DiffOp],
    kappa: int | Fraction,
    max_order: int,
    *,
    dim: int,
    rng: random.Random,
    cases_per_order: int = 20,
    coeff_degree: int = 4,
) -> CheckReport:
    """Check the graded structure ``kappa^(1-i) id + lower order``.

    For random operators of every exact order ``i <= max_order``, the
    image must stay in order ``i`` and differ from ``kappa^(1-i)``
    times the input only in order ``i - 1``.
    """
    from .sampling import random_operator_of_order

    kappa = normalize_scalar(kappa)
    if not kappa:
        raise ValueError("kappa must be nonzero")
    checks = 0
    for level in range(max_order + 1):
        scale = scalar_pow(kappa, 1 - level)
        for _ in range(cases_per_order):
            op = random_operator_of_order(rng, dim, level, coeff_degree)
            image = transform(op)
            if not _order_at_most(image.order(), level):
                return CheckReport(False, checks, f"order raised on {op}")
            if not _order_at_most((image - scale * op).order(), level - 1):
                return CheckReport(
                    False,
                    checks,
                    f"top term of {op} not scaled by kappa^(1-{level})",
                )
            checks += 2
    return CheckReport(True, checks)


def extract_d1_params(transform: Callable[[DiffOp], DiffOp], dim: int) -> D1AutoSpec:
    """Recover (kappa, lambda, omega, phi) from a black-box family member.

    Reads kappa off the image of 1, the inverse base map off the images
    of the coordinates, omega off the zero-order parts of the coordinate
    fields, and lambda off the zero-order part of the image of
    ``x1 d1``.  A residual comparison on probe operators rejects maps
    outside the family.
    """
    n = dim
    one = Polynomial.one(n)
    img_one = transform(DiffOp.from_poly(one))
    f0, field0 = split_first_order(img_one)
    if field0 or not f0.is_constant() or not f0:
        raise ValueError("image of 1 is not a nonzero constant")
    kappa = f0.constant_term()
    inv_kappa = scalar_recip(kappa)

    rows = []
    offsets = []
    for j in range(n):
        img = transform(DiffOp.from_poly(Polynomial.variable(n, j)))
        fj, fieldj = split_first_order(img)
        if fieldj:
            raise ValueError("image of a coordinate is not a multiplication operator")
        q = fj * inv_kappa
        deg = q.degree()
        if deg is None or deg > 1:
            raise ValueError("recovered base map is not affine")
        rows.append([q.coefficient(tuple(1 if i == k else 0 for i in range(n))) for k in range(n)])
        offsets.append(q.constant_term())
    psi = AffineMap(rows, offsets)  # raises if the linear part is singular
    phi = psi.inverse()

    components = []
    for i in range(n):
        img = transform(DiffOp.partial(n, i))
        components.append(phi.pullback(img.zero_order_part()))
    omega = OneForm(components)

    x1d1 = compose(DiffOp.from_poly(Polynomial.variable(n, 0)), DiffOp.partial(n, 0))
    h = phi.pullback(transform(x1d1).zero_order_part())
    lam_poly = h - Polynomial.variable(n, 0) * omega.components[0]
    if not lam_poly.is_constant():
        raise ValueError("divergence cocycle weight is not constant")
    spec = D1AutoSpec(kappa, lam_poly.constant_term(), omega, phi)

    probes: list[DiffOp] = [DiffOp.from_poly(one)]
    for j in range(n):
        xj = Polynomial.variable(n, j)
        probes.append(DiffOp.from_poly(xj * xj))
        for k in range(n):
            probes.append(compose(DiffOp.from_poly(xj), DiffOp.partial(n, k)))
    for probe in probes:
        if transform(probe) != d1_apply_op(spec, probe):
            raise ValueError("map does not belong to the first-order family")
    return spec

"""Normal-ordered differential operators with polynomial coefficients.

An operator is a finite map from derivative multi-indices ``alpha`` to
polynomial coefficients ``a_alpha``; it acts on a polynomial ``f`` as
``sum_alpha a_alpha * d^alpha f``.  This coefficients-left normal form is
unique, so equality of operators is equality of representations.

Composition re-normal-orders via the Leibniz rule and is the only place
noncommutativity enters; everything else (commutators, adjoints, order,
filtration probes, divergence) is built on top of it.

Canonical text form: derivative factors are named ``d1..dn`` and
coefficients stay on the left, e.g. ``x1^2*d1*d2 + d3 + 1``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .poly import (
    MultiIndex,
    Polynomial,
    RATIONAL_TYPES,
    Scalar,
    format_sum,
    grlex_key,
    index_box,
    monomial_text,
    multi_binom,
    normalize_scalar,
)


class DiffOp:
    """A linear differential operator in normal-ordered form.

    Immutable and hashable.  ``*`` composes operators (noncommutative);
    scalars and polynomials mixed into ``*`` act as multiplication
    operators on the matching side.  ``order()`` is the top derivative
    length, ``None`` for the zero operator.
    """

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[MultiIndex, Polynomial] | None = None):
        if dim < 1:
            raise ValueError(f"dimension must be at least 1, got {dim}")
        clean: dict[MultiIndex, Polynomial] = {}
        if terms:
            for alpha, coeff in terms.items():
                alpha = tuple(alpha)
                if len(alpha) != dim or any(e < 0 for e in alpha):
                    raise ValueError(f"bad derivative index {alpha} for dimension {dim}")
                if coeff.dim != dim:
                    raise ValueError(f"coefficient dimension {coeff.dim} != {dim}")
                if coeff:
                    clean[alpha] = coeff
        self.dim = dim
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, dim: int, terms: dict[MultiIndex, Polynomial]) -> "DiffOp":
        op = object.__new__(cls)
        op.dim = dim
        op._terms = terms
        op._hash = None
        return op

    @classmethod
    def zero(cls, dim: int) -> "DiffOp":
        return cls(dim)

    @classmethod
    def identity(cls, dim: int) -> "DiffOp":
        return cls.from_poly(Polynomial.one(dim))

    @classmethod
    def from_poly(cls, f: Polynomial) -> "DiffOp":
        """The multiplication operator ``g -> f * g``."""
        return cls(f.dim, {(0,) * f.dim: f})

    @classmethod
    def const(cls, dim: int, value: int | Fraction) -> "DiffOp":
        return cls.from_poly(Polynomial.const(dim, value))

    @classmethod
    def partial(cls, dim: int, var: int) -> "DiffOp":
        """The derivation ``d/dx_var`` (0-based index)."""
        if not 0 <= var < dim:
            raise IndexError(f"variable index {var} out of range for dimension {dim}")
        alpha = tuple(1 if i == var else 0 for i in range(dim))
        return cls(dim, {alpha: Polynomial.one(dim)})

    @classmethod
    def derivative_monomial(cls, dim: int, alpha: Sequence[int]) -> "DiffOp":
        """The pure derivative ``d^alpha`` with unit coefficient."""
        return cls(dim, {tuple(alpha): Polynomial.one(dim)})

    def terms(self) -> Iterator[tuple[MultiIndex, Polynomial]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, alpha: Sequence[int]) -> Polynomial:
        return self._terms.get(tuple(alpha), Polynomial.zero(self.dim))

    def zero_order_part(self) -> Polynomial:
        """The coefficient of the empty derivative (action on constants)."""
        return self.coefficient((0,) * self.dim)

    def order(self) -> int | None:
        """Top derivative length; ``None`` for the zero operator."""
        if not self._terms:
            return None
        return max(sum(a) for a in self._terms)

    def graded_part(self, level: int) -> "DiffOp":
        """The terms whose derivative length is exactly ``level``."""
        return DiffOp._raw(
            self.dim, {a: p for a, p in self._terms.items() if sum(a) == level}
        )

    def _check_same_dim(self, other: "DiffOp") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __add__(self, other: "DiffOp | Polynomial | int | Fraction") -> "DiffOp":
        if isinstance(other, Polynomial):
            other = DiffOp.from_poly(other)
        elif isinstance(other, RATIONAL_TYPES):
            other = DiffOp.const(self.dim, other)
        if not isinstance(other, DiffOp):
            return NotImplemented
        self._check_same_dim(other)
        terms = dict(self._terms)
        for alpha, p in other._terms.items():
            s = terms.get(alpha)
            if s is None:
                terms[alpha] = p
            else:
                s = s + p
                if s:
                    terms[alpha] = s
                else:
                    del terms[alpha]
        return DiffOp._raw(self.dim, terms)

    def __radd__(self, other: "Polynomial | int | Fraction") -> "DiffOp":
        return self.__add__(other)

    def __sub__(self, other: "DiffOp | Polynomial | int | Fraction") -> "DiffOp":
        if isinstance(other, (Polynomial, *RATIONAL_TYPES)):
            return self + (-other)
        if isinstance(other, DiffOp):
            return self + (-other)
        return NotImplemented

    def __neg__(self) -> "DiffOp":
        return DiffOp._raw(self.dim, {a: -p for a, p in self._terms.items()})

    def __mul__(self, other: "DiffOp | Polynomial | int | Fraction") -> "DiffOp":
        if isinstance(other, DiffOp):
            return compose(self, other)
        if isinstance(other, Polynomial):
            return compose(self, DiffOp.from_poly(other))
        if isinstance(other, RATIONAL_TYPES):
            c = normalize_scalar(other)
            return DiffOp(self.dim, {a: p * c for a, p in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other: "Polynomial | int | Fraction") -> "DiffOp":
        if isinstance(other, Polynomial):
            return compose(DiffOp.from_poly(other), self)
        if isinstance(other, RATIONAL_TYPES):
            return self.__mul__(other)
        return NotImplemented

    def apply(self, f: Polynomial) -> Polynomial:
        """Exact action ``sum_alpha a_alpha * d^alpha f``."""
        if f.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {f.dim}")
        out: dict[int, Scalar] = {}
        for alpha, a in self._terms.items():
            df = f.partial_many(alpha)
            if not df:
                continue
            for k, c in (a * df)._terms.items():
                s = out.get(k)
                out[k] = c if s is None else s + c
        return Polynomial._raw(
            self.dim,
            {k: (c if type(c) is int else normalize_scalar(c)) for k, c in out.items() if c},
        )

    def sorted_terms(self) -> list[tuple[MultiIndex, Polynomial]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def __str__(self) -> str:
        parts: list[tuple[Scalar, str]] = []
        for alpha, a in self.sorted_terms():
            dmono = monomial_text("d", alpha)
            for xmono, c in a.sorted_terms():
                xtext = monomial_text("x", xmono)
                mono = "*".join(t for t in (xtext, dmono) if t)
                parts.append((c, mono))
        return format_sum(parts)

    def __repr__(self) -> str:
        return f"DiffOp({self.dim}, '{self}')"


def compose(first: DiffOp, second: DiffOp) -> DiffOp:
    """Normal-ordered composition ``first o second``.

    Leibniz expansion: for terms ``a d^alpha`` of ``first`` and
    ``b d^beta`` of ``second``,
    ``d^alpha (b d^beta f) = sum_{gamma <= alpha} C(alpha, gamma)
    (d^gamma b) d^(alpha - gamma + beta) f``.
    """
    first._check_same_dim(second)
    dim = first.dim
    out: dict[MultiIndex, dict[int, Scalar]] = {}
    for beta, b in second._terms.items():
        bdeg = b.variable_degrees()
        derivs: dict[MultiIndex, Polynomial] = {(0,) * dim: b}

        def deriv(gamma: MultiIndex) -> Polynomial:
            got = derivs.get(gamma)
            if got is None:
                var = next(i for i, g in enumerate(gamma) if g)
                parent = gamma[:var] + (gamma[var] - 1,) + gamma[var + 1 :]
                got = deriv(parent).partial(var)
                derivs[gamma] = got
            return got

        for alpha, a in first._terms.items():
            bounds = tuple(min(x, y) for x, y in zip(alpha, bdeg))
            for gamma in index_box(bounds):
                db = deriv(gamma)
                if not db:
                    continue
                w = multi_binom(alpha, gamma)
                idx = tuple(x - g + y for x, g, y in zip(alpha, gamma, beta))
                acc = out.setdefault(idx, {})
                get = acc.get
                if w == 1:
                    for k, c in (a * db)._terms.items():
                        s = get(k)
                        acc[k] = c if s is None else s + c
                else:
                    for k, c in (a * db)._terms.items():
                        v = c * w
                        s = get(k)
                        acc[k] = v if s is None else s + v
    terms: dict[MultiIndex, Polynomial] = {}
    for idx, raw in out.items():
        clean = {
            k: (c if type(c) is int else normalize_scalar(c)) for k, c in raw.items() if c
        }
        if clean:
            terms[idx] = Polynomial._raw(dim, clean)
    return DiffOp._raw(dim, terms)


def commutator(first: DiffOp, second: DiffOp) -> DiffOp:
    """The Lie bracket ``first o second - second o first``."""
    return compose(first, second) - compose(second, first)


def bracket_with_mult(op: DiffOp, f: Polynomial) -> DiffOp:
    """The bracket ``[op, m_f]`` computed directly.

    In ``op o m_f - m_f o op`` the order-preserving Leibniz terms cancel,
    leaving ``sum_alpha a_alpha sum_{0 < gamma <= alpha} C(alpha, gamma)
    (d^gamma f) d^(alpha - gamma)``; skipping the cancelled products makes
    bracket chains against multiplication operators much cheaper.
    """
    if f.dim != op.dim:
        raise ValueError(f"dimension mismatch: {op.dim} vs {f.dim}")
    dim = op.dim
    fdeg = f.variable_degrees()
    derivs: dict[MultiIndex, Polynomial] = {(0,) * dim: f}

    def deriv(gamma: MultiIndex) -> Polynomial:
        got = derivs.get(gamma)
        if got is None:
            var = next(i for i, g in enumerate(gamma) if g)
            parent = gamma[:var] + (gamma[var] - 1,) + gamma[var + 1 :]
            got = deriv(parent).partial(var)
            derivs[gamma] = got
        return got

    out: dict[MultiIndex, dict[int, Scalar]] = {}
    for alpha, a in op._terms.items():
        bounds = tuple(min(x, y) for x, y in zip(alpha, fdeg))
        for gamma in index_box(bounds):
            if not any(gamma):
                continue
            df = deriv(gamma)
            if not df:
                continue
            w = multi_binom(alpha, gamma)
            idx = tuple(x - g for x, g in zip(alpha, gamma))
            acc = out.setdefault(idx, {})
            get = acc.get
            for k, c in (a * df)._terms.items():
                v = c * w
                s = get(k)
                acc[k] = v if s is None else s + v
    terms: dict[MultiIndex, Polynomial] = {}
    for idx, raw in out.items():
        clean = {
            k: (c if type(c) is int else normalize_scalar(c)) for k, c in raw.items() if c
        }
        if clean:
            terms[idx] = Polynomial._raw(dim, clean)
    return DiffOp._raw(dim, terms)


def left_mult(f: Polynomial, op: DiffOp) -> DiffOp:
    """Left multiplication ``m_f o op``."""
    return compose(DiffOp.from_poly(f), op)


def right_mult(f: Polynomial, op: DiffOp) -> DiffOp:
    """Right multiplication ``op o m_f``."""
    return compose(op, DiffOp.from_poly(f))


def _acts_as_multiplication(op: DiffOp, probes: Sequence[Polynomial]) -> bool:
    order = op.order()
    if order is None or order <= 0:
        return True  # true multiplication operators act that way exactly
    g = op.apply(Polynomial.one(op.dim))
    return all(op.apply(f) == g * f for f in probes)


def _check_probes(op: DiffOp, probes: Sequence[Polynomial]) -> None:
    if not probes:
        raise ValueError("probe set must be nonempty")
    for f in probes:
        if f.dim != op.dim:
            raise ValueError(f"dimension mismatch: {op.dim} vs {f.dim}")


def _bracket_frontier(frontier: list[DiffOp], probes: Sequence[Polynomial]) -> list[DiffOp]:
    nxt: list[DiffOp] = []
    seen: set[DiffOp] = set()
    for current in frontier:
        order = current.order()
        if order is None or order <= 0:
            continue  # multiplications bracket to zero with every m_f
        for f in probes:
            br = bracket_with_mult(current, f)
            if br and br not in seen:
                seen.add(br)
                nxt.append(br)
    return nxt


def grothendieck_member(op: DiffOp, level: int, probes: Sequence[Polynomial]) -> bool:
    """Inductive filtration membership probed on a finite set of functions.

    Level -1 holds only for the zero operator.  Level 0 holds when the
    operator acts as multiplication by its value on 1 across all probes.
    Level ``i+1`` holds when every bracket with a probe multiplication
    operator lies in level ``i``.  The recursion is evaluated
    breadth-first over bracket chains; chains are pruned once they reach
    a multiplication operator, whose bracket with any ``m_f`` vanishes
    identically.
    """
    if level < -1:
        raise ValueError(f"filtration level must be >= -1, got {level}")
    _check_probes(op, probes)
    if level == -1:
        return not op
    frontier = [op]
    for _ in range(level):
        frontier = _bracket_frontier(frontier, probes)
        if not frontier:
            return True
    return all(_acts_as_multiplication(current, probes) for current in frontier)


def grothendieck_levels(
    op: DiffOp, max_level: int, probes: Sequence[Polynomial]
) -> list[bool]:
    """Membership at every level from -1 through ``max_level`` in one sweep.

    Equivalent to calling :func:`grothendieck_member` per level, but the
    bracket-chain frontier is shared across levels instead of rebuilt.
    """
    if max_level < -1:
        raise ValueError(f"filtration level must be >= -1, got {max_level}")
    _check_probes(op, probes)
    results = [not op]
    frontier = [op]
    exhausted = False
    for level in range(max_level + 1):
        if exhausted:
            results.append(True)
            continue
        results.append(all(_acts_as_multiplication(current, probes) for current in frontier))
        if level < max_level:
            frontier = _bracket_frontier(frontier, probes)
            if not frontier:
                exhausted = True
    return results


def formal_adjoint(op: DiffOp) -> DiffOp:
    """The adjoint for the standard volume: ``sum (-1)^|alpha| d^alpha o m_(a_alpha)``."""
    result = DiffOp.zero(op.dim)
    for alpha, a in op.terms():
        term = compose(DiffOp.derivative_monomial(op.dim, alpha), DiffOp.from_poly(a))
        if sum(alpha) % 2:
            term = -term
        result = result + term
    return result


def conjugation(op: DiffOp) -> DiffOp:
    """Minus the formal adjoint: an involutive Lie-bracket automorphism."""
    return -formal_adjoint(op)


def ad_nilpotency_witness(op: DiffOp, f: Polynomial, n_max: int = 16) -> int | None:
    """Least ``n <= n_max`` with the n-fold bracket of ``op`` against ``m_f`` zero.

    Returns ``None`` when no witness is found within the bound; that is
    a failed search, not a disproof.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    current = DiffOp.from_poly(f)
    for n in range(1, n_max + 1):
        current = commutator(op, current)
        if not current:
            return n
    return None


def is_vector_field(op: DiffOp) -> bool:
    """True iff every term is a single first derivative (zero 0-th part)."""
    return all(sum(alpha) == 1 for alpha in op._terms)


def divergence(field: DiffOp) -> Polynomial:
    """Divergence of a vector field for the standard density: ``sum_i d_i X^i``."""
    if not is_vector_field(field):
        raise ValueError("divergence needs a vector field (first order, no 0-th term)")
    total = Polynomial.zero(field.dim)
    for alpha, a in field.terms():
        var = next(i for i, e in enumerate(alpha) if e)
        total = total + a.partial(var)
    return total


def split_first_order(op: DiffOp) -> tuple[Polynomial, DiffOp]:
    """Split an order <= 1 operator into its function and vector-field parts."""
    o = op.order()
    if o is not None and o > 1:
        raise ValueError(f"operator has order {o}, expected at most 1")
    f = op.zero_order_part()
    field = DiffOp._raw(op.dim, {a: p for a, p in op._terms.items() if sum(a) == 1})
    return f, field

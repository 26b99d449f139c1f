"""Polynomial phase-space symbols and the canonical Poisson bracket.

A symbol is a polynomial in base variables ``x1..xn`` and fiber
variables ``xi1..xin``, stored as a map from fiber exponent tuples to
polynomial-in-x coefficients.  The fiber degree grades the algebra; the
grade-i component collects the terms with fiber length i.

The normal-ordering bijection with differential operators is literal
here: ``a_alpha d^alpha <-> a_alpha xi^alpha`` termwise.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Mapping, Sequence
from weakref import WeakKeyDictionary

from .operators import DiffOp
from .poly import (
    AffineMap,
    MultiIndex,
    OneForm,
    Polynomial,
    RATIONAL_TYPES,
    Scalar,
    format_sum,
    grlex_key,
    monomial_text,
    normalize_scalar,
    scalar_pow,
)


class PhaseSymbol:
    """A polynomial on phase space, graded by fiber degree. Immutable."""

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[MultiIndex, Polynomial] | None = None):
        if dim < 1:
            raise ValueError(f"dimension must be at least 1, got {dim}")
        clean: dict[MultiIndex, Polynomial] = {}
        if terms:
            for beta, coeff in terms.items():
                beta = tuple(beta)
                if len(beta) != dim or any(e < 0 for e in beta):
                    raise ValueError(f"bad fiber index {beta} for dimension {dim}")
                if coeff.dim != dim:
                    raise ValueError(f"coefficient dimension {coeff.dim} != {dim}")
                if coeff:
                    clean[beta] = coeff
        self.dim = dim
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, dim: int, terms: dict[MultiIndex, Polynomial]) -> "PhaseSymbol":
        s = object.__new__(cls)
        s.dim = dim
        s._terms = terms
        s._hash = None
        return s

    @classmethod
    def zero(cls, dim: int) -> "PhaseSymbol":
        return cls(dim)

    @classmethod
    def from_poly(cls, f: Polynomial) -> "PhaseSymbol":
        return cls(f.dim, {(0,) * f.dim: f})

    @classmethod
    def const(cls, dim: int, value: int | Fraction) -> "PhaseSymbol":
        return cls.from_poly(Polynomial.const(dim, value))

    @classmethod
    def fiber(cls, dim: int, var: int) -> "PhaseSymbol":
        """The fiber coordinate ``xi_var`` (0-based)."""
        if not 0 <= var < dim:
            raise IndexError(f"fiber index {var} out of range for dimension {dim}")
        beta = tuple(1 if i == var else 0 for i in range(dim))
        return cls(dim, {beta: Polynomial.one(dim)})

    def terms(self) -> Iterator[tuple[MultiIndex, Polynomial]]:
        return iter(self._terms.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, beta: Sequence[int]) -> Polynomial:
        return self._terms.get(tuple(beta), Polynomial.zero(self.dim))

    def top_grade(self) -> int | None:
        if not self._terms:
            return None
        return max(sum(b) for b in self._terms)

    def grade(self, level: int) -> "PhaseSymbol":
        """The homogeneous component of fiber degree ``level``."""
        return PhaseSymbol._raw(
            self.dim, {b: p for b, p in self._terms.items() if sum(b) == level}
        )

    def grades(self) -> list[int]:
        return sorted({sum(b) for b in self._terms})

    def _check_same_dim(self, other: "PhaseSymbol") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhaseSymbol):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __add__(self, other: "PhaseSymbol | Polynomial | int | Fraction") -> "PhaseSymbol":
        if isinstance(other, Polynomial):
            other = PhaseSymbol.from_poly(other)
        elif isinstance(other, RATIONAL_TYPES):
            other = PhaseSymbol.const(self.dim, other)
        if not isinstance(other, PhaseSymbol):
            return NotImplemented
        self._check_same_dim(other)
        terms = dict(self._terms)
        for beta, p in other._terms.items():
            s = terms.get(beta)
            if s is None:
                terms[beta] = p
            else:
                s = s + p
                if s:
                    terms[beta] = s
                else:
                    del terms[beta]
        return PhaseSymbol._raw(self.dim, terms)

    def __radd__(self, other: "Polynomial | int | Fraction") -> "PhaseSymbol":
        return self.__add__(other)

    def __sub__(self, other: "PhaseSymbol | Polynomial | int | Fraction") -> "PhaseSymbol":
        if isinstance(other, PhaseSymbol):
            return self + (-other)
        if isinstance(other, (Polynomial, *RATIONAL_TYPES)):
            return self + (-other)
        return NotImplemented

    def __neg__(self) -> "PhaseSymbol":
        return PhaseSymbol._raw(self.dim, {b: -p for b, p in self._terms.items()})

    def __mul__(self, other: "PhaseSymbol | Polynomial | int | Fraction") -> "PhaseSymbol":
        if isinstance(other, Polynomial):
            other = PhaseSymbol.from_poly(other)
        elif isinstance(other, RATIONAL_TYPES):
            c = normalize_scalar(other)
            return PhaseSymbol(self.dim, {b: p * c for b, p in self._terms.items()})
        if not isinstance(other, PhaseSymbol):
            return NotImplemented
        self._check_same_dim(other)
        out: dict[MultiIndex, Polynomial] = {}
        for ba, pa in self._terms.items():
            for bb, pb in other._terms.items():
                beta = tuple(x + y for x, y in zip(ba, bb))
                prod = pa * pb
                s = out.get(beta)
                if s is None:
                    out[beta] = prod
                else:
                    s = s + prod
                    if s:
                        out[beta] = s
                    else:
                        del out[beta]
        return PhaseSymbol._raw(self.dim, out)

    def __rmul__(self, other: "Polynomial | int | Fraction") -> "PhaseSymbol":
        return self.__mul__(other)

    def __pow__(self, exponent: int) -> "PhaseSymbol":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("symbol exponents must be non-negative integers")
        result = PhaseSymbol.const(self.dim, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def xi_partial(self, var: int) -> "PhaseSymbol":
        """Partial derivative along the fiber variable ``xi_var``."""
        if not 0 <= var < self.dim:
            raise IndexError(f"fiber index {var} out of range for dimension {self.dim}")
        terms: dict[MultiIndex, Polynomial] = {}
        for beta, p in self._terms.items():
            e = beta[var]
            if e:
                lowered = beta[:var] + (e - 1,) + beta[var + 1 :]
                terms[lowered] = p * e
        return PhaseSymbol._raw(self.dim, terms)

    def x_partial(self, var: int) -> "PhaseSymbol":
        """Partial derivative along the base variable ``x_var``."""
        terms: dict[MultiIndex, Polynomial] = {}
        for beta, p in self._terms.items():
            dp = p.partial(var)
            if dp:
                terms[beta] = dp
        return PhaseSymbol._raw(self.dim, terms)

    def substitute(
        self,
        x_values: Sequence["PhaseSymbol"],
        xi_values: Sequence["PhaseSymbol"],
    ) -> "PhaseSymbol":
        """Evaluate at symbol arguments for every base and fiber variable."""
        if len(x_values) != self.dim or len(xi_values) != self.dim:
            raise ValueError("need one substitution value per base and fiber variable")
        for v in (*x_values, *xi_values):
            if v.dim != self.dim:
                raise ValueError("substitution values must match the symbol dimension")
        xdeg = [0] * self.dim
        xideg = [0] * self.dim
        for beta, p in self._terms.items():
            for i, e in enumerate(beta):
                if e > xideg[i]:
                    xideg[i] = e
            for i, e in enumerate(p.variable_degrees()):
                if e > xdeg[i]:
                    xdeg[i] = e
        xpow = [_powers(v, xdeg[i]) for i, v in enumerate(x_values)]
        xipow = [_powers(v, xideg[i]) for i, v in enumerate(xi_values)]
        total = PhaseSymbol.zero(self.dim)
        for beta, p in self._terms.items():
            fiber_factor = PhaseSymbol.const(self.dim, 1)
            for i, e in enumerate(beta):
                if e:
                    fiber_factor = fiber_factor * xipow[i][e]
            for mono, c in p.terms():
                term = fiber_factor * c
                for i, e in enumerate(mono):
                    if e:
                        term = term * xpow[i][e]
                total = total + term
        return total

    def sorted_terms(self) -> list[tuple[MultiIndex, Polynomial]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def __str__(self) -> str:
        parts: list[tuple[Scalar, str]] = []
        for beta, p in self.sorted_terms():
            fmono = monomial_text("xi", beta)
            for xmono, c in p.sorted_terms():
                xtext = monomial_text("x", xmono)
                mono = "*".join(t for t in (xtext, fmono) if t)
                parts.append((c, mono))
        return format_sum(parts)

    def __repr__(self) -> str:
        return f"PhaseSymbol({self.dim}, '{self}')"


def _powers(value: PhaseSymbol, top: int) -> list[PhaseSymbol]:
    col = [PhaseSymbol.const(value.dim, 1)]
    for _ in range(top):
        col.append(col[-1] * value)
    return col


def total_symbol(op: DiffOp) -> PhaseSymbol:
    """Replace each derivative monomial by the matching fiber monomial."""
    return PhaseSymbol._raw(op.dim, dict(op._terms))


def quantize(symbol: PhaseSymbol) -> DiffOp:
    """Inverse of :func:`total_symbol`: fiber monomials become derivatives."""
    return DiffOp._raw(symbol.dim, dict(symbol._terms))


def principal_symbol(op: DiffOp, level: int | None = None) -> PhaseSymbol:
    """Top-grade symbol, or the grade-``level`` symbol when given.

    With an explicit level the operator order must not exceed it; the
    result is the principal symbol at equality and zero above.  The zero
    operator has no principal symbol unless a level is supplied.
    """
    order = op.order()
    if level is None:
        if order is None:
            raise ValueError("the zero operator has no principal symbol")
        level = order
    elif order is not None and level < order:
        raise ValueError(f"grade {level} is below the operator order {order}")
    return PhaseSymbol._raw(
        op.dim, {a: p for a, p in op._terms.items() if sum(a) == level}
    )


def poisson_bracket(first: PhaseSymbol, second: PhaseSymbol) -> PhaseSymbol:
    """Canonical bracket ``sum_i dP/dxi_i dQ/dx_i - dP/dx_i dQ/dxi_i``."""
    first._check_same_dim(second)
    total = PhaseSymbol.zero(first.dim)
    for i in range(first.dim):
        total = total + first.xi_partial(i) * second.x_partial(i)
        total = total - first.x_partial(i) * second.xi_partial(i)
    return total


def degree_derivation(symbol: PhaseSymbol) -> PhaseSymbol:
    """Scale each grade-i component by (i - 1); a bracket derivation."""
    terms: dict[MultiIndex, Polynomial] = {}
    for beta, p in symbol._terms.items():
        scaled = p * (sum(beta) - 1)
        if scaled:
            terms[beta] = scaled
    return PhaseSymbol._raw(symbol.dim, terms)


def u_kappa(kappa: int | Fraction, symbol: PhaseSymbol) -> PhaseSymbol:
    """Scale each grade-i component by kappa^(1-i); a bracket automorphism."""
    kappa = normalize_scalar(kappa)
    if not kappa:
        raise ValueError("kappa must be nonzero")
    terms: dict[MultiIndex, Polynomial] = {}
    for beta, p in symbol._terms.items():
        terms[beta] = p * scalar_pow(kappa, 1 - sum(beta))
    return PhaseSymbol._raw(symbol.dim, terms)


# Fiber-monomial images are memoized per (immutable) map or form, keyed
# weakly so caches die with their owners.
_lift_fiber_cache: "WeakKeyDictionary[AffineMap, dict]" = WeakKeyDictionary()
_translation_cache: "WeakKeyDictionary[OneForm, dict]" = WeakKeyDictionary()


def _lift_fiber_image(phi: AffineMap, beta: MultiIndex) -> dict[MultiIndex, Scalar]:
    """Image of ``xi^beta`` under ``xi -> A^T xi`` as a scalar-coefficient map."""
    memo = _lift_fiber_cache.get(phi)
    if memo is None:
        memo = {}
        _lift_fiber_cache[phi] = memo
    got = memo.get(beta)
    if got is not None:
        return got
    n = phi.dim
    image: dict[MultiIndex, Scalar] = {(0,) * n: 1}
    for j, e in enumerate(beta):
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
    memo[beta] = image
    return image


def phase_lift(phi: AffineMap, symbol: PhaseSymbol) -> PhaseSymbol:
    """Pull the symbol back along the cotangent lift of ``phi``'s inverse.

    Substitutes ``x -> phi^{-1}(x)`` and ``xi -> A^T xi`` for
    ``phi(x) = A x + b``; this is the point map making the lift agree
    with the operator pushforward under the normal-ordering bijection.
    """
    if phi.dim != symbol.dim:
        raise ValueError(f"dimension mismatch: {phi.dim} vs {symbol.dim}")
    inverse = phi.inverse()
    out: dict[MultiIndex, Polynomial] = {}
    for beta, p in symbol._terms.items():
        pulled = inverse.pullback(p)
        for delta, c in _lift_fiber_image(phi, beta).items():
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
    return PhaseSymbol._raw(symbol.dim, {b: p for b, p in out.items() if p})


def fiber_translation(omega: OneForm, symbol: PhaseSymbol) -> PhaseSymbol:
    """Substitute ``xi_i -> xi_i + omega_i(x)`` without any closedness check.

    Only closed forms give a bracket automorphism; use
    :func:`vertical_translation` for the checked operation.  The raw
    version exists so verification suites can exhibit how a non-closed
    form breaks the bracket.
    """
    if omega.dim != symbol.dim:
        raise ValueError(f"dimension mismatch: {omega.dim} vs {symbol.dim}")
    n = symbol.dim
    memo = _translation_cache.get(omega)
    if memo is None:
        memo = {}
        _translation_cache[omega] = memo
    out: dict[MultiIndex, Polynomial] = {}
    for beta, p in symbol._terms.items():
        shifted = memo.get(beta)
        if shifted is None:
            shifted = PhaseSymbol.const(n, 1)
            for i, e in enumerate(beta):
                if e:
                    base = PhaseSymbol.fiber(n, i) + PhaseSymbol.from_poly(omega.components[i])
                    shifted = shifted * base**e
            memo[beta] = shifted
        for delta, q in shifted._terms.items():
            prod = p * q
            s = out.get(delta)
            if s is None:
                out[delta] = prod
            else:
                s = s + prod
                if s:
                    out[delta] = s
                else:
                    del out[delta]
    return PhaseSymbol._raw(symbol.dim, {b: q for b, q in out.items() if q})


def vertical_translation(omega: OneForm, symbol: PhaseSymbol) -> PhaseSymbol:
    """Translate the fiber by a closed 1-form; a bracket automorphism."""
    if not omega.is_closed():
        raise ValueError("one-form is not closed")
    return fiber_translation(omega, symbol)

"""Exact multivariate polynomial arithmetic over the rationals.

A polynomial in ``n`` variables is a finite map from exponent tuples to
nonzero rational coefficients.  Coefficients stay exact throughout: they
are stored as plain ``int`` whenever the denominator is 1 and as gmpy2
rationals (or :class:`fractions.Fraction` without gmpy2) otherwise,
which keeps the hot integer paths fast without ever leaving exact
arithmetic.

Internally a monomial is packed into a single integer, 16 bits per
variable, so multiplying monomials is one integer addition and term
dicts hash small ints.  Exponent tuples remain the public currency:
constructors accept them and :meth:`Polynomial.terms` yields them.

The module also provides the two coordinate-geometry ingredients needed
by the operator layers: invertible affine changes of variables and
polynomial 1-forms, with a closedness test and primitive construction.

Canonical text form: terms are printed in descending graded
lexicographic order of their exponent tuples, variables are named
``x1..xn``, e.g. ``3*x1^2*x2 - 1/2``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

try:  # gmpy2 rationals are exact and far faster; Fraction is the fallback.
    from gmpy2 import mpq as _ratio
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _ratio = Fraction

Scalar = int | Fraction
MultiIndex = tuple[int, ...]

RATIONAL_TYPES = (int, Fraction) if _ratio is Fraction else (int, Fraction, type(_ratio(1)))
_FRACTIONAL_TYPES = frozenset(RATIONAL_TYPES) - {int}

_FIELD_BITS = 16
_FIELD_MASK = (1 << _FIELD_BITS) - 1
# Public constructors reject exponents above this; products of desk-scale
# polynomials then stay far below the 16-bit field capacity.
_MAX_EXPONENT = 4096


def normalize_scalar(value) -> Scalar:
    """Return ``value`` as an exact rational, as ``int`` when integral."""
    t = type(value)
    if t is int:
        return value
    if t in _FRACTIONAL_TYPES:
        if value.denominator == 1:
            return int(value)
        return _ratio(value) if t is Fraction else value
    if isinstance(value, int):  # bool and other int subclasses
        return int(value)
    if isinstance(value, Fraction):
        return normalize_scalar(_ratio(value))
    raise TypeError(f"not an exact rational: {value!r}")


def parse_scalar(text: str) -> Scalar:
    """Parse an exact rational literal such as ``-3`` or ``5/2``."""
    return normalize_scalar(_ratio(text.strip().replace(" ", "")))


def make_ratio(numerator: int, denominator: int) -> Scalar:
    """The exact rational numerator/denominator."""
    return normalize_scalar(_ratio(numerator, denominator))


def scalar_div(value: Scalar, divisor: int) -> Scalar:
    """Exact division of a rational by a nonzero integer."""
    if type(value) is int:
        return normalize_scalar(_ratio(value, divisor))
    return normalize_scalar(value / divisor)


def scalar_pow(base: Scalar, exponent: int) -> Scalar:
    """Exact integer power of a rational; negative exponents allowed."""
    if exponent >= 0 and type(base) is int:
        return base**exponent
    return normalize_scalar(_ratio(base) ** exponent)


def scalar_recip(value: Scalar) -> Scalar:
    """Exact reciprocal of a nonzero rational."""
    if value == 0:
        raise ZeroDivisionError("reciprocal of zero")
    return normalize_scalar(1 / _ratio(value))


def monomial_text(prefix: str, exponents: MultiIndex) -> str:
    """Render an exponent tuple as ``x1^2*x3`` style text (1-based names)."""
    parts = []
    for i, e in enumerate(exponents):
        if e == 1:
            parts.append(f"{prefix}{i + 1}")
        elif e > 1:
            parts.append(f"{prefix}{i + 1}^{e}")
    return "*".join(parts)


def format_sum(parts: Iterable[tuple[Scalar, str]]) -> str:
    """Join (coefficient, monomial-text) pairs into a canonical sum.

    The first term carries its own sign; later terms are joined with
    `` + `` / `` - ``.  Unit coefficients are suppressed in front of a
    nonempty monomial.  An empty sequence renders as ``0``.
    """
    pieces: list[str] = []
    for coeff, mono in parts:
        negative = coeff < 0
        mag = -coeff if negative else coeff
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = str(mag)
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces) if pieces else "0"


def grlex_key(exponents: MultiIndex) -> tuple[int, MultiIndex]:
    """Graded lexicographic sort key (total degree first, then lex)."""
    return (sum(exponents), exponents)


def index_box(bounds: MultiIndex) -> Iterator[MultiIndex]:
    """All multi-indices componentwise at most ``bounds``."""
    return product(*(range(b + 1) for b in bounds))


def multi_binom(alpha: MultiIndex, gamma: MultiIndex) -> int:
    """Product of componentwise binomial coefficients."""
    w = 1
    for a, g in zip(alpha, gamma):
        w *= comb(a, g)
    return w


def _pack(exponents: Sequence[int]) -> int:
    key = 0
    for e in exponents:
        key = (key << _FIELD_BITS) | e
    return key


def _unpack(key: int, dim: int) -> MultiIndex:
    out = [0] * dim
    for i in range(dim - 1, -1, -1):
        out[i] = key & _FIELD_MASK
        key >>= _FIELD_BITS
    return tuple(out)


def _key_degree(key: int, dim: int) -> int:
    total = 0
    for _ in range(dim):
        total += key & _FIELD_MASK
        key >>= _FIELD_BITS
    return total


class Polynomial:
    """Sparse exact polynomial in a fixed number of variables.

    Instances are immutable and hashable; every operation returns a new
    polynomial in canonical form (no stored zero coefficients).  The zero
    polynomial is the empty term map and reports ``degree() is None``.
    """

    __slots__ = ("dim", "_terms", "_hash", "_partials")

    def __init__(self, dim: int, terms: Mapping[MultiIndex, int | Fraction] | None = None):
        if dim < 1:
            raise ValueError(f"dimension must be at least 1, got {dim}")
        clean: dict[int, Scalar] = {}
        if terms:
            for mono, coeff in terms.items():
                mono = tuple(mono)
                if len(mono) != dim or any(e < 0 or e > _MAX_EXPONENT for e in mono):
                    raise ValueError(f"bad exponent tuple {mono} for dimension {dim}")
                c = normalize_scalar(coeff)
                if c:
                    key = _pack(mono)
                    if key in clean:
                        raise ValueError(f"duplicate exponent tuple {mono}")
                    clean[key] = c
        self.dim = dim
        self._terms = clean
        self._hash: int | None = None
        self._partials: dict[int, "Polynomial"] | None = None

    @classmethod
    def _raw(cls, dim: int, terms: dict[int, Scalar]) -> "Polynomial":
        # Trusted constructor: packed keys, values clean and normalized.
        p = object.__new__(cls)
        p.dim = dim
        p._terms = terms
        p._hash = None
        p._partials = None
        return p

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls._raw(dim, {})

    @classmethod
    def one(cls, dim: int) -> "Polynomial":
        return cls._raw(dim, {0: 1})

    @classmethod
    def const(cls, dim: int, value: int | Fraction) -> "Polynomial":
        c = normalize_scalar(value)
        return cls._raw(dim, {0: c} if c else {})

    @classmethod
    def variable(cls, dim: int, var: int) -> "Polynomial":
        """The coordinate polynomial for variable ``var`` (0-based)."""
        if not 0 <= var < dim:
            raise IndexError(f"variable index {var} out of range for dimension {dim}")
        return cls._raw(dim, {1 << (_FIELD_BITS * (dim - 1 - var)): 1})

    @classmethod
    def monomial(cls, dim: int, exponents: Sequence[int], coeff: int | Fraction = 1) -> "Polynomial":
        return cls(dim, {tuple(exponents): coeff})

    def terms(self) -> Iterator[tuple[MultiIndex, Scalar]]:
        dim = self.dim
        for key, c in self._terms.items():
            yield _unpack(key, dim), c

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, exponents: Sequence[int]) -> Scalar:
        return self._terms.get(_pack(exponents), 0)

    def constant_term(self) -> Scalar:
        return self._terms.get(0, 0)

    def is_constant(self) -> bool:
        terms = self._terms
        return not terms or (len(terms) == 1 and 0 in terms)

    def degree(self) -> int | None:
        """Total degree, or ``None`` for the zero polynomial."""
        if not self._terms:
            return None
        dim = self.dim
        return max(_key_degree(key, dim) for key in self._terms)

    def variable_degrees(self) -> MultiIndex:
        """Per-variable maximum exponent (all zeros for the zero polynomial)."""
        degs = [0] * self.dim
        for mono, _ in self.terms():
            for i, e in enumerate(mono):
                if e > degs[i]:
                    degs[i] = e
        return tuple(degs)

    def _check_same_dim(self, other: "Polynomial") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __add__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        if type(other) is Polynomial:
            self._check_same_dim(other)
            terms = dict(self._terms)
            for key, c in other._terms.items():
                s = terms.get(key)
                if s is None:
                    terms[key] = c
                else:
                    s = s + c
                    if s:
                        terms[key] = s if type(s) is int else normalize_scalar(s)
                    else:
                        del terms[key]
            return Polynomial._raw(self.dim, terms)
        if isinstance(other, RATIONAL_TYPES):
            return self + Polynomial.const(self.dim, other)
        return NotImplemented

    def __radd__(self, other: "int | Fraction") -> "Polynomial":
        return self.__add__(other)

    def __sub__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        if isinstance(other, Polynomial):
            return self + (-other)
        if isinstance(other, RATIONAL_TYPES):
            return self + Polynomial.const(self.dim, -other)
        return NotImplemented

    def __rsub__(self, other: "int | Fraction") -> "Polynomial":
        return (-self).__add__(other)

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.dim, {k: -c for k, c in self._terms.items()})

    def __mul__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        if type(other) is Polynomial:
            self._check_same_dim(other)
            if not self._terms or not other._terms:
                return Polynomial._raw(self.dim, {})
            out: dict[int, Scalar] = {}
            get = out.get
            b_items = list(other._terms.items())
            for ka, ca in self._terms.items():
                for kb, cb in b_items:
                    key = ka + kb
                    c = ca * cb
                    s = get(key)
                    out[key] = c if s is None else s + c
            return Polynomial._raw(
                self.dim,
                {
                    k: (c if type(c) is int else normalize_scalar(c))
                    for k, c in out.items()
                    if c
                },
            )
        if isinstance(other, RATIONAL_TYPES):
            c = normalize_scalar(other)
            if not c:
                return Polynomial._raw(self.dim, {})
            terms: dict[int, Scalar] = {}
            for k, v in self._terms.items():
                s = v * c
                terms[k] = s if type(s) is int else normalize_scalar(s)
            return Polynomial._raw(self.dim, terms)
        return NotImplemented

    def __rmul__(self, other: "int | Fraction") -> "Polynomial":
        return self.__mul__(other)

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial exponents must be non-negative integers")
        result = Polynomial.one(self.dim)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def partial(self, var: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``var`` (0-based).

        Results are memoized on the (immutable) instance; derivative
        chains dominate operator composition, so repeat lookups are hot.
        """
        if not 0 <= var < self.dim:
            raise IndexError(f"variable index {var} out of range for dimension {self.dim}")
        cache = self._partials
        if cache is None:
            cache = {}
            self._partials = cache
        got = cache.get(var)
        if got is not None:
            return got
        shift = _FIELD_BITS * (self.dim - 1 - var)
        unit = 1 << shift
        terms: dict[int, Scalar] = {}
        for key, c in self._terms.items():
            e = (key >> shift) & _FIELD_MASK
            if e:
                terms[key - unit] = normalize_scalar(c * e)
        result = Polynomial._raw(self.dim, terms)
        cache[var] = result
        return result

    def partial_many(self, orders: Sequence[int]) -> "Polynomial":
        """Iterated partial derivative, one order entry per variable."""
        p = self
        for var, k in enumerate(orders):
            for _ in range(k):
                if not p:
                    return p
                p = p.partial(var)
        return p

    def substitute(self, values: Sequence["Polynomial"]) -> "Polynomial":
        """Evaluate at polynomial arguments, one per variable."""
        if len(values) != self.dim:
            raise ValueError(f"expected {self.dim} substitution values, got {len(values)}")
        target = values[0].dim if values else self.dim
        for v in values:
            if v.dim != target:
                raise ValueError("substitution values must share one dimension")
        if not self._terms:
            return Polynomial.zero(target)
        degs = self.variable_degrees()
        powers: list[list[Polynomial]] = []
        for i, v in enumerate(values):
            col = [Polynomial.one(target)]
            for _ in range(degs[i]):
                col.append(col[-1] * v)
            powers.append(col)
        out: dict[int, Scalar] = {}
        for mono, c in self.terms():
            term = Polynomial.const(target, c)
            for i, e in enumerate(mono):
                if e:
                    term = term * powers[i][e]
            for k, v in term._terms.items():
                s = out.get(k, 0) + v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return Polynomial._raw(
            target,
            {k: (c if type(c) is int else normalize_scalar(c)) for k, c in out.items() if c},
        )

    def evaluate(self, point: Sequence[int | Fraction]) -> Scalar:
        """Exact value at a rational point."""
        if len(point) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(point)}")
        values = [normalize_scalar(v) for v in point]
        total: Scalar = 0
        for mono, c in self.terms():
            term = c
            for e, v in zip(mono, values):
                if e:
                    term = term * v**e
            total = total + term
        return normalize_scalar(total)

    def sorted_terms(self) -> list[tuple[MultiIndex, Scalar]]:
        """Terms in descending graded-lex order (the canonical print order)."""
        return sorted(self.terms(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def __str__(self) -> str:
        return format_sum((c, monomial_text("x", m)) for m, c in self.sorted_terms())

    def __repr__(self) -> str:
        return f"Polynomial({self.dim}, '{self}')"


def _to_ratio_rows(matrix: Sequence[Sequence[int | Fraction]]) -> list[list]:
    return [[_ratio(entry) for entry in row] for row in matrix]


def _determinant(rows: list[list]) -> Scalar:
    n = len(rows)
    det = _ratio(1)
    m = [row[:] for row in rows]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return _ratio(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                factor = m[r][col] * inv
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


class AffineMap:
    """Invertible affine change of coordinates ``x -> A x + b``.

    Entries are exact rationals; the constructor rejects singular linear
    parts.  Pullback of a polynomial substitutes the component
    polynomials, so degrees are preserved exactly.

    Inverses, component polynomials and monomial pullbacks are memoized
    on the instance: maps are immutable and reused across many pullbacks
    by the operator and symbol layers.
    """

    __slots__ = (
        "dim",
        "matrix",
        "offset",
        "_hash",
        "_inverse",
        "_components",
        "_powers",
        "_mono_pullbacks",
        "__weakref__",
    )

    def __init__(
        self,
        matrix: Sequence[Sequence[int | Fraction]],
        offset: Sequence[int | Fraction],
    ):
        rows = tuple(tuple(normalize_scalar(e) for e in row) for row in matrix)
        n = len(rows)
        if n < 1 or any(len(row) != n for row in rows):
            raise ValueError("matrix must be square and non-empty")
        off = tuple(normalize_scalar(e) for e in offset)
        if len(off) != n:
            raise ValueError(f"offset length {len(off)} does not match dimension {n}")
        if _determinant(_to_ratio_rows(rows)) == 0:
            raise ValueError("linear part is singular")
        self.dim = n
        self.matrix = rows
        self.offset = off
        self._hash: int | None = None
        self._inverse: "AffineMap | None" = None
        self._components: tuple[Polynomial, ...] | None = None
        self._powers: list[list[Polynomial]] | None = None
        self._mono_pullbacks: dict[int, Polynomial] = {}

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(
            [[1 if i == j else 0 for j in range(dim)] for i in range(dim)],
            [0] * dim,
        )

    @classmethod
    def translation(cls, offset: Sequence[int | Fraction]) -> "AffineMap":
        dim = len(offset)
        return cls([[1 if i == j else 0 for j in range(dim)] for i in range(dim)], offset)

    def determinant(self) -> Scalar:
        return normalize_scalar(_determinant(_to_ratio_rows(self.matrix)))

    def compose(self, other: "AffineMap") -> "AffineMap":
        """The map ``self after other``: x -> self(other(x))."""
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        n = self.dim
        matrix = [
            [sum(self.matrix[i][k] * other.matrix[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)
        ]
        offset = [
            sum(self.matrix[i][k] * other.offset[k] for k in range(n)) + self.offset[i]
            for i in range(n)
        ]
        return AffineMap(matrix, offset)

    def inverse(self) -> "AffineMap":
        if self._inverse is not None:
            return self._inverse
        n = self.dim
        aug = [
            [_ratio(self.matrix[r][c]) for c in range(n)]
            + [_ratio(1 if c == r else 0) for c in range(n)]
            for r in range(n)
        ]
        for col in range(n):
            pivot = next(r for r in range(col, n) if aug[r][col])
            aug[col], aug[pivot] = aug[pivot], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [a * inv for a in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    factor = aug[r][col]
                    aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
        inv_matrix = [row[n:] for row in aug]
        inv_offset = [-sum(inv_matrix[r][c] * self.offset[c] for c in range(n)) for r in range(n)]
        result = AffineMap(inv_matrix, inv_offset)
        result._inverse = self
        self._inverse = result
        return result

    def component_polynomials(self) -> tuple[Polynomial, ...]:
        """The affine coordinate functions ``(A x + b)_i`` as polynomials."""
        if self._components is not None:
            return self._components
        comps = []
        for i in range(self.dim):
            terms: dict[MultiIndex, Scalar] = {}
            for j, a in enumerate(self.matrix[i]):
                if a:
                    terms[tuple(1 if k == j else 0 for k in range(self.dim))] = a
            if self.offset[i]:
                terms[(0,) * self.dim] = self.offset[i]
            comps.append(Polynomial(self.dim, terms))
        self._components = tuple(comps)
        return self._components

    def _component_power(self, var: int, exponent: int) -> Polynomial:
        if self._powers is None:
            self._powers = [[Polynomial.one(self.dim)] for _ in range(self.dim)]
        col = self._powers[var]
        if exponent >= len(col):
            comp = self.component_polynomials()[var]
            while exponent >= len(col):
                col.append(col[-1] * comp)
        return col[exponent]

    def pullback(self, p: Polynomial) -> Polynomial:
        """Return ``p`` composed with this map (substitute x -> A x + b)."""
        if p.dim != self.dim:
            raise ValueError(f"dimension mismatch: {p.dim} vs {self.dim}")
        memo = self._mono_pullbacks
        out: dict[int, Scalar] = {}
        dim = self.dim
        for key, c in p._terms.items():
            image = memo.get(key)
            if image is None:
                image = Polynomial.one(dim)
                for i, e in enumerate(_unpack(key, dim)):
                    if e:
                        image = image * self._component_power(i, e)
                memo[key] = image
            for k, v in image._terms.items():
                s = out.get(k, 0) + c * v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return Polynomial._raw(
            dim,
            {k: (c if type(c) is int else normalize_scalar(c)) for k, c in out.items() if c},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AffineMap):
            return NotImplemented
        return self.matrix == other.matrix and self.offset == other.offset

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.matrix, self.offset))
        return self._hash

    def __repr__(self) -> str:
        return f"AffineMap({self.matrix}, {self.offset})"


class OneForm:
    """A polynomial 1-form, one component per coordinate."""

    __slots__ = ("dim", "components", "_hash", "__weakref__")

    def __init__(self, components: Sequence[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a 1-form needs at least one component")
        dim = comps[0].dim
        if len(comps) != dim or any(c.dim != dim for c in comps):
            raise ValueError("need exactly one component per variable, all of one dimension")
        self.dim = dim
        self.components = comps
        self._hash: int | None = None

    @classmethod
    def zero(cls, dim: int) -> "OneForm":
        return cls([Polynomial.zero(dim)] * dim)

    def __bool__(self) -> bool:
        return any(self.components)

    def is_closed(self) -> bool:
        """True iff all cross derivatives match: d(omega) = 0."""
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                if self.components[i].partial(j) != self.components[j].partial(i):
                    return False
        return True

    def potential(self) -> Polynomial:
        """A polynomial ``f`` with ``df`` equal to this (closed) form and f(0)=0.

        Built by radial integration: a monomial ``m`` of total degree
        ``d`` in component ``i`` contributes ``x_i * m / (d + 1)``.
        Raises ``ValueError`` on non-closed input.
        """
        if not self.is_closed():
            raise ValueError("one-form is not closed")
        dim = self.dim
        terms: dict[int, Scalar] = {}
        for i, comp in enumerate(self.components):
            unit = 1 << (_FIELD_BITS * (dim - 1 - i))
            for key, c in comp._terms.items():
                d = _key_degree(key, dim)
                raised = key + unit
                add = scalar_div(c, d + 1)
                s = terms.get(raised)
                if s is None:
                    terms[raised] = add
                else:
                    s = s + add
                    if s:
                        terms[raised] = normalize_scalar(s)
                    else:
                        del terms[raised]
        return Polynomial._raw(dim, terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OneForm):
            return NotImplemented
        return self.components == other.components

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.components)
        return self._hash

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self) -> str:
        return f"OneForm{self}"


def differential(f: Polynomial) -> OneForm:
    """The exact 1-form ``df``."""
    return OneForm([f.partial(i) for i in range(f.dim)])

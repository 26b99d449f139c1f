"""Expression parser and evaluators for the operator and symbol grammars.

Grammar (products are noncommutative and keep their written order)::

    expr   := ('+'|'-')? term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' nat)?
    atom   := rational | x<k> | d<k> | xi<k> | '(' expr ')'

Rational literals are ``p`` or ``p/q``.  Operator expressions use base
variables ``x1..xn`` and derivations ``d1..dn``; symbol expressions use
``x1..xn`` and fiber variables ``xi1..xin``.  The optional leading sign
exists so every canonical printed form parses back.

``normalize`` evaluates an operator expression into the unique
normal-ordered form; ``evaluate_action`` applies the expression to a
polynomial directly, factor by factor, without ever composing
operators, which makes it an independent cross-check on ``normalize``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from .operators import DiffOp, compose
from .poly import Polynomial, Scalar, make_ratio
from .symbols import PhaseSymbol


class ParseError(ValueError):
    """Syntax or validity error, carrying the offset into the source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass(frozen=True)
class Num:
    value: Scalar


@dataclass(frozen=True)
class Var:
    index: int  # 0-based


@dataclass(frozen=True)
class Der:
    index: int


@dataclass(frozen=True)
class Fiber:
    index: int


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Add:
    # (sign, node) pairs; sign is +1 or -1
    terms: tuple


Expression = Num | Var | Der | Fiber | Mul | Pow | Add

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\s*/\s*\d+)?)|(?P<name>xi\d+|x\d+|d\d+)|(?P<op>[-+*^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        for kind in ("number", "name", "op"):
            value = match.group(kind)
            if value is not None:
                tokens.append(_Token(kind, value, match.start(kind)))
                break
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int, mode: str):
        if dim < 1:
            raise ValueError(f"dimension must be at least 1, got {dim}")
        if mode not in ("operator", "symbol", "polynomial"):
            raise ValueError(f"unknown grammar mode {mode!r}")
        self.tokens = _tokenize(text)
        self.dim = dim
        self.mode = mode
        self.cursor = 0

    def peek(self) -> _Token:
        return self.tokens[self.cursor]

    def advance(self) -> _Token:
        token = self.tokens[self.cursor]
        self.cursor += 1
        return token

    def expect_op(self, symbol: str) -> None:
        token = self.peek()
        if token.kind != "op" or token.text != symbol:
            raise ParseError(f"expected {symbol!r}", token.position)
        self.advance()

    def parse(self) -> Expression:
        expr = self.expr()
        token = self.peek()
        if token.kind != "end":
            raise ParseError(f"unexpected trailing input {token.text!r}", token.position)
        return expr

    def expr(self) -> Expression:
        terms = []
        sign = 1
        token = self.peek()
        if token.kind == "op" and token.text in "+-":
            self.advance()
            sign = -1 if token.text == "-" else 1
        terms.append((sign, self.term()))
        while True:
            token = self.peek()
            if token.kind == "op" and token.text in "+-":
                self.advance()
                terms.append((-1 if token.text == "-" else 1, self.term()))
            else:
                break
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Add(tuple(terms))

    def term(self) -> Expression:
        factors = [self.factor()]
        while True:
            token = self.peek()
            if token.kind == "op" and token.text == "*":
                self.advance()
                factors.append(self.factor())
            else:
                break
        if len(factors) == 1:
            return factors[0]
        return Mul(tuple(factors))

    def factor(self) -> Expression:
        base = self.atom()
        token = self.peek()
        if token.kind == "op" and token.text == "^":
            self.advance()
            exp_token = self.peek()
            if exp_token.kind != "number" or "/" in exp_token.text:
                raise ParseError("expected a non-negative integer exponent", exp_token.position)
            self.advance()
            return Pow(base, int(exp_token.text))
        return base

    def atom(self) -> Expression:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            if "/" in token.text:
                num, den = token.text.split("/")
                if int(den) == 0:
                    raise ParseError("zero denominator", token.position)
                return Num(make_ratio(int(num), int(den)))
            return Num(int(token.text))
        if token.kind == "name":
            self.advance()
            return self.make_name(token)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError("expected a rational, a variable, or '('", token.position)

    def make_name(self, token: _Token) -> Expression:
        text = token.text
        if text.startswith("xi"):
            kind, index = "xi", int(text[2:])
        elif text.startswith("x"):
            kind, index = "x", int(text[1:])
        else:
            kind, index = "d", int(text[1:])
        if not 1 <= index <= self.dim:
            raise ParseError(
                f"index of {text!r} out of range for dimension {self.dim}", token.position
            )
        if kind == "x":
            return Var(index - 1)
        if kind == "d":
            if self.mode != "operator":
                raise ParseError(f"derivation {text!r} not allowed here", token.position)
            return Der(index - 1)
        if self.mode != "symbol":
            raise ParseError(f"fiber variable {text!r} not allowed here", token.position)
        return Fiber(index - 1)


def parse_expression(text: str, dim: int, mode: str = "operator") -> Expression:
    """Parse source text into an expression tree for the given grammar mode."""
    return _Parser(text, dim, mode).parse()


def _eval(expr: Expression, dim: int, atom_factory) -> object:
    if isinstance(expr, Num):
        return atom_factory["num"](expr.value)
    if isinstance(expr, Var):
        return atom_factory["var"](expr.index)
    if isinstance(expr, Der):
        return atom_factory["der"](expr.index)
    if isinstance(expr, Fiber):
        return atom_factory["fiber"](expr.index)
    if isinstance(expr, Pow):
        base = _eval(expr.base, dim, atom_factory)
        result = atom_factory["num"](1)
        for _ in range(expr.exponent):
            result = atom_factory["mul"](result, base)
        return result
    if isinstance(expr, Mul):
        values = [_eval(f, dim, atom_factory) for f in expr.factors]
        result = values[0]
        for v in values[1:]:
            result = atom_factory["mul"](result, v)
        return result
    if isinstance(expr, Add):
        total = atom_factory["num"](0)
        for sign, node in expr.terms:
            value = _eval(node, dim, atom_factory)
            total = total + (value if sign > 0 else -value)
        return total
    raise TypeError(f"not an expression node: {expr!r}")


def normalize(expr: Expression, dim: int) -> DiffOp:
    """Evaluate an operator expression into normal-ordered form."""
    factory = {
        "num": lambda c: DiffOp.const(dim, c),
        "var": lambda i: DiffOp.from_poly(Polynomial.variable(dim, i)),
        "der": lambda i: DiffOp.partial(dim, i),
        "fiber": lambda i: _reject_fiber(),
        "mul": compose,
    }
    return _eval(expr, dim, factory)


def _reject_fiber():
    raise ValueError("fiber variables are not operators")


def evaluate_symbol(expr: Expression, dim: int) -> PhaseSymbol:
    """Evaluate a symbol expression in the commutative phase algebra."""
    factory = {
        "num": lambda c: PhaseSymbol.const(dim, c),
        "var": lambda i: PhaseSymbol.from_poly(Polynomial.variable(dim, i)),
        "der": lambda i: _reject_der(),
        "fiber": lambda i: PhaseSymbol.fiber(dim, i),
        "mul": lambda a, b: a * b,
    }
    return _eval(expr, dim, factory)


def _reject_der():
    raise ValueError("derivations are not symbols")


def evaluate_polynomial(expr: Expression, dim: int) -> Polynomial:
    """Evaluate an expression containing only rationals and base variables."""
    factory = {
        "num": lambda c: Polynomial.const(dim, c),
        "var": lambda i: Polynomial.variable(dim, i),
        "der": lambda i: _reject_der_poly(),
        "fiber": lambda i: _reject_fiber_poly(),
        "mul": lambda a, b: a * b,
    }
    return _eval(expr, dim, factory)


def _reject_der_poly():
    raise ValueError("derivations are not allowed in a polynomial")


def _reject_fiber_poly():
    raise ValueError("fiber variables are not allowed in a polynomial")


def evaluate_action(expr: Expression, f: Polynomial) -> Polynomial:
    """Apply an operator expression to ``f`` without composing operators.

    Sums act termwise, products apply right-to-left, a rational scales,
    ``x<k>`` multiplies and ``d<k>`` differentiates.  This is the
    independent oracle for :func:`normalize`.
    """
    dim = f.dim
    if isinstance(expr, Num):
        return f * expr.value
    if isinstance(expr, Var):
        return Polynomial.variable(dim, expr.index) * f
    if isinstance(expr, Der):
        return f.partial(expr.index)
    if isinstance(expr, Fiber):
        raise ValueError("fiber variables are not operators")
    if isinstance(expr, Pow):
        result = f
        for _ in range(expr.exponent):
            result = evaluate_action(expr.base, result)
        return result
    if isinstance(expr, Mul):
        result = f
        for node in reversed(expr.factors):
            result = evaluate_action(node, result)
        return result
    if isinstance(expr, Add):
        total = Polynomial.zero(dim)
        for sign, node in expr.terms:
            value = evaluate_action(node, f)
            total = total + (value if sign > 0 else -value)
        return total
    raise TypeError(f"not an expression node: {expr!r}")


def parse_operator(text: str, dim: int) -> DiffOp:
    return normalize(parse_expression(text, dim, "operator"), dim)


def parse_symbol(text: str, dim: int) -> PhaseSymbol:
    return evaluate_symbol(parse_expression(text, dim, "symbol"), dim)


def parse_polynomial(text: str, dim: int) -> Polynomial:
    return evaluate_polynomial(parse_expression(text, dim, "polynomial"), dim)

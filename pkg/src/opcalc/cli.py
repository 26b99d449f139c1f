"""Command-line interface: parse, compute, print, verify.

Every subcommand parses its operands, calls one library operation
family, and prints the canonical text form (or a suite report).
``--json`` switches to a single machine-readable record.  Exit codes:
0 on success or a passing verification, 1 on verification failure, 2 on
usage or parse errors.  An operand of ``-`` is read from stdin.
"""

from __future__ import annotations

import argparse
import json
import sys

from .automorphisms import (
    D1AutoSpec,
    DAutoSpec,
    SAutoSpec,
    d1_apply_op,
    d_apply,
    extract_d1_params,
    s_apply,
)
from .operators import (
    ad_nilpotency_witness,
    commutator,
    compose,
    conjugation,
    divergence,
    formal_adjoint,
)
from .parser import parse_operator, parse_polynomial, parse_symbol
from .poly import OneForm
from .sampling import Bounds
from .specfile import format_auto_spec, parse_auto_spec
from .suites import SUITE_NAMES, run_suites
from .symbols import poisson_bracket, principal_symbol, total_symbol


def _add_dim(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("-n", "--dim", type=int, default=1, help="ambient dimension (1..8)")


def _add_json(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--json", action="store_true", help="emit one JSON record")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opcalc",
        description="Exact calculus for polynomial-coefficient differential operators, "
        "their symbols, and the automorphisms of both algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, count, description in (
        ("bracket", 2, "commutator of two operators"),
        ("compose", 2, "normal-ordered composition of two operators"),
        ("order", 1, "filtration order of an operator"),
        ("symbol", 1, "total symbol of an operator"),
        ("psymbol", 1, "principal symbol of an operator"),
        ("adjoint", 1, "formal adjoint for the standard volume"),
        ("conjugate", 1, "minus the formal adjoint"),
        ("divergence", 1, "divergence of a vector field"),
    ):
        p = sub.add_parser(name, help=description)
        _add_dim(p)
        _add_json(p)
        p.add_argument("operand", nargs=count, help="operator expression ('-' reads stdin)")
        if name == "psymbol":
            p.add_argument("--grade", type=int, default=None, help="explicit symbol grade")

    p = sub.add_parser("poisson", help="Poisson bracket of two symbols")
    _add_dim(p)
    _add_json(p)
    p.add_argument("operand", nargs=2, help="symbol expression ('-' reads stdin)")

    p = sub.add_parser("nilpotency", help="least vanishing power of the adjoint action")
    _add_dim(p)
    _add_json(p)
    p.add_argument("--op", required=True, help="operator expression")
    p.add_argument("--fn", required=True, help="polynomial to start from")
    p.add_argument("--max", type=int, default=16, help="search bound")

    p = sub.add_parser("potential", help="primitive of a closed 1-form")
    _add_dim(p)
    _add_json(p)
    p.add_argument("component", nargs="+", help="polynomial components of the form")

    p = sub.add_parser("apply-auto", help="apply an automorphism described by a spec file")
    _add_dim(p)
    _add_json(p)
    p.add_argument("--spec", required=True, help="path to the parameter file")
    p.add_argument("operand", help="operator (d1/d family) or symbol (s family)")

    p = sub.add_parser("extract-d1", help="recover first-order family parameters")
    _add_json(p)
    p.add_argument("--spec", required=True, help="parameter file defining the map")

    p = sub.add_parser("verify", help="run a verification suite")
    _add_json(p)
    p.add_argument("suite", choices=(*SUITE_NAMES, "all"))
    p.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    p.add_argument("--max-dim", type=int, default=3)
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--coeff-bound", type=int, default=9)
    p.add_argument("--cases", type=int, default=None, help="override per-block case counts")
    return parser


def _read_operand(text: str) -> str:
    if text == "-":
        return sys.stdin.read().strip()
    return text


def _check_dim(dim: int) -> None:
    if not 1 <= dim <= 8:
        raise ValueError(f"dimension must be in 1..8, got {dim}")


def _emit(args, result: str | int | None, inputs: dict, seed: int | None = None) -> None:
    if getattr(args, "json", False):
        record = {"command": args.command, "inputs": inputs, "result": result, "seed": seed}
        print(json.dumps(record))
    else:
        print("none" if result is None else result)


def _run_computation(args) -> int:
    command = args.command
    if command in ("bracket", "compose", "order", "symbol", "psymbol", "adjoint",
                   "conjugate", "divergence"):
        _check_dim(args.dim)
        texts = [_read_operand(t) for t in args.operand]
        ops = [parse_operator(t, args.dim) for t in texts]
        inputs = {"dim": args.dim, "operands": texts}
        if command == "bracket":
            result: str | int | None = str(commutator(ops[0], ops[1]))
        elif command == "compose":
            result = str(compose(ops[0], ops[1]))
        elif command == "order":
            result = ops[0].order()
        elif command == "symbol":
            result = str(total_symbol(ops[0]))
        elif command == "psymbol":
            inputs["grade"] = args.grade
            result = str(principal_symbol(ops[0], args.grade))
        elif command == "adjoint":
            result = str(formal_adjoint(ops[0]))
        elif command == "conjugate":
            result = str(conjugation(ops[0]))
        else:
            result = str(divergence(ops[0]))
        _emit(args, result, inputs)
        return 0

    if command == "poisson":
        _check_dim(args.dim)
        texts = [_read_operand(t) for t in args.operand]
        p, q = (parse_symbol(t, args.dim) for t in texts)
        _emit(args, str(poisson_bracket(p, q)), {"dim": args.dim, "operands": texts})
        return 0

    if command == "nilpotency":
        _check_dim(args.dim)
        op = parse_operator(_read_operand(args.op), args.dim)
        fn = parse_polynomial(_read_operand(args.fn), args.dim)
        witness = ad_nilpotency_witness(op, fn, args.max)
        _emit(args, witness, {"dim": args.dim, "op": args.op, "fn": args.fn, "max": args.max})
        return 0

    if command == "potential":
        _check_dim(args.dim)
        if len(args.component) != args.dim:
            raise ValueError(
                f"expected {args.dim} components, got {len(args.component)}"
            )
        omega = OneForm([parse_polynomial(_read_operand(t), args.dim) for t in args.component])
        _emit(args, str(omega.potential()), {"dim": args.dim, "components": args.component})
        return 0

    if command == "apply-auto":
        with open(args.spec, encoding="utf-8") as handle:
            spec = parse_auto_spec(handle.read())
        text = _read_operand(args.operand)
        inputs = {"spec": args.spec, "operand": text, "dim": spec.dim}
        if isinstance(spec, SAutoSpec):
            result = str(s_apply(spec, parse_symbol(text, spec.dim)))
        elif isinstance(spec, D1AutoSpec):
            result = str(d1_apply_op(spec, parse_operator(text, spec.dim)))
        else:
            assert isinstance(spec, DAutoSpec)
            result = str(d_apply(spec, parse_operator(text, spec.dim)))
        _emit(args, result, inputs)
        return 0

    if command == "extract-d1":
        with open(args.spec, encoding="utf-8") as handle:
            spec = parse_auto_spec(handle.read())
        if not isinstance(spec, D1AutoSpec):
            raise ValueError("extract-d1 needs a d1 family spec file")
        recovered = extract_d1_params(lambda op: d1_apply_op(spec, op), spec.dim)
        text = format_auto_spec(recovered)
        if args.json:
            print(json.dumps({
                "command": args.command,
                "inputs": {"spec": args.spec},
                "result": text,
                "seed": None,
            }))
        else:
            print(text, end="")
        return 0

    raise ValueError(f"unhandled command {command!r}")


def _run_verify(args) -> int:
    bounds = Bounds(
        max_dim=args.max_dim,
        max_order=args.max_order,
        max_degree=args.max_degree,
        coeff_bound=args.coeff_bound,
        cases=args.cases,
    )
    reports = run_suites([args.suite], seed=args.seed, bounds=bounds)
    passed = all(r.passed for r in reports)
    if args.json:
        record = {
            "command": "verify",
            "inputs": {"suite": args.suite, "bounds": vars(bounds) | {}},
            "report": [r.to_dict() for r in reports],
            "seed": args.seed,
        }
        print(json.dumps(record))
    else:
        for report in reports:
            print(report.summary())
            for failure in report.failures:
                print(f"  counterexample: {failure}")
        total = sum(r.cases for r in reports)
        seconds = sum(r.seconds for r in reports)
        status = "pass" if passed else "FAIL"
        print(f"total: {status}, {total} cases, {seconds:.2f}s, seed {args.seed}")
    return 0 if passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        return _run_computation(args)
    except (ValueError, OSError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())

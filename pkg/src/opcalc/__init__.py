"""Exact calculus for polynomial-coefficient differential operators.

The package implements, over exact rational arithmetic:

* the commutative base algebra of multivariate polynomials, with affine
  substitution, 1-forms, and primitives of closed forms;
* the filtered algebra of normal-ordered differential operators, with
  composition, commutators, adjoints, filtration probes and divergence;
* the graded algebra of phase-space symbols with the canonical Poisson
  bracket, symbol/quantization maps and grade scalings;
* constructors, verifiers and parameter extraction for the classified
  automorphism families of all three algebras;
* an expression grammar, canonical printer, CLI and seeded verification
  suites.
"""

from .automorphisms import (
    CheckReport,
    D1AutoSpec,
    DAutoSpec,
    SAutoSpec,
    d1_apply,
    d1_apply_op,
    d_apply,
    exp_omega,
    extract_d1_params,
    omega_of_field,
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
    grothendieck_member,
    is_vector_field,
    left_mult,
    right_mult,
    split_first_order,
)
from .parser import (
    ParseError,
    evaluate_action,
    normalize,
    parse_expression,
    parse_operator,
    parse_polynomial,
    parse_symbol,
)
from .poly import AffineMap, OneForm, Polynomial, differential
from .sampling import Bounds
from .specfile import format_auto_spec, parse_auto_spec
from .suites import SUITE_NAMES, SuiteReport, run_suites, run_verification_suite
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
    vertical_translation,
)

__version__ = "0.1.0"

"""Flat key/value serialization of automorphism parameter records.

The format is line oriented: ``key = value`` with ``#`` comments.  The
``family`` key selects the record type (``d1``, ``d`` or ``s``), ``dim``
fixes the dimension, 1-form components are polynomial text under
``omega.<i>``, and the base map is given row-wise under ``phi.row.<i>``
plus ``phi.offset``.  All rational literals are exact ``p/q`` text.

Example::

    family = d1
    dim = 2
    kappa = -3/2
    lambda = 2
    omega.1 = 2*x1*x2^2
    omega.2 = 2*x1^2*x2
    phi.row.1 = 1 0
    phi.row.2 = 1 1
    phi.offset = 1/2 -1
"""

from __future__ import annotations

from .automorphisms import D1AutoSpec, DAutoSpec, SAutoSpec
from .parser import parse_polynomial
from .poly import AffineMap, OneForm, parse_scalar

AutoSpec = D1AutoSpec | DAutoSpec | SAutoSpec


def format_auto_spec(spec: AutoSpec) -> str:
    lines = []
    if isinstance(spec, D1AutoSpec):
        lines.append("family = d1")
        lines.append(f"dim = {spec.dim}")
        lines.append(f"kappa = {spec.kappa}")
        lines.append(f"lambda = {spec.lam}")
    elif isinstance(spec, DAutoSpec):
        lines.append("family = d")
        lines.append(f"dim = {spec.dim}")
        lines.append(f"a = {spec.a}")
    elif isinstance(spec, SAutoSpec):
        lines.append("family = s")
        lines.append(f"dim = {spec.dim}")
        lines.append(f"kappa = {spec.kappa}")
    else:
        raise TypeError(f"not an automorphism record: {spec!r}")
    for i, component in enumerate(spec.omega.components):
        lines.append(f"omega.{i + 1} = {component}")
    for i, row in enumerate(spec.phi.matrix):
        lines.append(f"phi.row.{i + 1} = " + " ".join(str(e) for e in row))
    lines.append("phi.offset = " + " ".join(str(e) for e in spec.phi.offset))
    return "\n".join(lines) + "\n"


def _parse_entries(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in entries:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value.strip()
    return entries


def _take(entries: dict[str, str], key: str) -> str:
    try:
        return entries.pop(key)
    except KeyError:
        raise ValueError(f"missing key {key!r}") from None


def parse_auto_spec(text: str) -> AutoSpec:
    entries = _parse_entries(text)
    family = _take(entries, "family")
    dim = int(_take(entries, "dim"))
    if not 1 <= dim <= 8:
        raise ValueError(f"dimension must be in 1..8, got {dim}")

    omega = OneForm(
        [parse_polynomial(_take(entries, f"omega.{i + 1}"), dim) for i in range(dim)]
    )
    rows = [
        [parse_scalar(cell) for cell in _take(entries, f"phi.row.{i + 1}").split()]
        for i in range(dim)
    ]
    offset = [parse_scalar(cell) for cell in _take(entries, "phi.offset").split()]
    if any(len(row) != dim for row in rows) or len(offset) != dim:
        raise ValueError("matrix rows and offset must have one entry per variable")
    phi = AffineMap(rows, offset)

    if family == "d1":
        spec: AutoSpec = D1AutoSpec(
            kappa=parse_scalar(_take(entries, "kappa")),
            lam=parse_scalar(_take(entries, "lambda")),
            omega=omega,
            phi=phi,
        )
    elif family == "d":
        spec = DAutoSpec(phi=phi, a=int(_take(entries, "a")), omega=omega)
    elif family == "s":
        spec = SAutoSpec(kappa=parse_scalar(_take(entries, "kappa")), phi=phi, omega=omega)
    else:
        raise ValueError(f"unknown family {family!r}")
    if entries:
        raise ValueError(f"unexpected keys: {', '.join(sorted(entries))}")
    return spec

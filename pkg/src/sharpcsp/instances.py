"""CSP instances and the exhaustive counting oracle.

An instance is a list of variables plus constraints (relation name and
scope).  Counting enumerates all 2^n assignments; the enumeration is
carried out bit-parallel, with one big-integer bit per assignment, so
that the oracle stays trustworthy (it literally evaluates every
assignment) without being uselessly slow.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple

from .errors import ParseError, PreconditionError, ResourceLimitError, UnknownNameError
from .relations import (
    BUILTINS,
    ConstraintLanguage,
    Relation,
    parse_language,
    serialize_language,
    strip_comment,
    tuple_bit,
)

DEFAULT_BRUTE_CAP = 24


class Constraint(NamedTuple):
    relation: str
    scope: tuple[str, ...]


@dataclass(frozen=True)
class Instance:
    """Variables plus constraints over a constraint language.

    Scopes may repeat variables.  Variables never mentioned by any
    constraint still count: assignments are functions on the full
    variable list, so each contributes a factor 2.
    """

    language: ConstraintLanguage
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        seen = set()
        for v in self.variables:
            if v in seen:
                raise PreconditionError(f"duplicate variable {v!r}")
            seen.add(v)
        for c in self.constraints:
            rel = self.language.resolve(c.relation)
            if len(c.scope) != rel.arity:
                raise PreconditionError(
                    f"constraint {c.relation} expects {rel.arity} variables, got {len(c.scope)}"
                )
            for v in c.scope:
                if v not in seen:
                    raise PreconditionError(f"undeclared variable {v!r} in constraint scope")

    def relation_of(self, c: Constraint) -> Relation:
        return self.language.resolve(c.relation)

    def used_relations(self) -> tuple[tuple[str, Relation], ...]:
        """(name, relation) pairs actually referenced by constraints, in first-use order."""
        out: list[tuple[str, Relation]] = []
        seen: set[str] = set()
        for c in self.constraints:
            if c.relation not in seen:
                seen.add(c.relation)
                out.append((c.relation, self.relation_of(c)))
        return tuple(out)

    def var_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}


def satisfies(inst: Instance, assignment: Mapping[str, int]) -> bool:
    """True iff every constraint's scope tuple lies in its relation."""
    for v in inst.variables:
        if v not in assignment:
            raise PreconditionError(f"assignment is missing variable {v!r}")
    for c in inst.constraints:
        rel = inst.relation_of(c)
        t = 0
        for v in c.scope:
            t = (t << 1) | (assignment[v] & 1)
        if t not in rel:
            return False
    return True


def assignments(inst: Instance) -> Iterator[dict[str, int]]:
    """All 2^n assignments, in ascending order of the variable bit pattern."""
    n = len(inst.variables)
    for code in range(1 << n):
        yield {v: (code >> i) & 1 for i, v in enumerate(inst.variables)}


def _variable_columns(n: int) -> list[int]:
    """Bit-parallel truth columns: column i has bit a set iff bit i of a is set."""
    cols = []
    for i in range(n):
        block = ((1 << (1 << i)) - 1) << (1 << i)
        width = 1 << (i + 1)
        while width < (1 << n):
            block |= block << width
            width <<= 1
        cols.append(block)
    return cols


def _constraint_mask(rel: Relation, scope_idx: tuple[int, ...], cols: list[int], full: int) -> int:
    mask = 0
    k = rel.arity
    for t in rel.tuples():
        term = full
        for pos in range(1, k + 1):
            col = cols[scope_idx[pos - 1]]
            term &= col if tuple_bit(t, k, pos) else full ^ col
            if not term:
                break
        mask |= term
    return mask


def brute_force_count(inst: Instance, cap: int = DEFAULT_BRUTE_CAP) -> int:
    """Exact satisfying-assignment count by enumeration of all 2^n assignments."""
    n = len(inst.variables)
    if n > cap:
        raise ResourceLimitError(f"{n} variables exceed the enumeration cap of {cap}")
    full = (1 << (1 << n)) - 1
    cols = _variable_columns(n)
    index = inst.var_index()
    sat = full
    for c in inst.constraints:
        scope_idx = tuple(index[v] for v in c.scope)
        sat &= _constraint_mask(inst.relation_of(c), scope_idx, cols, full)
        if not sat:
            return 0
    return sat.bit_count()


def _delta_value(rel: Relation) -> int | None:
    """0 or 1 when rel is the corresponding one-tuple unary pin, else None."""
    if rel == BUILTINS["delta0"]:
        return 0
    if rel == BUILTINS["delta1"]:
        return 1
    return None


def pinned_vars(inst: Instance, value: int) -> set[str]:
    """Variables carrying a direct unary pin to value; no propagation."""
    if value not in (0, 1):
        raise PreconditionError("pin value must be 0 or 1")
    out = set()
    for c in inst.constraints:
        if _delta_value(inst.relation_of(c)) == value:
            out.add(c.scope[0])
    return out


def implication_edges(inst: Instance) -> list[tuple[str, str]]:
    """(u, v) pairs from binary constraints whose table is the implication."""
    edges = []
    for c in inst.constraints:
        rel = inst.relation_of(c)
        if rel == BUILTINS["IMPLIES"]:
            edges.append((c.scope[0], c.scope[1]))
    return edges


def is_atomic(inst: Instance) -> bool:
    """True iff every constraint is a unary pin or an implication, by table."""
    for c in inst.constraints:
        rel = inst.relation_of(c)
        if _delta_value(rel) is None and rel != BUILTINS["IMPLIES"]:
            return False
    return True


def reachability(variables: tuple[str, ...], edges: list[tuple[str, str]]) -> dict[str, set[str]]:
    """Reflexive-transitive closure of the implication digraph."""
    reach = {v: {v} for v in variables}
    changed = True
    while changed:
        changed = False
        for u, v in edges:
            new = reach[v] - reach[u]
            if new:
                reach[u] |= new
                changed = True
    return reach


def forced_vars(inst: Instance) -> tuple[set[str], set[str]]:
    """(N0, N1): variables forced to 0 / to 1 in every satisfying assignment.

    A variable is forced to 0 if it carries a zero-pin or reaches one
    forward along the implication closure; forced to 1 if it carries a
    one-pin or is reached from one.  Requires an atomic instance.
    """
    if not is_atomic(inst):
        raise PreconditionError("forced_vars requires pins and implications only")
    reach = reachability(inst.variables, implication_edges(inst))
    zeros = pinned_vars(inst, 0)
    ones = pinned_vars(inst, 1)
    n0 = {v for v in inst.variables if reach[v] & zeros}
    n1 = {v for v in inst.variables if any(v in reach[u] for u in ones)}
    return n0, n1


# ---------------------------------------------------------------------------
# Text format.


def parse_instance(text: str, base_dir: str | Path | None = None,
                   language: ConstraintLanguage | None = None) -> Instance:
    """Parse the instance format:

        language <path>            # optional; built-ins always available
        vars <name> <name> ...     # one or more lines
        constraint <REL> <v1> ... <vk>

    '#' starts a comment.  A ``language`` line loads relation blocks from
    the named file, resolved against base_dir; inline ``relation`` blocks
    (as in the language format) are also accepted, which keeps emitted
    instances self-contained.
    """
    lang = language
    variables: list[str] = []
    var_set: set[str] = set()
    raw_constraints: list[tuple[int, str, tuple[str, ...]]] = []
    lines = text.splitlines()
    idx = 0
    while idx < len(lines):
        lineno = idx + 1
        line = strip_comment(lines[idx])
        idx += 1
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "relation":
            block = [lines[idx - 1]]
            closed = False
            while idx < len(lines):
                body = strip_comment(lines[idx])
                block.append(lines[idx])
                idx += 1
                if body == "end":
                    closed = True
                    break
            if not closed:
                raise ParseError("relation block not closed by 'end'", lineno)
            block_lang = parse_language("\n".join(block))
            lang = block_lang if lang is None else lang.merged(block_lang)
        elif head == "language":
            if len(parts) != 2:
                raise ParseError("expected 'language <path>'", lineno)
            path = Path(parts[1])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            try:
                file_lang = parse_language(path.read_text(encoding="utf-8"))
            except OSError as exc:
                raise ParseError(f"cannot read language file: {exc}", lineno) from None
            lang = file_lang if lang is None else lang.merged(file_lang)
        elif head == "vars":
            if len(parts) < 2:
                raise ParseError("expected 'vars <name> ...'", lineno)
            for v in parts[1:]:
                if v in var_set:
                    raise ParseError(f"duplicate variable {v!r}", lineno)
                var_set.add(v)
                variables.append(v)
        elif head == "constraint":
            if len(parts) < 2:
                raise ParseError("expected 'constraint <REL> <v1> ...'", lineno)
            raw_constraints.append((lineno, parts[1], tuple(parts[2:])))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)

    if lang is None:
        lang = ConstraintLanguage(tuple(BUILTINS.items()))
    else:
        lang = lang.merged(ConstraintLanguage(tuple(BUILTINS.items())))
    constraints = []
    for lineno, rel_name, scope in raw_constraints:
        try:
            rel = lang.resolve(rel_name)
        except UnknownNameError:
            raise UnknownNameError(f"unknown relation {rel_name!r}", lineno) from None
        if len(scope) != rel.arity:
            raise ParseError(
                f"constraint {rel_name} expects {rel.arity} variables, got {len(scope)}", lineno
            )
        for v in scope:
            if v not in var_set:
                raise ParseError(f"undeclared variable {v!r}", lineno)
        constraints.append(Constraint(rel_name, scope))
    return Instance(lang, tuple(variables), tuple(constraints))


def serialize_instance(inst: Instance, include_language: bool = False) -> str:
    """Emit an instance in the text format.

    With include_language, non-built-in relations used by the constraints
    are emitted inline as relation blocks so the output is self-contained.
    """
    out = []
    if include_language:
        extra = [(n, r) for n, r in inst.used_relations() if n not in BUILTINS]
        if extra:
            out.append(serialize_language(ConstraintLanguage(tuple(extra))).rstrip("\n"))
    for i in range(0, len(inst.variables), 12):
        out.append("vars " + " ".join(inst.variables[i : i + 12]))
    for c in inst.constraints:
        out.append(f"constraint {c.relation} " + " ".join(c.scope))
    return "\n".join(out) + "\n"


class NameAllocator:
    """Deterministic fresh-name source avoiding a set of taken names."""

    def __init__(self, taken: set[str] | None = None):
        self.taken = set(taken or ())

    def claim(self, name: str) -> str:
        self.taken.add(name)
        return name

    def fresh(self, base: str) -> str:
        if base not in self.taken:
            return self.claim(base)
        k = 2
        while f"{base}_{k}" in self.taken:
            k += 1
        return self.claim(f"{base}_{k}")

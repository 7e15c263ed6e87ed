"""Boolean relations as bitset truth tables.

A k-ary tuple (x1, ..., xk) is encoded as a k-bit integer with x1 in the
most significant position, so integer order coincides with lexicographic
order on tuples.  A relation stores one bit per tuple; bit t is set iff
tuple t belongs to the relation.  Everything in this module is an
immutable value and every operation is a pure function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import NoWitnessError, ParseError, PreconditionError, UnknownNameError, VerificationError

MAX_ARITY = 16

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def check_arity(arity: int) -> int:
    if not 1 <= arity <= MAX_ARITY:
        raise PreconditionError(f"arity must be in 1..{MAX_ARITY}, got {arity}")
    return arity


def format_tuple(t: int, arity: int) -> str:
    """Render a tuple as a bitstring, x1 first: format_tuple(0b01, 2) == '01'."""
    return format(t, f"0{arity}b")


def parse_tuple(text: str) -> tuple[int, int]:
    """Parse a bitstring into (value, arity)."""
    if not text or any(c not in "01" for c in text):
        raise ParseError(f"expected a bitstring of 0s and 1s, got {text!r}")
    return int(text, 2), len(text)


def tuple_bit(t: int, arity: int, position: int) -> int:
    """Value of coordinate x_position (1-based) of tuple t."""
    return (t >> (arity - position)) & 1


def complement_tuple(t: int, arity: int) -> int:
    return t ^ ((1 << arity) - 1)


def tuple_op(op: str, tuples: Iterable[int], arity: int) -> int:
    """Apply a componentwise operator (XOR3, XOR2, AND, OR) to tuples."""
    ts = list(tuples)
    expected = 3 if op == "XOR3" else 2
    if op not in ("XOR3", "XOR2", "AND", "OR"):
        raise PreconditionError(f"unknown tuple operator {op!r}")
    if len(ts) != expected:
        raise PreconditionError(f"{op} takes {expected} tuples, got {len(ts)}")
    check_arity(arity)
    for t in ts:
        if not 0 <= t < (1 << arity):
            raise PreconditionError(f"tuple {t} does not fit arity {arity}")
    if op == "XOR3":
        return ts[0] ^ ts[1] ^ ts[2]
    if op == "XOR2":
        return ts[0] ^ ts[1]
    if op == "AND":
        return ts[0] & ts[1]
    return ts[0] | ts[1]


@dataclass(frozen=True)
class Relation:
    """A k-ary Boolean relation stored as a 2^k-bit truth table."""

    arity: int
    mask: int

    def __post_init__(self):
        check_arity(self.arity)
        if not 0 <= self.mask < (1 << (1 << self.arity)):
            raise PreconditionError("truth table does not fit the declared arity")

    @classmethod
    def from_tuples(cls, arity: int, tuples: Iterable[int]) -> "Relation":
        check_arity(arity)
        mask = 0
        for t in tuples:
            if not 0 <= t < (1 << arity):
                raise PreconditionError(f"tuple {t} does not fit arity {arity}")
            mask |= 1 << t
        return cls(arity, mask)

    @classmethod
    def from_bitstrings(cls, strings: Iterable[str]) -> "Relation":
        pairs = [parse_tuple(s) for s in strings]
        if not pairs:
            raise PreconditionError("cannot infer arity from an empty tuple list")
        arity = pairs[0][1]
        if any(k != arity for _, k in pairs):
            raise PreconditionError("tuples of mixed arity")
        return cls.from_tuples(arity, (t for t, _ in pairs))

    @classmethod
    def full(cls, arity: int) -> "Relation":
        check_arity(arity)
        return cls(arity, (1 << (1 << arity)) - 1)

    @classmethod
    def empty(cls, arity: int) -> "Relation":
        return cls(arity, 0)

    def __contains__(self, t: int) -> bool:
        return 0 <= t < (1 << self.arity) and bool((self.mask >> t) & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def tuples(self) -> Iterator[int]:
        """Members in ascending (lexicographic) order."""
        for t in range(1 << self.arity):
            if (self.mask >> t) & 1:
                yield t

    def bitstrings(self) -> list[str]:
        return [format_tuple(t, self.arity) for t in self.tuples()]

    def complemented(self) -> "Relation":
        """The relation of coordinatewise-complemented tuples."""
        return Relation.from_tuples(self.arity, (complement_tuple(t, self.arity) for t in self.tuples()))

    def permuted(self, perm: tuple[int, ...]) -> "Relation":
        """Relation with argument positions rearranged; perm maps new position i (0-based) to old position perm[i]."""
        k = self.arity
        if sorted(perm) != list(range(k)):
            raise PreconditionError("perm must be a permutation of argument positions")
        out = []
        for t in self.tuples():
            bits = [tuple_bit(t, k, p + 1) for p in perm]
            out.append(int("".join(map(str, bits)), 2))
        return Relation.from_tuples(k, out)

    def column(self, position: int) -> tuple[int, int]:
        """(zeros, ones) counts of coordinate x_position over the members."""
        zeros = ones = 0
        for t in self.tuples():
            if tuple_bit(t, self.arity, position):
                ones += 1
            else:
                zeros += 1
        return zeros, ones


BUILTINS: dict[str, Relation] = {
    "delta0": Relation.from_tuples(1, [0b0]),
    "delta1": Relation.from_tuples(1, [0b1]),
    "OR": Relation.from_tuples(2, [0b01, 0b10, 0b11]),
    "IMPLIES": Relation.from_tuples(2, [0b00, 0b01, 0b11]),
    "NAND": Relation.from_tuples(2, [0b00, 0b01, 0b10]),
    "XOR": Relation.from_tuples(2, [0b01, 0b10]),
}

RESERVED_NAMES = frozenset(BUILTINS)


def builtin(name: str) -> Relation:
    """Look up one of the six built-in relations by its reserved name."""
    try:
        return BUILTINS[name]
    except KeyError:
        raise UnknownNameError(f"unknown built-in relation {name!r}") from None


def builtin_name(rel: Relation) -> str | None:
    """Reserved name of rel if its table is one of the built-ins."""
    for name, b in BUILTINS.items():
        if b == rel:
            return name
    return None


# ---------------------------------------------------------------------------
# Per-relation predicates


def is_0_valid(rel: Relation) -> bool:
    return 0 in rel


def is_1_valid(rel: Relation) -> bool:
    return ((1 << rel.arity) - 1) in rel


def is_complement_closed(rel: Relation) -> bool:
    return all(complement_tuple(t, rel.arity) in rel for t in rel.tuples())


def is_affine(rel: Relation) -> bool:
    """True iff the relation is closed under componentwise a^b^c.

    Equivalently the member set is a coset of a GF(2) subspace, which is
    what gets checked here: the differences from any fixed member must
    form a subspace, i.e. their span must not be any larger.
    """
    members = list(rel.tuples())
    if not members:
        return True
    a = members[0]
    basis: list[int] = []
    for b in members:
        v = a ^ b
        for w in basis:
            v = min(v, v ^ w)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return (1 << len(basis)) == len(members)


def is_in_im2(rel: Relation) -> bool:
    """True iff the member set is closed under componentwise AND and OR."""
    members = list(rel.tuples())
    for a in members:
        for b in members:
            if (a & b) not in rel or (a | b) not in rel:
                return False
    return True


# ---------------------------------------------------------------------------
# Witness finders.  All scans are lexicographic so certificates are stable.


@dataclass(frozen=True)
class AffineWitness:
    """Members whose XOR combination escapes the relation.

    The triple form has a, b, c in the relation with d = a^b^c outside it;
    the pair form has a, b in the relation with d = a^b outside it (c is
    None).
    """

    arity: int
    a: int
    b: int
    c: int | None
    d: int

    @property
    def kind(self) -> str:
        return "pair" if self.c is None else "triple"

    def check(self, rel: Relation) -> bool:
        inside = self.a in rel and self.b in rel and (self.c is None or self.c in rel)
        combo = self.a ^ self.b ^ (0 if self.c is None else self.c)
        return inside and combo == self.d and self.d not in rel

    def to_json(self) -> dict:
        out = {
            "form": self.kind,
            "a": format_tuple(self.a, self.arity),
            "b": format_tuple(self.b, self.arity),
        }
        if self.c is not None:
            out["c"] = format_tuple(self.c, self.arity)
        out["d"] = format_tuple(self.d, self.arity)
        return out


@dataclass(frozen=True)
class Im2Witness:
    """A pair of members violating AND/OR closure."""

    arity: int
    t: int
    t2: int
    op: str  # "AND" or "OR"
    result: int

    def check(self, rel: Relation) -> bool:
        combo = (self.t & self.t2) if self.op == "AND" else (self.t | self.t2)
        return self.t in rel and self.t2 in rel and combo == self.result and self.result not in rel

    def to_json(self) -> dict:
        return {
            "t": format_tuple(self.t, self.arity),
            "t2": format_tuple(self.t2, self.arity),
            "op": self.op,
            "result": format_tuple(self.result, self.arity),
        }


def non_affine_witness(rel: Relation) -> AffineWitness:
    """Lexicographically smallest (a, b, c) in R^3 with a^b^c outside R."""
    members = list(rel.tuples())
    for a in members:
        for b in members:
            for c in members:
                d = a ^ b ^ c
                if d not in rel:
                    return AffineWitness(rel.arity, a, b, c, d)
    raise NoWitnessError("relation is affine; no XOR-triple witness exists")


def non_affine_pair(rel: Relation) -> AffineWitness:
    """Lexicographically smallest (a, b) in R^2 with a^b outside R.

    Affine input is rejected outright: a coset avoiding the all-zero
    tuple also has escaping pairs, but those certify nothing.
    """
    if is_affine(rel):
        raise NoWitnessError("relation is affine; refusing a meaningless pair witness")
    members = list(rel.tuples())
    for a in members:
        for b in members:
            if (a ^ b) not in rel:
                return AffineWitness(rel.arity, a, b, None, a ^ b)
    raise NoWitnessError("relation is affine; no XOR-pair witness exists")


def non_affine_from_anchor(rel: Relation, a: int) -> tuple[int, int]:
    """Smallest (b, c) in R^2 with a^b^c outside R, for a fixed member a."""
    if a not in rel:
        raise PreconditionError("anchor tuple is not in the relation")
    for b in rel.tuples():
        for c in rel.tuples():
            if (a ^ b ^ c) not in rel:
                return b, c
    raise NoWitnessError("relation is affine; no anchored witness exists")


def im2_witness(rel: Relation) -> Im2Witness:
    """Smallest closure violation; AND violations are searched before OR."""
    members = list(rel.tuples())
    for op in ("AND", "OR"):
        for t in members:
            for t2 in members:
                combo = (t & t2) if op == "AND" else (t | t2)
                if combo not in rel:
                    return Im2Witness(rel.arity, t, t2, op, combo)
    raise NoWitnessError("relation is closed under AND and OR; no witness exists")


# ---------------------------------------------------------------------------
# Conjunctive rebuild from constant and implication atoms.

Atom = tuple  # ("zero", i) | ("one", i) | ("implies", i, j), positions 1-based


def atom_holds(atom: Atom, t: int, arity: int) -> bool:
    if atom[0] == "zero":
        return tuple_bit(t, arity, atom[1]) == 0
    if atom[0] == "one":
        return tuple_bit(t, arity, atom[1]) == 1
    return tuple_bit(t, arity, atom[1]) <= tuple_bit(t, arity, atom[2])


def format_atom(atom: Atom) -> str:
    if atom[0] == "zero":
        return f"Zero({atom[1]})"
    if atom[0] == "one":
        return f"One({atom[1]})"
    return f"Implies({atom[1]},{atom[2]})"


def entailed_atoms(rel: Relation) -> tuple[Atom, ...]:
    """Every constant/implication atom that holds on all members of rel.

    Collected unconditionally; pairing with atoms_relation gives the
    canonical conjunctive reconstruction attempt for any relation.
    """
    k = rel.arity
    members = list(rel.tuples())
    atoms: list[Atom] = []
    for i in range(1, k + 1):
        col = [tuple_bit(t, k, i) for t in members]
        if all(v == 0 for v in col):
            atoms.append(("zero", i))
        if all(v == 1 for v in col):
            atoms.append(("one", i))
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j and all(tuple_bit(t, k, i) <= tuple_bit(t, k, j) for t in members):
                atoms.append(("implies", i, j))
    return tuple(atoms)


def atoms_relation(atoms: Iterable[Atom], arity: int) -> Relation:
    """Solution set of a conjunction of atoms, as a relation."""
    mask = 0
    atoms = list(atoms)
    for t in range(1 << arity):
        if all(atom_holds(a, t, arity) for a in atoms):
            mask |= 1 << t
    return Relation(arity, mask)


@dataclass(frozen=True)
class Im2Formula:
    """A conjunction of atoms whose solution set equals a source relation."""

    arity: int
    atoms: tuple[Atom, ...]

    def solution_relation(self) -> Relation:
        return atoms_relation(self.atoms, self.arity)

    def to_json(self) -> dict:
        return {"arity": self.arity, "atoms": [format_atom(a) for a in self.atoms]}


def im2_formula(rel: Relation) -> Im2Formula:
    """Rebuild a closed relation as a conjunction of entailed atoms.

    The conjunction is verified against the source table by enumeration;
    a mismatch would mean the closure test and the reconstruction
    disagree, which is a bug, never an expected outcome.
    """
    if len(rel) == 0:
        raise PreconditionError("empty relation has no conjunctive reconstruction")
    if not is_in_im2(rel):
        raise PreconditionError("relation is not closed under AND and OR")
    atoms = entailed_atoms(rel)
    if atoms_relation(atoms, rel.arity) != rel:
        raise VerificationError("entailed-atom conjunction does not reproduce the relation")
    return Im2Formula(rel.arity, atoms)


# ---------------------------------------------------------------------------
# Column imbalance, the handle used to simulate pinning.


@dataclass(frozen=True)
class MajorityColumn:
    position: int  # 1-based
    value: int  # the majority bit
    majority: int
    minority: int


def majority_column(rel: Relation) -> MajorityColumn | None:
    """Smallest argument position whose 0/1 member counts differ."""
    for j in range(1, rel.arity + 1):
        zeros, ones = rel.column(j)
        if zeros != ones:
            if zeros > ones:
                return MajorityColumn(j, 0, zeros, ones)
            return MajorityColumn(j, 1, ones, zeros)
    return None


# ---------------------------------------------------------------------------
# Constraint languages and the relation block format.


@dataclass(frozen=True)
class ConstraintLanguage:
    """A named, ordered, finite set of relations."""

    relations: tuple[tuple[str, Relation], ...]

    def __post_init__(self):
        if not self.relations:
            raise PreconditionError("constraint language must be nonempty")
        seen = set()
        for name, rel in self.relations:
            if not _NAME_RE.match(name):
                raise PreconditionError(f"invalid relation name {name!r}")
            if name in seen:
                raise PreconditionError(f"duplicate relation name {name!r}")
            seen.add(name)
            if name in RESERVED_NAMES and BUILTINS[name] != rel:
                raise PreconditionError(f"reserved name {name!r} bound to a non-built-in table")

    @classmethod
    def of(cls, *items: str | tuple[str, Relation]) -> "ConstraintLanguage":
        """Build from built-in names and/or (name, relation) pairs."""
        rels = []
        for item in items:
            if isinstance(item, str):
                rels.append((item, builtin(item)))
            else:
                rels.append(item)
        return cls(tuple(rels))

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def items(self) -> tuple[tuple[str, Relation], ...]:
        return self.relations

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.relations)

    def __getitem__(self, name: str) -> Relation:
        for n, rel in self.relations:
            if n == name:
                return rel
        raise UnknownNameError(f"unknown relation {name!r}")

    def get(self, name: str) -> Relation | None:
        for n, rel in self.relations:
            if n == name:
                return rel
        return None

    def resolve(self, name: str) -> Relation:
        """Look up a name here or among the always-available built-ins."""
        rel = self.get(name)
        if rel is None:
            if name in BUILTINS:
                return BUILTINS[name]
            raise UnknownNameError(f"unknown relation {name!r}")
        return rel

    def merged(self, other: "ConstraintLanguage") -> "ConstraintLanguage":
        """Union of two languages; clashing names must agree on tables."""
        rels = list(self.relations)
        names = {n: r for n, r in rels}
        for name, rel in other.relations:
            if name in names:
                if names[name] != rel:
                    raise PreconditionError(f"conflicting definitions for relation {name!r}")
            else:
                rels.append((name, rel))
                names[name] = rel
        return ConstraintLanguage(tuple(rels))

    def extended(self, name: str, rel: Relation) -> "ConstraintLanguage":
        if name in self:
            if self[name] != rel:
                raise PreconditionError(f"conflicting definitions for relation {name!r}")
            return self
        return ConstraintLanguage(self.relations + ((name, rel),))


def strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_language(text: str) -> ConstraintLanguage:
    """Parse a sequence of relation blocks:

        relation <NAME> <ARITY>
        <one bitstring per line>
        end

    '#' starts a comment.  Reserved names may only restate the built-in
    table, never redefine it.
    """
    rels: list[tuple[str, Relation]] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = strip_comment(lines[i])
        lineno = i + 1
        i += 1
        if not line:
            continue
        parts = line.split()
        if parts[0] != "relation":
            raise ParseError(f"expected 'relation', got {parts[0]!r}", lineno)
        if len(parts) != 3:
            raise ParseError("expected 'relation <NAME> <ARITY>'", lineno)
        name = parts[1]
        if not _NAME_RE.match(name):
            raise ParseError(f"invalid relation name {name!r}", lineno)
        try:
            arity = int(parts[2])
        except ValueError:
            raise ParseError(f"arity must be an integer, got {parts[2]!r}", lineno) from None
        if not 1 <= arity <= MAX_ARITY:
            raise ParseError(f"arity must be in 1..{MAX_ARITY}", lineno)
        tuples = []
        closed = False
        while i < len(lines):
            body = strip_comment(lines[i])
            body_no = i + 1
            i += 1
            if not body:
                continue
            if body == "end":
                closed = True
                break
            if any(c not in "01" for c in body) or len(body) != arity:
                raise ParseError(f"expected a bitstring of length {arity} or 'end', got {body!r}", body_no)
            tuples.append(int(body, 2))
        if not closed:
            raise ParseError(f"relation block {name!r} not closed by 'end'", lineno)
        rel = Relation.from_tuples(arity, tuples)
        if name in RESERVED_NAMES and BUILTINS[name] != rel:
            raise ParseError(f"reserved name {name!r} may not be redefined", lineno)
        rels.append((name, rel))
    if not rels:
        raise ParseError("no relation blocks found")
    return ConstraintLanguage(tuple(rels))


def serialize_language(lang: ConstraintLanguage) -> str:
    out = []
    for name, rel in lang.items():
        out.append(f"relation {name} {rel.arity}")
        out.extend(rel.bitstrings())
        out.append("end")
    return "\n".join(out) + "\n"

"""Exact counting for affine constraint languages via GF(2) linear algebra.

Coefficient vectors are int bitsets.  Rows emitted for a single relation
use the tuple layout (x1 in the most significant of k bits) so that the
dot product with a member tuple is a plain popcount parity; rows of an
instance-level system use one bit per variable index instead.  Counting
itself is layout-agnostic: eliminate, then 2^(variables - rank), or 0 if
the system is inconsistent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError, VerificationError
from .instances import DEFAULT_BRUTE_CAP, Instance, brute_force_count
from .relations import Relation, is_affine


def gf2_dot(a: int, b: int) -> int:
    return (a & b).bit_count() & 1


def gf2_basis(vectors) -> list[int]:
    """Row-reduced basis (distinct leading bits) of the span of vectors."""
    basis: list[int] = []
    for v in vectors:
        for w in basis:
            v = min(v, v ^ w)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return basis


def gf2_nullspace_basis(vectors, width: int) -> list[int]:
    """Basis of {c : gf2_dot(c, v) = 0 for every v}, inside width bits."""
    rows = gf2_basis(vectors)
    pivots = [r.bit_length() - 1 for r in rows]
    free = [b for b in range(width) if b not in pivots]
    out = []
    for f in free:
        c = 1 << f
        # Back-substitute so the pivot coordinates cancel every row.
        for r, p in zip(rows, pivots):
            if gf2_dot(c, r):
                c ^= 1 << p
        out.append(c)
    return out


@dataclass(frozen=True)
class Gf2System:
    """A linear system over GF(2): rows of (coefficient bitset, rhs bit)."""

    num_vars: int
    rows: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise PreconditionError("variable count must be nonnegative")
        for c, b in self.rows:
            if not 0 <= c < (1 << self.num_vars):
                raise PreconditionError("coefficient vector exceeds the variable count")
            if b not in (0, 1):
                raise PreconditionError("right-hand side must be a bit")


def count_solutions(system: Gf2System) -> int:
    """Gaussian elimination; 0 if inconsistent, else 2^(num_vars - rank)."""
    basis: dict[int, int] = {}
    for c, b in system.rows:
        row = (c << 1) | b
        while row > 1:
            pivot = row.bit_length() - 1
            if pivot in basis:
                row ^= basis[pivot]
            else:
                basis[pivot] = row
                break
        if row == 1:
            return 0
    return 1 << (system.num_vars - len(basis))


def solutions_of_system(system: Gf2System) -> list[int]:
    """All solutions by enumeration; for verification at small sizes."""
    if system.num_vars > 20:
        raise PreconditionError("enumeration only supported up to 20 variables")
    out = []
    for x in range(1 << system.num_vars):
        if all(gf2_dot(c, x) == b for c, b in system.rows):
            out.append(x)
    return out


def relation_to_system(rel: Relation) -> Gf2System:
    """A system over x1..xk whose solution set is exactly the relation.

    An empty relation becomes the single inconsistent row 0 = 1.
    Otherwise the differences from the smallest member span a subspace;
    one row is emitted per basis vector of its orthogonal complement.
    The result is re-checked against the table by enumeration.
    """
    if not is_affine(rel):
        raise PreconditionError("relation is not affine")
    k = rel.arity
    if len(rel) == 0:
        return Gf2System(k, ((0, 1),))
    members = list(rel.tuples())
    anchor = members[0]
    diffs = [anchor ^ b for b in members]
    rows = tuple((c, gf2_dot(c, anchor)) for c in gf2_nullspace_basis(diffs, k))
    system = Gf2System(k, rows)
    solution_mask = 0
    for x in solutions_of_system(system):
        solution_mask |= 1 << x
    if solution_mask != rel.mask:
        raise VerificationError("emitted system does not reproduce the relation")
    return system


def instance_to_system(inst: Instance) -> Gf2System:
    """Union of per-constraint systems with scope variables substituted.

    Repeated scope variables fold their coefficients by XOR, so a row can
    degenerate to 0 = 1 (inconsistent) or 0 = 0 (vacuous).
    """
    index = inst.var_index()
    n = len(inst.variables)
    rows: list[tuple[int, int]] = []
    for c in inst.constraints:
        rel = inst.relation_of(c)
        if not is_affine(rel):
            raise PreconditionError(f"relation {c.relation} is not affine")
        local = relation_to_system(rel)
        k = rel.arity
        for coeffs, rhs in local.rows:
            global_coeffs = 0
            for pos in range(1, k + 1):
                if (coeffs >> (k - pos)) & 1:
                    global_coeffs ^= 1 << index[c.scope[pos - 1]]
            rows.append((global_coeffs, rhs))
    return Gf2System(n, tuple(rows))


def uses_only_affine(inst: Instance) -> bool:
    return all(is_affine(rel) for _, rel in inst.used_relations())


def count(inst: Instance, cap: int = DEFAULT_BRUTE_CAP) -> int:
    """Exact model count: linear-algebra route when every used relation is
    affine, exhaustive enumeration otherwise."""
    if uses_only_affine(inst):
        return count_solutions(instance_to_system(inst))
    return brute_force_count(inst, cap)

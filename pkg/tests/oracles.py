"""Independent brute-force oracles the test suite checks the package against.

Everything here is written for obviousness, not speed: definitional
loops over tuples, assignments and subsets.  None of it shares code with
the implementation paths it is used to check.
"""

from __future__ import annotations

import random
from collections import Counter
from itertools import product

from sharpcsp.instances import Constraint, Instance
from sharpcsp.relations import Relation, tuple_bit


def affine_by_triples(rel: Relation) -> bool:
    """Definitional check: closed under componentwise a^b^c over all triples."""
    members = list(rel.tuples())
    for a in members:
        for b in members:
            for c in members:
                if (a ^ b ^ c) not in rel:
                    return False
    return True


def im2_by_pairs(rel: Relation) -> bool:
    """Definitional check: closed under componentwise AND and OR over all pairs."""
    members = list(rel.tuples())
    for a in members:
        for b in members:
            if (a & b) not in rel or (a | b) not in rel:
                return False
    return True


def naive_satisfying_assignments(inst: Instance) -> list[dict[str, int]]:
    """Materialize the satisfying set by looping over itertools.product."""
    out = []
    for values in product((0, 1), repeat=len(inst.variables)):
        sigma = dict(zip(inst.variables, values))
        ok = True
        for c in inst.constraints:
            rel = inst.relation_of(c)
            t = 0
            for v in c.scope:
                t = (t << 1) | sigma[v]
            if t not in rel:
                ok = False
                break
        if ok:
            out.append(sigma)
    return out


def naive_count(inst: Instance) -> int:
    return len(naive_satisfying_assignments(inst))


def pendant_count(inst: Instance, core_vars) -> int:
    """Exact count when every non-core variable occurs in at most one constraint.

    Enumerates assignments of the core and multiplies, per constraint
    touching private variables, the number of ways to extend.
    """
    core = [v for v in inst.variables if v in set(core_vars)]
    core_set = set(core)
    outside = [v for v in inst.variables if v not in core_set]
    occurrences = Counter(
        v for c in inst.constraints for v in set(c.scope) if v not in core_set
    )
    assert all(n == 1 for n in occurrences.values()), "non-core variable is shared"
    floaters = sum(1 for v in outside if v not in occurrences)
    total = 0
    for values in product((0, 1), repeat=len(core)):
        sigma = dict(zip(core, values))
        weight = 1
        for c in inst.constraints:
            rel = inst.relation_of(c)
            free = []
            for v in c.scope:
                if v not in core_set and v not in free:
                    free.append(v)
            ways = 0
            for bits in product((0, 1), repeat=len(free)):
                local = dict(zip(free, bits))
                t = 0
                for v in c.scope:
                    t = (t << 1) | (sigma[v] if v in core_set else local[v])
                if t in rel:
                    ways += 1
            weight *= ways
            if weight == 0:
                break
        total += weight
    return total << floaters


def naive_downset_count(elements_count: int, leq) -> int:
    """Count downward-closed subsets by checking every subset directly."""
    count = 0
    for mask in range(1 << elements_count):
        closed = True
        for j in range(elements_count):
            if (mask >> j) & 1:
                for i in range(elements_count):
                    if leq[i][j] and not (mask >> i) & 1:
                        closed = False
                        break
            if not closed:
                break
        if closed:
            count += 1
    return count


def naive_independent_set_count(n: int, edges) -> int:
    count = 0
    for mask in range(1 << n):
        ok = True
        for u, v in edges:
            if (mask >> (u - 1)) & 1 and (mask >> (v - 1)) & 1:
                ok = False
                break
        if ok:
            count += 1
    return count


def solution_tuples_of_atoms(atoms, arity: int) -> set[int]:
    """Solutions of a conjunction of constant/implication atoms, by loop."""
    out = set()
    for t in range(1 << arity):
        ok = True
        for atom in atoms:
            if atom[0] == "zero" and tuple_bit(t, arity, atom[1]) != 0:
                ok = False
            elif atom[0] == "one" and tuple_bit(t, arity, atom[1]) != 1:
                ok = False
            elif atom[0] == "implies" and \
                    tuple_bit(t, arity, atom[1]) > tuple_bit(t, arity, atom[2]):
                ok = False
            if not ok:
                break
        if ok:
            out.add(t)
    return out


# ---------------------------------------------------------------------------
# Seeded generators for property-style tests.


def random_instance(rng: random.Random, language, relation_names, n_vars: int,
                    n_constraints: int) -> Instance:
    variables = tuple(f"v{i}" for i in range(1, n_vars + 1))
    constraints = []
    for _ in range(n_constraints):
        name = rng.choice(relation_names)
        arity = language.resolve(name).arity
        scope = tuple(rng.choice(variables) for _ in range(arity))
        constraints.append(Constraint(name, scope))
    return Instance(language, variables, tuple(constraints))


def random_graph(rng: random.Random, n: int, edge_prob: float):
    edges = []
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if rng.random() < edge_prob:
                edges.append((u, v))
    return n, edges


def random_bipartite(rng: random.Random, a: int, b: int, edge_prob: float):
    edges = []
    for u in range(1, a + 1):
        for v in range(1, b + 1):
            if rng.random() < edge_prob:
                edges.append((u, v))
    return edges

"""Faithful, perfect implementations of target relations.

A gadget is a CSP instance with k distinguished variables implementing a
k-ary target relation: every target tuple extends to exactly one
satisfying assignment of the auxiliary variables, and every non-tuple to
none.  Substituting such a gadget for a constraint therefore preserves
the model count exactly.

The constructors in this module derive OR, IMPLIES or NAND (and the
unary pins) from an arbitrary relation plus one available pin, following
a fixed decision tree driven by validity, complement closure, AND/OR
closure and XOR-combination witnesses.  Every constructor re-checks its
output by exhaustive enumeration before returning it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ParseError, PreconditionError, ResourceLimitError, VerificationError
from .instances import (
    DEFAULT_BRUTE_CAP,
    Constraint,
    Instance,
    NameAllocator,
    _constraint_mask,
    _variable_columns,
    parse_instance,
    serialize_instance,
)
from .relations import (
    BUILTINS,
    ConstraintLanguage,
    Im2Witness,
    Relation,
    builtin_name,
    format_tuple,
    is_0_valid,
    is_1_valid,
    is_affine,
    is_complement_closed,
    non_affine_from_anchor,
    non_affine_pair,
    non_affine_witness,
    parse_language,
    serialize_language,
    strip_comment,
    tuple_bit,
)

_BUILTIN_LANG = ConstraintLanguage(tuple(BUILTINS.items()))

# Table of the reversed implication, the one non-named target a
# construction can claim: second argument forces the first.
IMPLIED_BY = Relation.from_tuples(2, [0b00, 0b11, 0b10])


@dataclass(frozen=True)
class Gadget:
    """An instance with distinguished variables implementing a target."""

    distinguished: tuple[str, ...]
    instance: Instance
    target: Relation
    target_name: str
    branch: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.distinguished)) != len(self.distinguished):
            raise PreconditionError("distinguished variables must be distinct")
        declared = set(self.instance.variables)
        for v in self.distinguished:
            if v not in declared:
                raise PreconditionError(f"distinguished variable {v!r} not declared")
        if len(self.distinguished) != self.target.arity:
            raise PreconditionError("distinguished count must match the target arity")

    @property
    def auxiliaries(self) -> tuple[str, ...]:
        d = set(self.distinguished)
        return tuple(v for v in self.instance.variables if v not in d)

    def to_json(self) -> dict:
        return {
            "claims": self.target_name,
            "target_tuples": self.target.bitstrings(),
            "distinguished": list(self.distinguished),
            "auxiliaries": list(self.auxiliaries),
            "constraints": [[c.relation, *c.scope] for c in self.instance.constraints],
            "branch": list(self.branch),
        }


def extension_counts(g: Gadget, cap: int = DEFAULT_BRUTE_CAP) -> list[int]:
    """Satisfying extension count for each distinguished tuple, in tuple order."""
    inst = g.instance
    n = len(inst.variables)
    if n > cap:
        raise ResourceLimitError(f"{n} gadget variables exceed the enumeration cap of {cap}")
    full = (1 << (1 << n)) - 1
    cols = _variable_columns(n)
    index = inst.var_index()
    sat = full
    for c in inst.constraints:
        sat &= _constraint_mask(inst.relation_of(c), tuple(index[v] for v in c.scope), cols, full)
    k = len(g.distinguished)
    counts = []
    for t in range(1 << k):
        sel = sat
        for pos in range(1, k + 1):
            col = cols[index[g.distinguished[pos - 1]]]
            sel &= col if tuple_bit(t, k, pos) else full ^ col
        counts.append(sel.bit_count())
    return counts


def implemented_relation(g: Gadget, cap: int = DEFAULT_BRUTE_CAP) -> tuple[Relation, bool]:
    """(relation of extendable tuples, whether every count is 0 or 1)."""
    counts = extension_counts(g, cap)
    mask = 0
    faithful = True
    for t, c in enumerate(counts):
        if c:
            mask |= 1 << t
        if c > 1:
            faithful = False
    return Relation(len(g.distinguished), mask), faithful


def verify_implementation(g: Gadget, cap: int = DEFAULT_BRUTE_CAP) -> bool:
    """Exact check of the gadget invariant against its claimed target."""
    counts = extension_counts(g, cap)
    return all(c == (1 if t in g.target else 0) for t, c in enumerate(counts))


def _checked(g: Gadget, cap: int = DEFAULT_BRUTE_CAP) -> Gadget:
    if not verify_implementation(g, cap):
        raise VerificationError(
            f"constructed gadget fails verification against {g.target_name} "
            f"(branch: {', '.join(g.branch)})"
        )
    return g


def _make_instance(source: tuple[str, Relation] | None, variables: tuple[str, ...],
                   constraints: list[Constraint],
                   extra: tuple[tuple[str, Relation], ...] = ()) -> Instance:
    lang = _BUILTIN_LANG
    if source is not None:
        lang = lang.extended(*source)
    for name, rel in extra:
        lang = lang.extended(name, rel)
    return Instance(lang, variables, tuple(constraints))


def inline_relation_constraints(inst: Instance, rel_name: str, impl: Gadget) -> Instance:
    """Replace every rel_name constraint by a fresh copy of impl.

    Distinguished variables bind to the constraint scope; auxiliaries are
    freshly renamed per occurrence.  The caller is responsible for impl
    actually implementing the named relation.
    """
    target = inst.language.resolve(rel_name)
    if target != impl.target:
        raise PreconditionError(f"gadget implements a different table than {rel_name!r}")
    allocator = NameAllocator(set(inst.variables))
    variables = list(inst.variables)
    constraints: list[Constraint] = []
    for c in inst.constraints:
        if c.relation != rel_name:
            constraints.append(c)
            continue
        binding = dict(zip(impl.distinguished, c.scope))
        for aux in impl.auxiliaries:
            fresh = allocator.fresh(aux)
            binding[aux] = fresh
            variables.append(fresh)
        for ic in impl.instance.constraints:
            constraints.append(Constraint(ic.relation, tuple(binding[v] for v in ic.scope)))
    language = inst.language.merged(impl.instance.language)
    return Instance(language, tuple(variables), tuple(constraints))


def _inline_into_gadget(g: Gadget, rel_name: str, impl: Gadget) -> Gadget:
    if not any(c.relation == rel_name for c in g.instance.constraints):
        return g
    return replace(g, instance=inline_relation_constraints(g.instance, rel_name, impl))


# ---------------------------------------------------------------------------
# Constructions from validity and complement closure.


def pin_from_validity(name: str, rel: Relation) -> Gadget:
    """Diagonal gadget R(x,...,x) pinning x when exactly one of the
    all-zero / all-one tuples belongs to the relation."""
    zero_v, one_v = is_0_valid(rel), is_1_valid(rel)
    if zero_v == one_v:
        raise PreconditionError("relation must be 0-valid or 1-valid, not both or neither")
    value = 0 if zero_v else 1
    target_name = f"delta{value}"
    g = Gadget(
        distinguished=("x",),
        instance=_make_instance((name, rel), ("x",), [Constraint(name, ("x",) * rel.arity)]),
        target=BUILTINS[target_name],
        target_name=target_name,
        branch=(f"diagonal pin from {name} ({value}-valid only)",),
    )
    return _checked(g)


def from_non_complement_closed(name: str, rel: Relation) -> tuple[Gadget, ...]:
    """Two-variable collapse of a relation that is not complement-closed.

    Substitute x at the positions where the chosen tuple s is 1 and y
    elsewhere, where s is the smallest member whose complement is
    outside the relation.  When the relation holds both constant tuples
    the result is the reversed implication; when it holds neither, the
    collapse pins x to 1 and y to 0, yielding both unary pins.
    """
    if is_complement_closed(rel):
        raise PreconditionError("relation is complement-closed")
    zero_v, one_v = is_0_valid(rel), is_1_valid(rel)
    if zero_v != one_v:
        raise PreconditionError("mixed validity: use pin_from_validity instead")
    k = rel.arity
    full = (1 << k) - 1
    s = next(t for t in rel.tuples() if (t ^ full) not in rel)
    scope = tuple("x" if tuple_bit(s, k, i) else "y" for i in range(1, k + 1))
    note = f"collapse of {name} through member {format_tuple(s, k)}"
    if zero_v:
        g = Gadget(
            distinguished=("x", "y"),
            instance=_make_instance((name, rel), ("x", "y"), [Constraint(name, scope)]),
            target=IMPLIED_BY,
            target_name="IMPLIED_BY",
            branch=(note, "both constant tuples present: reversed implication"),
        )
        return (_checked(g),)
    inst = _make_instance((name, rel), ("x", "y"), [Constraint(name, scope)])
    g_one = Gadget(("x",), inst, BUILTINS["delta1"], "delta1",
                   (note, "no constant tuples: x is forced to 1"))
    g_zero = Gadget(("y",), inst, BUILTINS["delta0"], "delta0",
                    (note, "no constant tuples: y is forced to 0"))
    return (_checked(g_one), _checked(g_zero))


# ---------------------------------------------------------------------------
# The ternary case split.


def from_ternary_case(name: str, rel: Relation) -> Gadget:
    """Derive IMPLIES or NAND from a ternary relation containing
    (0,0,0), (0,1,1), (1,0,1) but not (1,1,0), with the zero pin available.

    The branch is selected from which of (0,1,0), (1,1,1), (1,0,0),
    (0,0,1) are present; identification of coordinates or pinning one of
    them reduces the table to a binary target.
    """
    if rel.arity != 3:
        raise PreconditionError("ternary construction requires arity 3")
    if not (0b000 in rel and 0b011 in rel and 0b101 in rel and 0b110 not in rel):
        raise PreconditionError("relation does not match the required ternary pattern")
    has_010 = 0b010 in rel
    has_111 = 0b111 in rel
    has_100 = 0b100 in rel
    has_001 = 0b001 in rel

    def gadget(distinguished, variables, constraints, target_name, note):
        g = Gadget(
            distinguished=distinguished,
            instance=_make_instance((name, rel), variables, constraints),
            target=BUILTINS[target_name],
            target_name=target_name,
            branch=(note,),
        )
        return _checked(g)

    if has_010 and has_100:
        return gadget(("x", "y"), ("x", "y", "z"),
                      [Constraint(name, ("x", "y", "z")), Constraint("delta0", ("z",))],
                      "NAND", f"third coordinate of {name} pinned to 0")
    if has_010 != has_111:
        if has_111:
            return gadget(("y", "x"), ("x", "y"),
                          [Constraint(name, ("x", "y", "x"))],
                          "IMPLIES", f"first and third coordinates of {name} identified")
        return gadget(("x", "y"), ("x", "y"),
                      [Constraint(name, ("x", "y", "x"))],
                      "NAND", f"first and third coordinates of {name} identified")
    if has_100 != has_111:
        if has_111:
            return gadget(("x", "y"), ("x", "y"),
                          [Constraint(name, ("x", "y", "y"))],
                          "IMPLIES", f"last two coordinates of {name} identified")
        return gadget(("x", "y"), ("x", "y"),
                      [Constraint(name, ("x", "y", "y"))],
                      "NAND", f"last two coordinates of {name} identified")
    if not has_001:
        return gadget(("x", "y"), ("x", "y", "z"),
                      [Constraint(name, ("x", "y", "z"))],
                      "NAND", f"third coordinate of {name} left free")
    return gadget(("y", "z"), ("x", "y", "z"),
                  [Constraint(name, ("x", "y", "z")), Constraint("delta0", ("x",))],
                  "IMPLIES", f"first coordinate of {name} pinned to 0")


# ---------------------------------------------------------------------------
# The main construction: one of OR / IMPLIES / NAND from a non-affine
# relation plus one pin.


def _materialize(source: tuple[str, Relation], distinguished: tuple[str, ...],
                 variables: tuple[str, ...], constraints: list[Constraint],
                 branch: tuple[str, ...]) -> Gadget:
    """Build a gadget and set its claim to whatever it implements.

    Faithfulness (no tuple with two or more extensions) is asserted;
    the constructions that call this only produce forced auxiliaries.
    """
    inst = _make_instance(source, variables, constraints)
    probe = Gadget(distinguished, inst, Relation.full(len(distinguished)), "PROBE", branch)
    rel, faithful = implemented_relation(probe)
    if not faithful:
        raise VerificationError(f"materialized relation is not faithful (branch: {', '.join(branch)})")
    return Gadget(distinguished, inst, rel, "DERIVED", branch)


def _claim(g: Gadget, target_name: str, note: str) -> Gadget:
    """Re-claim a derived gadget as a named builtin target and verify."""
    target = BUILTINS[target_name]
    out = replace(g, target=target, target_name=target_name, branch=g.branch + (note,))
    return _checked(out)


def _delta1_gadget(name: str, rel: Relation) -> Gadget:
    """Force a variable to 1 using a relation that is not 0-valid and the
    zero pin: substitute x at the 1-positions of the smallest member and
    a zero-pinned variable elsewhere."""
    if is_0_valid(rel):
        raise PreconditionError("relation is 0-valid")
    k = rel.arity
    s = next(rel.tuples())
    scope = tuple("x" if tuple_bit(s, k, i) else "y" for i in range(1, k + 1))
    has_y = "y" in scope
    variables = ("x", "y") if has_y else ("x",)
    constraints = [Constraint(name, scope)]
    if has_y:
        constraints.append(Constraint("delta0", ("y",)))
    g = Gadget(("x",), _make_instance((name, rel), variables, constraints),
               BUILTINS["delta1"], "delta1",
               (f"one-pin from {name} through member {format_tuple(s, k)}",))
    return _checked(g)


_PAIR_GROUP = {(0, 0): "u", (0, 1): "x", (1, 0): "y", (1, 1): "v"}


def _and_violation(rel: Relation) -> tuple[int, int]:
    members = list(rel.tuples())
    for t in members:
        for t2 in members:
            if (t & t2) not in rel:
                return t, t2
    raise PreconditionError("relation is AND-closed")


def _ternary_recursion(source: tuple[str, Relation], base: Gadget) -> Gadget:
    """Feed a materialized ternary relation through the case split, then
    inline its defining gadget so only the source language remains."""
    tern = from_ternary_case("DERIVED3", base.target)
    composed = _inline_into_gadget(tern, "DERIVED3", base)
    out = replace(composed, branch=base.branch + composed.branch)
    return _checked(out)


def _zero_valid_construction(name: str, rel: Relation) -> Gadget:
    """Pin value 0, relation 0-valid: split on an XOR-pair witness."""
    k = rel.arity
    pair = non_affine_pair(rel)
    s, s2 = pair.a, pair.b
    scope = tuple(_PAIR_GROUP[(tuple_bit(s, k, i), tuple_bit(s2, k, i))] for i in range(1, k + 1))
    # Group u takes the zero-pinned slot here; v marks shared 1s.
    scope = tuple({"u": "w", "x": "x", "y": "y", "v": "z"}[g] for g in scope)
    occupied = set(scope)
    note = (f"zero-valid split of {name} on pair "
            f"{format_tuple(s, k)}, {format_tuple(s2, k)}")
    variables = tuple(v for v in ("x", "y", "z", "w") if v in occupied)
    constraints = [Constraint(name, scope)]
    if "w" in occupied:
        constraints.append(Constraint("delta0", ("w",)))
    if "x" in occupied and "y" not in occupied:
        base = _materialize((name, rel), ("x", "z"), variables, constraints, (note,))
        return _claim(base, "IMPLIES", "only the 01-group occurs beside shared 1s")
    if "y" in occupied and "x" not in occupied:
        base = _materialize((name, rel), ("y", "z"), variables, constraints, (note,))
        return _claim(base, "IMPLIES", "only the 10-group occurs beside shared 1s")
    if "z" not in occupied:
        base = _materialize((name, rel), ("x", "y"), variables, constraints, (note,))
        return _claim(base, "NAND", "both difference groups occur, no shared 1s")
    base = _materialize((name, rel), ("x", "y", "z"), variables, constraints,
                        (note, "all three groups occur: ternary case split"))
    return _ternary_recursion((name, rel), base)


_TRIPLE_GROUP = {
    (0, 0, 0): "u",
    (0, 0, 1): "x",
    (0, 1, 0): "y",
    (0, 1, 1): "z",
    (1, 0, 0): "zp",
    (1, 0, 1): "yp",
    (1, 1, 0): "xp",
    (1, 1, 1): "up",
}


def _and_closed_construction(name: str, rel: Relation, d1: Gadget) -> Gadget:
    """Pin value 0, relation not 0-valid but AND-closed: anchor at the
    intersection of all members and split on an anchored XOR-triple."""
    k = rel.arity
    s = (1 << k) - 1
    for t in rel.tuples():
        s &= t
    if s not in rel:
        raise VerificationError("intersection of an AND-closed relation escaped it")
    b, c = non_affine_from_anchor(rel, s)
    groups = []
    for i in range(1, k + 1):
        pattern = (tuple_bit(s, k, i), tuple_bit(b, k, i), tuple_bit(c, k, i))
        if pattern not in ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 1, 1)):
            raise VerificationError("anchored triple escapes the intersection ordering")
        groups.append({(0, 0, 0): "u", (0, 0, 1): "x", (0, 1, 0): "y",
                       (0, 1, 1): "z", (1, 1, 1): "v"}[pattern])
    scope = tuple(groups)
    occupied = set(scope)
    note = (f"AND-closed split of {name} anchored at {format_tuple(s, k)} "
            f"with {format_tuple(b, k)}, {format_tuple(c, k)}")
    variables = tuple(v for v in ("x", "y", "z", "u", "v") if v in occupied)
    constraints = [Constraint(name, scope)]
    if "u" in occupied:
        constraints.append(Constraint("delta0", ("u",)))
    if "v" in occupied:
        constraints.append(Constraint("delta1", ("v",)))
    if "x" in occupied and "y" not in occupied:
        out = _claim(_materialize((name, rel), ("x", "z"), variables, constraints, (note,)),
                     "IMPLIES", "001-group occurs, 010-group does not")
    elif "y" in occupied and "x" not in occupied:
        out = _claim(_materialize((name, rel), ("y", "z"), variables, constraints, (note,)),
                     "IMPLIES", "010-group occurs, 001-group does not")
    elif "z" not in occupied:
        out = _claim(_materialize((name, rel), ("x", "y"), variables, constraints, (note,)),
                     "NAND", "both single-1 groups occur, 011-group does not")
    else:
        base = _materialize((name, rel), ("x", "y", "z"), variables, constraints,
                            (note, "all three groups occur: ternary case split"))
        out = _ternary_recursion((name, rel), base)
    return _checked(_inline_into_gadget(out, "delta1", d1))


def _negation_pair_construction(name: str, rel: Relation, xor_gadget: Gadget,
                                base_branch: tuple[str, ...]) -> Gadget:
    """Pin value 0, derived negation (XOR) available: implement a relation
    over x, y, z and their negations from an XOR-triple witness, then run
    the ternary case split."""
    k = rel.arity
    wit = non_affine_witness(rel)
    s, b, c = wit.a, wit.b, wit.c
    scope = tuple(
        _TRIPLE_GROUP[(tuple_bit(s, k, i), tuple_bit(b, k, i), tuple_bit(c, k, i))]
        for i in range(1, k + 1)
    )
    occupied = set(scope)
    note = (f"negation-pair table over {name} from triple "
            f"{format_tuple(s, k)}, {format_tuple(b, k)}, {format_tuple(c, k)}")
    variables: list[str] = []
    constraints: list[Constraint] = [Constraint(name, scope)]
    views: list[str] = []
    for base_var, neg_var in (("x", "xp"), ("y", "yp"), ("z", "zp")):
        if base_var in occupied or neg_var in occupied:
            views.append(base_var)
            variables.append(base_var)
            if neg_var in occupied:
                variables.append(neg_var)
                constraints.append(Constraint("XOR", (base_var, neg_var)))
    if "u" in occupied or "up" in occupied:
        variables.append("u")
        constraints.append(Constraint("delta0", ("u",)))
        if "up" in occupied:
            variables.append("up")
            constraints.append(Constraint("XOR", ("u", "up")))
    if len(views) < 2:
        raise VerificationError("negation-pair table collapsed below two coordinates")
    if len(views) == 2:
        base = _materialize((name, rel), tuple(views), tuple(variables), constraints,
                            base_branch + (note,))
        if "z" not in views:
            out = _claim(base, "NAND", "shared-1 coordinate does not occur")
        else:
            out = _claim(base, "IMPLIES", f"coordinate {'x' if 'x' not in views else 'y'} does not occur")
    else:
        base = _materialize((name, rel), ("x", "y", "z"), tuple(variables), constraints,
                            base_branch + (note, "all coordinates occur: ternary case split"))
        out = _ternary_recursion((name, rel), base)
    out = _inline_into_gadget(out, "XOR", xor_gadget)
    return _checked(out)


def _non_zero_valid_construction(name: str, rel: Relation) -> Gadget:
    """Pin value 0, relation not 0-valid: derive the one-pin, then split
    on AND-closure."""
    d1 = _delta1_gadget(name, rel)
    if _is_and_closed(rel):
        return _and_closed_construction(name, rel, d1)
    k = rel.arity
    t, t2 = _and_violation(rel)
    scope = tuple(_PAIR_GROUP[(tuple_bit(t, k, i), tuple_bit(t2, k, i))] for i in range(1, k + 1))
    occupied = set(scope)
    note = (f"AND-violation of {name} on pair {format_tuple(t, k)}, {format_tuple(t2, k)}")
    variables = tuple(v for v in ("x", "y", "u", "v") if v in occupied)
    constraints = [Constraint(name, scope)]
    if "u" in occupied:
        constraints.append(Constraint("delta0", ("u",)))
    if "v" in occupied:
        constraints.append(Constraint("delta1", ("v",)))
    base = _materialize((name, rel), ("x", "y"), variables, constraints, (note,))
    if (t | t2) in rel:
        out = _claim(base, "OR", "the OR combination stays inside the relation")
        return _checked(_inline_into_gadget(out, "delta1", d1))
    xor_claimed = _claim(base, "XOR", "the OR combination also escapes: negation derived")
    xor_gadget = _checked(_inline_into_gadget(xor_claimed, "delta1", d1))
    out = _negation_pair_construction(name, rel, xor_gadget, xor_gadget.branch)
    return _checked(_inline_into_gadget(out, "delta1", d1))


def _is_and_closed(rel: Relation) -> bool:
    members = list(rel.tuples())
    return all((a & b) in rel for a in members for b in members)


def _dual_name(rel_name: str) -> str:
    if rel_name == "delta0":
        return "delta1"
    if rel_name == "delta1":
        return "delta0"
    return rel_name


def _dualized(g: Gadget, alias: str, name: str, rel: Relation) -> Gadget:
    """Swap the roles of 0 and 1: complement the source table, exchange
    the unary pins, and complement the claimed target."""
    constraints = [
        Constraint(name if c.relation == alias else _dual_name(c.relation), c.scope)
        for c in g.instance.constraints
    ]
    inst = _make_instance((name, rel), g.instance.variables, constraints)
    target = g.target.complemented()
    distinguished = g.distinguished
    target_name = builtin_name(target)
    if target_name is None:
        if target == IMPLIED_BY:
            distinguished = (distinguished[1], distinguished[0])
            target = BUILTINS["IMPLIES"]
            target_name = "IMPLIES"
        else:
            raise VerificationError("dual construction produced an unnamed target")
    out = Gadget(distinguished, inst, target, target_name,
                 g.branch + ("roles of 0 and 1 exchanged throughout",))
    return _checked(out)


def from_non_affine(name: str, rel: Relation, pin: int) -> Gadget:
    """Implement one of OR, IMPLIES, NAND from a non-affine relation with
    the stated pin available.

    pin=0 follows the zero-valid / not-zero-valid split directly; pin=1
    runs the same construction on the 0/1-exchanged relation and maps the
    result back.  All internal choices take lexicographically smallest
    witnesses, so the output is deterministic.
    """
    if pin not in (0, 1):
        raise PreconditionError("pin must be 0 or 1")
    if is_affine(rel):
        raise PreconditionError("relation is affine; nothing harder can be implemented")
    if pin == 1:
        # Run the pin-0 construction on the 0/1-exchanged table under a
        # throwaway alias so reserved names keep their built-in meaning.
        alias = f"{name}__flip"
        dual = from_non_affine(alias, rel.complemented(), 0)
        return _dualized(dual, alias, name, rel)
    if is_0_valid(rel):
        return _zero_valid_construction(name, rel)
    return _non_zero_valid_construction(name, rel)


# ---------------------------------------------------------------------------
# Fixed gadgets used by the hardness chain.


def nand_from_implies_xor() -> Gadget:
    """NAND(x, z) through a middle variable: IMPLIES(x, y) and XOR(y, z)."""
    inst = _make_instance(None, ("x", "z", "y"),
                          [Constraint("IMPLIES", ("x", "y")), Constraint("XOR", ("y", "z"))])
    g = Gadget(("x", "z"), inst, BUILTINS["NAND"], "NAND",
               ("NAND from implication composed with negation",))
    return _checked(g)


def or_or_xor_from_im2_violation(name: str, rel: Relation, witness: Im2Witness) -> Gadget:
    """Collapse an AND/OR closure violation to a binary relation with both
    pins available: an AND violation yields OR or XOR, an OR violation
    yields NAND or XOR."""
    if not witness.check(rel) or witness.arity != rel.arity:
        raise PreconditionError("witness does not certify a closure violation for this relation")
    k = rel.arity
    t, t2 = witness.t, witness.t2
    if witness.op == "AND":
        group = {(0, 0): ("u", 0), (0, 1): ("x", None), (1, 0): ("y", None), (1, 1): ("v", 1)}
        other = t | t2
        target_name = "OR" if other in rel else "XOR"
    else:
        group = {(1, 1): ("u", 1), (1, 0): ("x", None), (0, 1): ("y", None), (0, 0): ("v", 0)}
        other = t & t2
        target_name = "NAND" if other in rel else "XOR"
    scope = []
    pins: dict[str, int] = {}
    for i in range(1, k + 1):
        var, pin = group[(tuple_bit(t, k, i), tuple_bit(t2, k, i))]
        scope.append(var)
        if pin is not None:
            pins[var] = pin
    occupied = set(scope)
    variables = tuple(v for v in ("x", "y", "u", "v") if v in occupied)
    constraints = [Constraint(name, tuple(scope))]
    for var in ("u", "v"):
        if var in occupied:
            constraints.append(Constraint(f"delta{pins[var]}", (var,)))
    note = (f"closure-violation collapse of {name} on "
            f"{format_tuple(t, k)} {witness.op} {format_tuple(t2, k)}")
    g = Gadget(("x", "y"), _make_instance((name, rel), variables, constraints),
               BUILTINS[target_name], target_name, (note,))
    return _checked(g)


# ---------------------------------------------------------------------------
# Text format.


def serialize_gadget(g: Gadget) -> str:
    """Self-contained text form: relation blocks for non-built-in tables,
    a header naming the distinguished variables and the claim, then the
    instance body."""
    out = []
    extra = [(n, r) for n, r in g.instance.used_relations() if n not in BUILTINS]
    if g.target_name not in BUILTINS and g.target_name not in {n for n, _ in extra}:
        extra.append((g.target_name, g.target))
    if extra:
        out.append(serialize_language(ConstraintLanguage(tuple(extra))).rstrip("\n"))
    out.append(f"gadget {len(g.distinguished)} {' '.join(g.distinguished)} claims {g.target_name}")
    out.append(serialize_instance(g.instance).rstrip("\n"))
    return "\n".join(out) + "\n"


def parse_gadget(text: str) -> Gadget:
    """Parse the gadget text format produced by serialize_gadget."""
    lines = text.splitlines()
    header_idx = None
    for i, raw in enumerate(lines):
        line = strip_comment(raw)
        if line.startswith("gadget"):
            header_idx = i
            break
    if header_idx is None:
        raise ParseError("missing gadget header")
    prefix = "\n".join(lines[:header_idx]).strip()
    lang = parse_language(prefix) if prefix else None
    parts = strip_comment(lines[header_idx]).split()
    if len(parts) < 4 or parts[-2] != "claims":
        raise ParseError("expected 'gadget <k> <x1> ... <xk> claims <REL>'", header_idx + 1)
    try:
        k = int(parts[1])
    except ValueError:
        raise ParseError("gadget arity must be an integer", header_idx + 1) from None
    distinguished = tuple(parts[2:-2])
    if len(distinguished) != k:
        raise ParseError("distinguished variable count does not match the declared arity",
                         header_idx + 1)
    target_name = parts[-1]
    body = "\n".join(lines[header_idx + 1 :])
    inst = parse_instance(body, language=lang)
    target = inst.language.resolve(target_name)
    return Gadget(distinguished, inst, target, target_name, ("parsed from text",))

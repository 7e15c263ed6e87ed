import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_count, naive_satisfying_assignments, pendant_count, random_instance
from sharpcsp.errors import ParseError, PreconditionError, ResourceLimitError, UnknownNameError
from sharpcsp.instances import (
    Constraint,
    Instance,
    assignments,
    brute_force_count,
    forced_vars,
    parse_instance,
    pinned_vars,
    satisfies,
    serialize_instance,
)
from sharpcsp.relations import BUILTINS, ConstraintLanguage, Relation, builtin

LANG = ConstraintLanguage(tuple(BUILTINS.items()))


def inst(variables, *constraints, lang=LANG):
    return Instance(lang, tuple(variables), tuple(Constraint(r, tuple(s)) for r, s in constraints))


class TestModel:
    def test_scope_arity_checked(self):
        with pytest.raises(PreconditionError):
            inst("x", ("OR", "x"))

    def test_undeclared_variable(self):
        with pytest.raises(PreconditionError):
            inst("x", ("OR", ("x", "y")))

    def test_repeated_scope_variables_allowed(self):
        i = inst("x", ("NAND", ("x", "x")))
        assert brute_force_count(i) == 1  # only x=0

    def test_satisfies(self):
        i = inst("xy", ("IMPLIES", ("x", "y")))
        assert not satisfies(i, {"x": 1, "y": 0})
        assert satisfies(i, {"x": 0, "y": 1})
        j = inst("x", ("NAND", ("x", "x")))
        assert not satisfies(j, {"x": 1})

    def test_satisfies_requires_total_assignment(self):
        i = inst("xy", ("IMPLIES", ("x", "y")))
        with pytest.raises(PreconditionError):
            satisfies(i, {"x": 0})


class TestCounting:
    def test_examples(self):
        assert brute_force_count(inst("uv", ("NAND", ("u", "v")))) == 3
        chain = inst("abc", ("IMPLIES", ("a", "b")), ("IMPLIES", ("b", "c")))
        assert brute_force_count(chain) == 4
        assert brute_force_count(inst("abcde")) == 32

    def test_cap(self):
        free = Instance(LANG, tuple(f"v{i}" for i in range(30)), ())
        with pytest.raises(ResourceLimitError):
            brute_force_count(free)
        assert brute_force_count(free, cap=30) == 1 << 30

    def test_matches_naive_enumeration(self):
        rng = random.Random(11)
        names = ("OR", "NAND", "IMPLIES", "XOR", "delta0", "delta1")
        for _ in range(40):
            i = random_instance(rng, LANG, names, rng.randint(1, 6), rng.randint(0, 6))
            assert brute_force_count(i) == naive_count(i)

    def test_count_matches_satisfies_over_assignments(self):
        i = inst("abc", ("OR", ("a", "b")), ("XOR", ("b", "c")))
        direct = sum(1 for sigma in assignments(i) if satisfies(i, sigma))
        assert brute_force_count(i) == direct

    def test_invariant_under_renaming_and_reordering(self):
        rng = random.Random(5)
        names = ("OR", "NAND", "IMPLIES", "XOR")
        for _ in range(20):
            i = random_instance(rng, LANG, names, rng.randint(2, 6), rng.randint(1, 5))
            renamed = Instance(
                LANG,
                tuple(f"w_{v}" for v in i.variables),
                tuple(Constraint(c.relation, tuple(f"w_{v}" for v in c.scope))
                      for c in i.constraints),
            )
            shuffled = list(i.constraints)
            rng.shuffle(shuffled)
            reordered = Instance(LANG, i.variables, tuple(shuffled))
            assert brute_force_count(renamed) == brute_force_count(i)
            assert brute_force_count(reordered) == brute_force_count(i)

    def test_duplicate_constraints_are_count_neutral(self):
        once = inst("xy", ("NAND", ("x", "y")))
        twice = inst("xy", ("NAND", ("x", "y")), ("NAND", ("x", "y")))
        assert brute_force_count(once) == brute_force_count(twice)

    def test_pendant_oracle_agrees_on_small_cases(self):
        i = inst("xyf",
                 ("IMPLIES", ("x", "y")),
                 ("IMPLIES", ("x", "f")))
        assert pendant_count(i, ("x", "y")) == brute_force_count(i)
        j = inst("xy")
        assert pendant_count(j, ("x",)) == 4


class TestPins:
    def test_pinned_vars(self):
        i = inst("xy", ("delta0", ("x",)), ("IMPLIES", ("x", "y")))
        assert pinned_vars(i, 0) == {"x"}
        assert pinned_vars(i, 1) == set()
        assert pinned_vars(inst("xy", ("IMPLIES", ("x", "y"))), 0) == set()
        dup = inst("x", ("delta0", ("x",)), ("delta0", ("x",)))
        assert pinned_vars(dup, 0) == {"x"}

    def test_forced_vars(self):
        i = inst("ab", ("IMPLIES", ("a", "b")), ("delta0", ("b",)))
        assert forced_vars(i) == ({"a", "b"}, set())
        i = inst("ab", ("delta1", ("a",)), ("IMPLIES", ("a", "b")))
        assert forced_vars(i) == (set(), {"a", "b"})
        i = inst("ab", ("IMPLIES", ("a", "b")))
        assert forced_vars(i) == (set(), set())

    def test_forced_vars_requires_atomic(self):
        with pytest.raises(PreconditionError):
            forced_vars(inst("xy", ("OR", ("x", "y"))))

    def test_clashing_forces_mean_zero_count(self):
        i = inst("xy", ("delta1", ("x",)), ("IMPLIES", ("x", "y")), ("delta0", ("y",)))
        n0, n1 = forced_vars(i)
        assert n0 & n1
        assert brute_force_count(i) == 0


class TestParsing:
    def test_basic(self):
        i = parse_instance("vars x y\nconstraint IMPLIES x y\n")
        assert i.variables == ("x", "y")
        assert i.constraints == (Constraint("IMPLIES", ("x", "y")),)

    def test_arity_mismatch(self):
        with pytest.raises(ParseError):
            parse_instance("vars x\nconstraint OR x\n")

    def test_unknown_relation(self):
        with pytest.raises(UnknownNameError):
            parse_instance("vars x\nconstraint FOO x\n")

    def test_undeclared_variable(self):
        with pytest.raises(ParseError) as err:
            parse_instance("vars x\nconstraint delta0 y\n")
        assert err.value.line == 2

    def test_unknown_directive(self):
        with pytest.raises(ParseError):
            parse_instance("frobnicate x\n")

    def test_comments_and_multiple_vars_lines(self):
        i = parse_instance("# instance\nvars a b\nvars c\nconstraint XOR a c # tail\n")
        assert i.variables == ("a", "b", "c")

    def test_language_line(self, tmp_path):
        (tmp_path / "even.cl").write_text(
            "relation EVEN 3\n000\n011\n101\n110\nend\n", encoding="utf-8")
        i = parse_instance("language even.cl\nvars a b c\nconstraint EVEN a b c\n",
                           base_dir=tmp_path)
        assert brute_force_count(i) == 4

    def test_missing_language_file(self):
        with pytest.raises(ParseError):
            parse_instance("language nope.cl\nvars x\n")

    def test_round_trip(self):
        i = inst("abc", ("OR", ("a", "b")), ("delta0", ("c",)))
        text = serialize_instance(i)
        j = parse_instance(text)
        assert j.variables == i.variables
        assert j.constraints == i.constraints

    def test_round_trip_with_custom_relation(self):
        even = Relation.from_bitstrings(["000", "011", "101", "110"])
        lang = ConstraintLanguage.of(("EVEN", even))
        i = Instance(lang.merged(LANG), ("a", "b", "c"),
                     (Constraint("EVEN", ("a", "b", "c")),))
        text = serialize_instance(i, include_language=True)
        j = parse_instance(text)
        assert j.constraints == i.constraints
        assert j.relation_of(j.constraints[0]) == even


@given(st.integers(min_value=1, max_value=5), st.data())
@settings(max_examples=60, deadline=None)
def test_every_assignment_counted_once(n, data):
    names = ("OR", "NAND", "IMPLIES", "XOR", "delta0", "delta1")
    variables = tuple(f"v{i}" for i in range(n))
    k = data.draw(st.integers(min_value=0, max_value=4))
    constraints = []
    for _ in range(k):
        name = data.draw(st.sampled_from(names))
        arity = LANG.resolve(name).arity
        scope = tuple(data.draw(st.sampled_from(variables)) for _ in range(arity))
        constraints.append(Constraint(name, scope))
    i = Instance(LANG, variables, tuple(constraints))
    sigmas = naive_satisfying_assignments(i)
    assert brute_force_count(i) == len(sigmas)
    for sigma in sigmas:
        assert satisfies(i, sigma)

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import affine_by_triples, im2_by_pairs, solution_tuples_of_atoms
from sharpcsp.errors import (
    NoWitnessError,
    ParseError,
    PreconditionError,
    UnknownNameError,
)
from sharpcsp.relations import (
    BUILTINS,
    ConstraintLanguage,
    Relation,
    atoms_relation,
    builtin,
    entailed_atoms,
    format_atom,
    format_tuple,
    im2_formula,
    im2_witness,
    is_0_valid,
    is_1_valid,
    is_affine,
    is_complement_closed,
    is_in_im2,
    majority_column,
    non_affine_from_anchor,
    non_affine_pair,
    non_affine_witness,
    parse_language,
    serialize_language,
    tuple_op,
)

PARITY3 = Relation.from_bitstrings(["001", "010", "100", "111"])


def rel(*strings):
    return Relation.from_bitstrings(strings)


small_relations = st.integers(min_value=1, max_value=3).flatmap(
    lambda k: st.integers(min_value=0, max_value=(1 << (1 << k)) - 1).map(
        lambda mask: Relation(k, mask)
    )
)


class TestBuiltins:
    def test_tables(self):
        assert builtin("OR").bitstrings() == ["01", "10", "11"]
        assert builtin("IMPLIES").bitstrings() == ["00", "01", "11"]
        assert builtin("NAND").bitstrings() == ["00", "01", "10"]
        assert builtin("XOR").bitstrings() == ["01", "10"]
        assert builtin("delta0").bitstrings() == ["0"]
        assert builtin("delta1").bitstrings() == ["1"]

    def test_unknown_name(self):
        with pytest.raises(UnknownNameError):
            builtin("FOO")


class TestTupleOps:
    def test_componentwise(self):
        assert tuple_op("XOR3", [0b001, 0b010, 0b100], 3) == 0b111
        assert tuple_op("AND", [0b01, 0b10], 2) == 0b00
        assert tuple_op("OR", [0b01, 0b10], 2) == 0b11
        assert tuple_op("XOR2", [0b01, 0b11], 2) == 0b10

    def test_count_mismatch(self):
        with pytest.raises(PreconditionError):
            tuple_op("XOR3", [0b01, 0b10], 2)

    def test_range_mismatch(self):
        with pytest.raises(PreconditionError):
            tuple_op("AND", [0b01, 0b100], 2)

    def test_format(self):
        assert format_tuple(0b01, 2) == "01"
        assert format_tuple(5, 4) == "0101"


class TestPredicates:
    def test_validity(self):
        assert is_0_valid(builtin("IMPLIES"))
        assert is_1_valid(builtin("IMPLIES"))
        assert not is_0_valid(builtin("OR"))
        assert not is_1_valid(builtin("NAND"))

    def test_complement_closed(self):
        assert is_complement_closed(builtin("XOR"))
        assert not is_complement_closed(builtin("IMPLIES"))

    def test_affine(self):
        assert is_affine(PARITY3)
        assert not is_affine(builtin("IMPLIES"))
        assert is_affine(builtin("XOR"))
        assert is_affine(Relation.empty(2))
        assert is_affine(Relation.full(3))

    def test_im2(self):
        assert is_in_im2(builtin("IMPLIES"))
        assert not is_in_im2(builtin("OR"))
        assert not is_in_im2(builtin("NAND"))
        assert is_in_im2(Relation.empty(2))

    @given(small_relations)
    @settings(max_examples=300, deadline=None)
    def test_affine_matches_triple_oracle(self, r):
        assert is_affine(r) == affine_by_triples(r)

    @given(small_relations)
    @settings(max_examples=300, deadline=None)
    def test_im2_matches_pair_oracle(self, r):
        assert is_in_im2(r) == im2_by_pairs(r)

    @given(small_relations, st.permutations([0, 1, 2]))
    @settings(max_examples=200, deadline=None)
    def test_predicates_invariant_under_position_permutation(self, r, perm):
        p = r.permuted(tuple(perm[: r.arity])) if r.arity == 3 else r
        if r.arity == 3:
            assert is_affine(p) == is_affine(r)
            assert is_in_im2(p) == is_in_im2(r)
            assert is_0_valid(p) == is_0_valid(r)
            assert is_1_valid(p) == is_1_valid(r)
            assert is_complement_closed(p) == is_complement_closed(r)

    def test_affine_differences_form_a_subspace(self):
        # For affine R the pairwise differences from a fixed member are
        # closed under XOR.
        for r in (PARITY3, builtin("XOR"), rel("0011", "0101", "0110", "0000")):
            if not is_affine(r):
                continue
            members = list(r.tuples())
            a = members[0]
            diffs = {a ^ b for b in members}
            for u in diffs:
                for v in diffs:
                    assert (u ^ v) in diffs


class TestWitnesses:
    def test_pair_on_nand(self):
        w = non_affine_pair(builtin("NAND"))
        assert (w.a, w.b, w.d) == (0b01, 0b10, 0b11)
        assert w.check(builtin("NAND"))

    def test_triple_on_or(self):
        w = non_affine_witness(builtin("OR"))
        assert (w.a, w.b, w.c, w.d) == (0b01, 0b10, 0b11, 0b00)
        assert w.check(builtin("OR"))

    def test_anchor_on_implies(self):
        assert non_affine_from_anchor(builtin("IMPLIES"), 0b00) == (0b01, 0b11)

    def test_anchor_requires_membership(self):
        with pytest.raises(PreconditionError):
            non_affine_from_anchor(builtin("IMPLIES"), 0b10)

    def test_affine_has_no_witness(self):
        with pytest.raises(NoWitnessError):
            non_affine_witness(builtin("XOR"))
        with pytest.raises(NoWitnessError):
            non_affine_pair(PARITY3)

    def test_im2_witnesses(self):
        w = im2_witness(builtin("OR"))
        assert (w.t, w.t2, w.op, w.result) == (0b01, 0b10, "AND", 0b00)
        w = im2_witness(builtin("NAND"))
        assert (w.t, w.t2, w.op, w.result) == (0b01, 0b10, "OR", 0b11)
        w = im2_witness(builtin("XOR"))
        assert (w.t, w.t2, w.op, w.result) == (0b01, 0b10, "AND", 0b00)

    def test_im2_member_has_no_witness(self):
        with pytest.raises(NoWitnessError):
            im2_witness(builtin("IMPLIES"))

    @given(small_relations)
    @settings(max_examples=300, deadline=None)
    def test_witnesses_satisfy_their_conditions(self, r):
        if not is_affine(r):
            assert non_affine_witness(r).check(r)
            assert non_affine_pair(r).check(r)
            a = next(r.tuples())
            b, c = non_affine_from_anchor(r, a)
            assert b in r and c in r and (a ^ b ^ c) not in r
        if not is_in_im2(r):
            assert im2_witness(r).check(r)


class TestIm2Formula:
    def test_implies(self):
        f = im2_formula(builtin("IMPLIES"))
        assert [format_atom(a) for a in f.atoms] == ["Implies(1,2)"]

    def test_single_pair(self):
        f = im2_formula(rel("00"))
        assert [format_atom(a) for a in f.atoms] == [
            "Zero(1)", "Zero(2)", "Implies(1,2)", "Implies(2,1)",
        ]

    def test_delta1(self):
        f = im2_formula(builtin("delta1"))
        assert [format_atom(a) for a in f.atoms] == ["One(1)"]

    def test_solution_set_round_trip(self):
        for r in (builtin("IMPLIES"), rel("00"), builtin("delta1"), Relation.full(2)):
            assert im2_formula(r).solution_relation() == r

    def test_rejects_empty_and_nonmembers(self):
        with pytest.raises(PreconditionError):
            im2_formula(Relation.empty(2))
        with pytest.raises(PreconditionError):
            im2_formula(builtin("OR"))

    def test_entailed_atoms_agree_with_loop_oracle(self):
        for mask in range(1 << 4):
            r = Relation(2, mask)
            atoms = entailed_atoms(r)
            sols = solution_tuples_of_atoms(atoms, 2)
            assert atoms_relation(atoms, 2).mask == sum(1 << t for t in sols)


class TestMajorityColumn:
    def test_examples(self):
        m = majority_column(builtin("IMPLIES"))
        assert (m.position, m.value, m.majority, m.minority) == (1, 0, 2, 1)
        assert majority_column(builtin("XOR")) is None
        m = majority_column(builtin("delta1"))
        assert (m.position, m.value, m.majority, m.minority) == (1, 1, 1, 0)


class TestLanguage:
    def test_reserved_names_must_match(self):
        with pytest.raises(PreconditionError):
            ConstraintLanguage((("OR", builtin("NAND")),))

    def test_duplicates_rejected(self):
        with pytest.raises(PreconditionError):
            ConstraintLanguage((("A", builtin("OR")), ("A", builtin("OR"))))

    def test_nonempty(self):
        with pytest.raises(PreconditionError):
            ConstraintLanguage(())

    def test_lookup_and_merge(self):
        lang = ConstraintLanguage.of("OR", ("MINE", PARITY3))
        assert lang["MINE"] == PARITY3
        assert "OR" in lang
        merged = lang.merged(ConstraintLanguage.of("NAND"))
        assert merged.names() == ("OR", "MINE", "NAND")
        assert lang.resolve("delta0") == builtin("delta0")


class TestLanguageFormat:
    def test_round_trip(self):
        lang = ConstraintLanguage.of(("EVEN", rel("000", "011", "101", "110")), "IMPLIES")
        text = serialize_language(lang)
        again = parse_language(text)
        assert again.items() == lang.items()

    def test_comments_and_blanks(self):
        lang = parse_language("# header\nrelation R 2\n01  # a tuple\n\nend\n")
        assert lang["R"].bitstrings() == ["01"]

    def test_reserved_block_must_restate_builtin(self):
        with pytest.raises(ParseError):
            parse_language("relation OR 2\n00\nend\n")
        lang = parse_language("relation OR 2\n01\n10\n11\nend\n")
        assert lang["OR"] == builtin("OR")

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ParseError) as err:
            parse_language("relation R 2\n01\n021\nend\n")
        assert err.value.line == 3

    def test_missing_end(self):
        with pytest.raises(ParseError):
            parse_language("relation R 2\n01\n")

    def test_empty_relation_block(self):
        lang = parse_language("relation NONE 2\nend\n")
        assert len(lang["NONE"]) == 0

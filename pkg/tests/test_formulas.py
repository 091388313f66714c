"""Containers, query negation, and DIMACS-style serialization."""

import math

import pytest
from hypothesis import given, strategies as st

from beliefx import (
    HARD,
    BeliefBase,
    Clause,
    KnowledgeBase,
    ParseError,
    PreconditionError,
    Query,
    WeightedClause,
    World,
    classical_projection,
    format_weight,
    negate_query,
    parse_cnf,
    parse_query,
    parse_wcnf,
    write_cnf,
    write_query,
    write_wcnf,
)

literals = st.integers(min_value=-8, max_value=8).filter(lambda l: l != 0)
clause_lits = st.lists(literals, min_size=1, max_size=6)


# ---------------------------------------------------------------------------
# Clause


class TestClause:
    def test_canonical_order_and_dedup(self):
        c = Clause((3, -1, 3, 2, -1))
        assert c.literals == (-1, 2, 3)

    def test_negative_before_positive_same_var(self):
        assert Clause((2, -2)).literals == (-2, 2)

    def test_equality_is_structural(self):
        assert Clause((1, 2)) == Clause((2, 1, 1))
        assert hash(Clause((1, 2))) == hash(Clause((2, 1)))

    def test_rejects_zero_literal(self):
        with pytest.raises(ValueError):
            Clause((1, 0))

    def test_rejects_non_int(self):
        with pytest.raises(ValueError):
            Clause((1, "2"))

    def test_tautology_detection(self):
        assert Clause((1, -1, 2)).is_tautology
        assert not Clause((1, 2)).is_tautology

    def test_max_var(self):
        assert Clause((-7, 2)).max_var == 7
        assert Clause((1,)).max_var == 1

    def test_satisfied_by(self):
        c = Clause((-1, 2))
        assert c.satisfied_by({1: False})
        assert c.satisfied_by({1: True, 2: True})
        assert not c.satisfied_by({1: True, 2: False})

    def test_str_is_dimacs(self):
        assert str(Clause((2, -1))) == "-1 2 0"

    def test_len_and_iter(self):
        c = Clause((3, 1))
        assert len(c) == 2
        assert list(c) == [1, 3]

    @given(clause_lits)
    def test_canonicalization_idempotent(self, lits):
        c = Clause(lits)
        assert Clause(c.literals) == c
        assert list(c.literals) == sorted(set(lits), key=lambda l: (abs(l), l))


# ---------------------------------------------------------------------------
# WeightedClause


class TestWeightedClause:
    def test_soft_weight_kept(self):
        e = WeightedClause(Clause((1,)), 2.5)
        assert e.weight == 2.5
        assert not e.is_hard

    def test_hard_marker(self):
        e = WeightedClause(Clause((1,)), HARD)
        assert e.is_hard

    @pytest.mark.parametrize("w", [0.0, -1.0, math.nan, -math.inf])
    def test_rejects_bad_weights(self, w):
        with pytest.raises(ValueError):
            WeightedClause(Clause((1,)), w)


# ---------------------------------------------------------------------------
# KnowledgeBase / BeliefBase


class TestKnowledgeBase:
    def test_accepts_raw_literal_iterables(self):
        kb = KnowledgeBase([(1, 2), (-2,)])
        assert kb.clauses == (Clause((1, 2)), Clause((-2,)))

    def test_num_vars_inferred(self):
        assert KnowledgeBase([(1, 5)]).num_vars == 5

    def test_num_vars_explicit(self):
        assert KnowledgeBase([(1,)], 4).num_vars == 4

    def test_rejects_clause_above_num_vars(self):
        with pytest.raises(ValueError):
            KnowledgeBase([(1, 5)], 4)

    def test_rejects_empty_clause(self):
        with pytest.raises(ValueError):
            KnowledgeBase([()])

    def test_rejects_tautology(self):
        with pytest.raises(ValueError):
            KnowledgeBase([(1, -1)])

    def test_subset_keeps_num_vars(self):
        kb = KnowledgeBase([(1,), (2,), (3,)], 5)
        sub = kb.subset([2, 0])
        assert sub.clauses == (Clause((1,)), Clause((3,)))
        assert sub.num_vars == 5

    def test_sequence_protocol(self):
        kb = KnowledgeBase([(1,), (2,)])
        assert len(kb) == 2
        assert kb[1] == Clause((2,))
        assert list(kb) == [Clause((1,)), Clause((2,))]


class TestBeliefBase:
    def test_accepts_pairs_and_entries(self):
        base = BeliefBase([(Clause((1,)), 2.0), WeightedClause(Clause((2,)), HARD)])
        assert base.entries[0] == WeightedClause(Clause((1,)), 2.0)
        assert base.entries[1].is_hard

    def test_accepts_raw_literal_pairs(self):
        base = BeliefBase([((1, -2), 1.5)])
        assert base.entries[0].clause == Clause((1, -2))

    def test_hard_soft_split(self):
        base = BeliefBase([((1,), HARD), ((2,), 1.0), ((3,), HARD)])
        assert base.hard_clauses == (Clause((1,)), Clause((3,)))
        assert base.soft_entries == (WeightedClause(Clause((2,)), 1.0),)

    def test_check_hard_satisfiable_passes(self):
        BeliefBase([((1,), HARD)]).check_hard_satisfiable()

    def test_check_hard_satisfiable_raises(self):
        base = BeliefBase([((1,), HARD), ((-1,), HARD)])
        with pytest.raises(PreconditionError):
            base.check_hard_satisfiable()

    def test_rejects_tautological_entry(self):
        with pytest.raises(ValueError):
            BeliefBase([((1, -1), 1.0)])

    def test_classical_projection_keeps_order(self):
        base = BeliefBase([((2,), 1.0), ((1,), HARD)], 3)
        kb = classical_projection(base)
        assert kb.clauses == (Clause((2,)), Clause((1,)))
        assert kb.num_vars == 3


# ---------------------------------------------------------------------------
# Query / World


class TestQuery:
    def test_from_single_clause(self):
        q = Query(Clause((1, 2)))
        assert q.clauses == (Clause((1, 2)),)

    def test_literal_and_literals(self):
        assert Query.literal(-3).clauses == (Clause((-3,)),)
        assert Query.literals([1, -2]).clauses == (Clause((1,)), Clause((-2,)))

    def test_tautological_clause_allowed(self):
        q = Query([(1, -1)])
        assert q.clauses[0].is_tautology

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Query(())
        with pytest.raises(ValueError):
            Query([()])

    def test_check_against(self):
        Query.literal(3).check_against(3)
        with pytest.raises(PreconditionError):
            Query.literal(4).check_against(3)


class TestWorld:
    def test_value_and_literal(self):
        w = World((True, False))
        assert w.value(1) and not w.value(2)
        assert w.satisfies_literal(1) and w.satisfies_literal(-2)
        assert not w.satisfies_literal(-1)

    def test_clause_semantics(self):
        w = World((False, True))
        assert w.satisfies_clause(Clause((-1,)))
        assert w.satisfies_all([Clause((-1,)), Clause((2,))])
        assert not w.satisfies_clause(Clause((1,)))

    def test_from_index_bit_layout(self):
        # bit v-1 of the index carries variable v
        assert World.from_index(0b101, 3).values == (True, False, True)

    @given(st.integers(min_value=0, max_value=255))
    def test_index_round_trip(self, idx):
        assert World.from_index(idx, 8).to_index() == idx


# ---------------------------------------------------------------------------
# negate_query


def _models(clauses, num_vars):
    out = set()
    for idx in range(1 << num_vars):
        w = World.from_index(idx, num_vars)
        if w.satisfies_all(clauses):
            out.add(idx)
    return out


class TestNegateQuery:
    def test_unit_conjunction_becomes_one_clause(self):
        neg = negate_query(Query.literals([1, -2]), 4)
        assert neg == (Clause((-1, 2)),)

    def test_general_query_uses_selectors(self):
        q = Query([(1, 2), (3,)])
        neg = negate_query(q, 3)
        assert neg[0] == Clause((4, 5))  # one selector per query clause
        assert all(c.max_var <= 5 for c in neg)

    @given(
        st.lists(
            st.lists(
                st.integers(min_value=-4, max_value=4).filter(lambda l: l != 0),
                min_size=1,
                max_size=3,
            ),
            min_size=1,
            max_size=3,
        )
    )
    def test_negation_is_complement_over_base_vars(self, clause_lists):
        q = Query([Clause(lits) for lits in clause_lists])
        n = 4
        neg = negate_query(q, n)
        q_models = _models(q.clauses, n)
        # worlds extendable to a model of the negation == complement of q's models
        extra = max(n, max((c.max_var for c in neg), default=n))
        neg_models = {idx & ((1 << n) - 1) for idx in _models(neg, extra)}
        assert neg_models == set(range(1 << n)) - q_models


# ---------------------------------------------------------------------------
# serialization


class TestCnfFormat:
    def test_parse_basic(self):
        kb = parse_cnf("c comment\np cnf 3 2\n1 -2 0\n3 0\n")
        assert kb.num_vars == 3
        assert kb.clauses == (Clause((1, -2)), Clause((3,)))

    def test_round_trip(self):
        kb = KnowledgeBase([(1, -2), (3,), (-1, -3)], 4)
        assert parse_cnf(write_cnf(kb)) == kb

    def test_parse_accepts_bytes(self):
        assert parse_cnf(b"p cnf 1 1\n1 0\n").num_vars == 1

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("1 0\n", "header"),
            ("p cnf 1 1\np cnf 1 1\n1 0\n", "duplicate header"),
            ("p cnf x 1\n1 0\n", "malformed header"),
            ("p cnf 1 2\n1 0\n", "announced 2"),
            ("p cnf 1 1\n2 0\n", "out of range"),
            ("p cnf 1 1\n1\n", "end with 0"),
            ("p cnf 1 1\n1 0 1 0\n", "0 inside"),
            ("p cnf 1 1\nq 0\n", "bad literal"),
            ("p cnf 2 1\n1 -1 0\n", "tautological"),
        ],
    )
    def test_parse_errors(self, text, fragment):
        with pytest.raises(ParseError, match=fragment):
            parse_cnf(text)

    def test_error_carries_line_number(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_cnf("c x\np cnf 1 1\n1\n")


class TestWcnfFormat:
    def test_parse_hard_and_soft(self):
        base = parse_wcnf("c x\nh 1 2 0\n2.5 -1 0\n")
        assert base.entries[0] == WeightedClause(Clause((1, 2)), HARD)
        assert base.entries[1] == WeightedClause(Clause((-1,)), 2.5)

    def test_round_trip(self):
        base = BeliefBase([((1, -2), 0.125), ((2,), HARD), ((-1,), 3.0)])
        again = parse_wcnf(write_wcnf(base))
        assert again.entries == base.entries
        assert again.num_vars == base.num_vars

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("p wcnf 1 1\n1 1 0\n", "headers are not used"),
            ("x 1 0\n", "bad weight"),
            ("0 1 0\n", "positive and finite"),
            ("-2 1 0\n", "positive and finite"),
            ("inf 1 0\n", "positive and finite"),
            ("1 1 -1 0\n", "tautological"),
            ("1 1\n", "end with 0"),
            ("", "no clauses"),
        ],
    )
    def test_parse_errors(self, text, fragment):
        with pytest.raises(ParseError, match=fragment):
            parse_wcnf(text)

    @given(st.floats(min_value=0.001, max_value=1000.0, allow_nan=False))
    def test_weight_format_round_trips(self, w):
        w = float(format_weight(w))  # generator weights are pre-rounded the same way
        assert float(format_weight(w)) == w

    def test_format_weight_compact(self):
        assert format_weight(3.0) == "3"
        assert format_weight(0.5) == "0.5"


class TestQueryFormat:
    def test_parse_conjunction(self):
        q = parse_query("1 0\n-2 3 0\n")
        assert q.clauses == (Clause((1,)), Clause((-2, 3)))

    def test_round_trip(self):
        q = Query([(1, -4), (2,)])
        assert parse_query(write_query(q)) == q

    def test_comments_skipped(self):
        assert parse_query("c hi\n1 0\n") == Query.literal(1)

    @pytest.mark.parametrize(
        "text, fragment",
        [("", "no clauses"), ("1\n", "end with 0"), ("1 0 2\n", "end with 0")],
    )
    def test_parse_errors(self, text, fragment):
        with pytest.raises(ParseError, match=fragment):
            parse_query(text)

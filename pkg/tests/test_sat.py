"""CDCL engine: satisfiability, models, assumptions, entailment, backbones."""

import random

import pytest

from beliefx import (
    Clause,
    KnowledgeBase,
    PreconditionError,
    Query,
    backbone,
    entails,
    is_sat,
)


def C(*lits):
    return Clause(lits)


def _brute_sat(clauses, num_vars):
    for idx in range(1 << num_vars):
        if all(
            any((idx >> (abs(l) - 1)) & 1 == (l > 0) for l in c) for c in clauses
        ):
            return True
    return False


def _random_clauses(rng, num_vars, num_clauses, width=3):
    out = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), min(width, num_vars))
        out.append(Clause(tuple(v if rng.random() < 0.5 else -v for v in vs)))
    return out


class TestIsSat:
    def test_empty_input_is_sat_all_false(self):
        r = is_sat([], num_vars=3)
        assert r.satisfiable
        assert r.model.values == (False, False, False)

    def test_unit_propagation(self):
        r = is_sat([C(1), C(-1, 2)])
        assert r.satisfiable
        assert r.model.values == (True, True)

    def test_unsat_pair(self):
        assert not is_sat([C(1), C(-1)]).satisfiable

    def test_empty_clause_is_unsat(self):
        assert not is_sat([()], num_vars=1).satisfiable

    def test_model_satisfies_all_clauses(self):
        clauses = [C(1, 2, 3), C(-1, -2), C(-2, -3), C(2, 3)]
        r = is_sat(clauses)
        assert r.satisfiable
        assert r.model.satisfies_all(clauses)

    def test_unassigned_vars_complete_false(self):
        r = is_sat([C(2)], num_vars=4)
        assert r.model.values == (False, True, False, False)

    def test_accepts_raw_literal_lists(self):
        assert is_sat([[1, -2], [2]]).satisfiable

    def test_num_vars_guard(self):
        with pytest.raises(ValueError):
            is_sat([C(3)], num_vars=2)

    def test_model_covers_declared_num_vars(self):
        r = is_sat([C(1)], num_vars=5)
        assert r.model.num_vars == 5

    def test_deterministic(self):
        clauses = _random_clauses(random.Random(5), 12, 30)
        a = is_sat(clauses, num_vars=12)
        b = is_sat(clauses, num_vars=12)
        assert a.satisfiable == b.satisfiable
        if a.satisfiable:
            assert a.model == b.model

    def test_pigeonhole_3_into_2_unsat(self):
        # variable p_{i,j}: pigeon i sits in hole j
        def v(i, j):
            return 2 * i + j + 1

        clauses = [C(v(i, 0), v(i, 1)) for i in range(3)]
        for j in range(2):
            for i in range(3):
                for k in range(i + 1, 3):
                    clauses.append(C(-v(i, j), -v(k, j)))
        assert not is_sat(clauses).satisfiable

    def test_agrees_with_brute_force_on_random_instances(self):
        rng = random.Random(20260814)
        for _ in range(150):
            n = rng.randint(1, 6)
            clauses = _random_clauses(rng, n, rng.randint(1, 12), width=min(3, n))
            got = is_sat(clauses, num_vars=n)
            assert got.satisfiable == _brute_sat(clauses, n)
            if got.satisfiable:
                assert got.model.satisfies_all(clauses)

    def test_medium_random_instance(self):
        rng = random.Random(99)
        clauses = _random_clauses(rng, 60, 240)
        r = is_sat(clauses, num_vars=60)
        if r.satisfiable:
            assert r.model.satisfies_all(clauses)


class TestAssumptions:
    def test_assumption_forces_polarity(self):
        r = is_sat([C(1, 2)], assumptions=(-1,))
        assert r.satisfiable
        assert r.model.values == (False, True)

    def test_assumptions_can_make_unsat(self):
        assert not is_sat([C(1, 2)], assumptions=(-1, -2)).satisfiable

    def test_contradictory_assumptions(self):
        assert not is_sat([], assumptions=(1, -1), num_vars=1).satisfiable

    def test_assumption_extends_num_vars(self):
        r = is_sat([C(1)], assumptions=(4,))
        assert r.model.num_vars == 4

    def test_clauses_stay_unsat_regardless(self):
        assert not is_sat([C(1), C(-1)], assumptions=(2,)).satisfiable

    def test_matches_unit_clause_semantics(self):
        rng = random.Random(3)
        for _ in range(80):
            n = rng.randint(2, 6)
            clauses = _random_clauses(rng, n, rng.randint(1, 10), width=min(3, n))
            lit = rng.choice([l for l in range(-n, n + 1) if l != 0])
            via_assumption = is_sat(clauses, assumptions=(lit,), num_vars=n)
            via_clause = is_sat(clauses + [C(lit)], num_vars=n)
            assert via_assumption.satisfiable == via_clause.satisfiable


class TestEntails:
    def test_modus_ponens(self):
        kb = KnowledgeBase([C(1), C(-1, 2)])
        assert entails(kb, Query.literal(2))

    def test_not_entailed(self):
        kb = KnowledgeBase([C(1, 2)])
        assert not entails(kb, Query.literal(1))

    def test_multi_clause_query(self):
        kb = KnowledgeBase([C(1), C(2, 3), C(-3)])
        assert entails(kb, Query([(1,), (2, 3)]))
        assert entails(kb, Query.literals([1, 2]))

    def test_wide_query_clause_uses_selectors(self):
        kb = KnowledgeBase([C(1, 2)], num_vars=3)
        assert entails(kb, Query([(1, 2)]))
        assert not entails(kb, Query([(1, 3)]))

    def test_inconsistent_kb_raises(self):
        kb = KnowledgeBase([C(1), C(-1)])
        with pytest.raises(PreconditionError):
            entails(kb, Query.literal(1))

    def test_query_variable_out_of_range(self):
        kb = KnowledgeBase([C(1)])
        with pytest.raises(PreconditionError):
            entails(kb, Query.literal(2))


class TestBackbone:
    def test_forced_chain(self):
        kb = KnowledgeBase([C(1), C(-1, 2), C(-2, 3)])
        assert backbone(kb) == frozenset({1, 2, 3})

    def test_free_variables_excluded(self):
        kb = KnowledgeBase([C(1)], num_vars=3)
        assert backbone(kb) == frozenset({1})

    def test_empty_backbone(self):
        kb = KnowledgeBase([C(1, 2)])
        assert backbone(kb) == frozenset()

    def test_negative_literals(self):
        kb = KnowledgeBase([C(-2), C(2, -1)])
        assert backbone(kb) == frozenset({-1, -2})

    def test_inconsistent_raises(self):
        with pytest.raises(PreconditionError):
            backbone(KnowledgeBase([C(1), C(-1)]))

    def test_matches_brute_force(self):
        rng = random.Random(17)
        checked = 0
        while checked < 60:
            n = rng.randint(2, 7)
            clauses = _random_clauses(rng, n, rng.randint(2, 12), width=min(3, n))
            models = [
                idx
                for idx in range(1 << n)
                if all(
                    any((idx >> (abs(l) - 1)) & 1 == (l > 0) for l in c)
                    for c in clauses
                )
            ]
            if not models:
                continue
            expected = set()
            for v in range(1, n + 1):
                vals = {(idx >> (v - 1)) & 1 for idx in models}
                if vals == {1}:
                    expected.add(v)
                elif vals == {0}:
                    expected.add(-v)
            kb = KnowledgeBase(clauses, n)
            assert backbone(kb) == frozenset(expected)
            checked += 1

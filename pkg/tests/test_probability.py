"""Tests for the exact log-linear semantics of weighted belief bases."""

import math
import random
import time

import pytest

from beliefx import (
    HARD,
    BeliefBase,
    Clause,
    KnowledgeBase,
    LimitError,
    PreconditionError,
    Query,
    SolveTimeout,
    World,
    cond_prob,
    mpe,
    prob,
    top_k_worlds,
)
from beliefx.probability import (
    BottomHard,
    LogScore,
    RankedWorld,
    distribution,
    intersections,
    top_k_models,
    world_score,
)

TAUT = Query([(1, -1)])  # tautological constraint: keeps every world


def oracle_score(base, w):
    """Per-world score recomputed with plain Python floats (None = excluded)."""
    total = 0.0
    for e in base.entries:
        if e.is_hard:
            if not w.satisfies_clause(e.clause):
                return None
        elif w.satisfies_clause(e.clause):
            total += e.weight
    return total


def oracle_mass(base, clauses=()):
    """Unnormalized Σ exp(score) over worlds satisfying all given clauses."""
    total = 0.0
    for i in range(1 << base.num_vars):
        w = World.from_index(i, base.num_vars)
        s = oracle_score(base, w)
        if s is not None and w.satisfies_all(clauses):
            total += math.exp(s)
    return total


def random_clause(rng, n, max_width=3):
    width = rng.randint(1, min(max_width, n))
    variables = rng.sample(range(1, n + 1), width)
    return Clause([v if rng.random() < 0.5 else -v for v in variables])


def random_base(rng, max_vars=6, max_entries=8):
    n = rng.randint(1, max_vars)
    entries = []
    hard = []
    for _ in range(rng.randint(1, max_entries)):
        c = random_clause(rng, n)
        if rng.random() < 0.25:
            trial = hard + [c]
            if any(
                World.from_index(i, n).satisfies_all(trial)
                for i in range(1 << n)
            ):
                hard.append(c)
                entries.append((c, HARD))
                continue
        entries.append((c, round(rng.uniform(0.2, 3.0), 3)))
    return BeliefBase(entries, num_vars=n)


class TestLogScore:
    def test_addition(self):
        assert (LogScore(1.5) + LogScore(2.0)).value == 3.5
        assert (LogScore(1.5) + 0.5).value == 2.0

    def test_float_conversion(self):
        assert float(LogScore(-2.25)) == -2.25

    def test_ordering(self):
        assert LogScore(1.0) < LogScore(2.0)
        assert BottomHard < LogScore(-1e300)

    def test_bottom_absorbs_addition(self):
        assert (BottomHard + 5.0).is_bottom
        assert (BottomHard + LogScore(3.0)).is_bottom
        assert not LogScore(0.0).is_bottom


class TestWorldScore:
    def test_sums_satisfied_soft_weights(self):
        base = BeliefBase([((1,), 2.0), ((2,), 0.5), ((-1, 2), 1.25)])
        assert world_score(base, World((True, True))).value == 3.75
        assert world_score(base, World((True, False))).value == 2.0
        assert world_score(base, World((False, False))).value == 1.25

    def test_hard_violation_is_bottom(self):
        base = BeliefBase([((1,), HARD), ((2,), 1.0)])
        assert world_score(base, World((False, True))).is_bottom
        assert world_score(base, World((True, True))).value == 1.0

    def test_wrong_world_size_rejected(self):
        base = BeliefBase([((1,), 1.0)])
        with pytest.raises(PreconditionError, match="world covers"):
            world_score(base, World((True, True)))

    def test_matches_oracle_on_random_bases(self):
        rng = random.Random(20150)
        for _ in range(50):
            base = random_base(rng)
            for i in range(1 << base.num_vars):
                w = World.from_index(i, base.num_vars)
                want = oracle_score(base, w)
                got = world_score(base, w)
                if want is None:
                    assert got.is_bottom
                else:
                    assert got.value == pytest.approx(want, rel=1e-12)


class TestDistribution:
    def test_normalization(self):
        rng = random.Random(20151)
        for _ in range(20):
            d = distribution(random_base(rng))
            assert d.mass(()) == pytest.approx(1.0, abs=1e-12)

    def test_log_partition_matches_oracle(self):
        rng = random.Random(20152)
        for _ in range(40):
            base = random_base(rng)
            d = distribution(base)
            assert d.log_partition == pytest.approx(
                math.log(oracle_mass(base)), rel=1e-9
            )

    def test_mass_matches_oracle(self):
        rng = random.Random(20153)
        for _ in range(40):
            base = random_base(rng)
            event = [random_clause(rng, base.num_vars)]
            d = distribution(base)
            want = oracle_mass(base, event) / oracle_mass(base)
            assert d.mass(tuple(event)) == pytest.approx(want, abs=1e-12)

    def test_hard_entries_restrict_support(self):
        base = BeliefBase([((1,), HARD), ((2,), 1.0)])
        d = distribution(base)
        assert d.mass((Clause((-1,)),)) == 0.0
        assert d.log_mass((Clause((-1,)),)) == -math.inf
        assert d.mass((Clause((1,)),)) == pytest.approx(1.0)

    def test_zero_variable_base(self):
        d = distribution(BeliefBase([], num_vars=0))
        assert d.log_partition == 0.0
        assert d.mass(()) == 1.0

    def test_enumeration_guard(self):
        base = BeliefBase([((27,), 1.0)], num_vars=27)
        with pytest.raises(LimitError, match="26-variable guard"):
            distribution(base)

    def test_unsatisfiable_hard_rejected(self):
        base = BeliefBase([((1,), HARD), ((-1,), HARD)])
        with pytest.raises(PreconditionError, match="hard entries"):
            distribution(base)

    def test_equal_bases_share_a_cached_distribution(self):
        b1 = BeliefBase([((1, 2), 1.5), ((-2,), HARD)])
        b2 = BeliefBase([((1, 2), 1.5), ((-2,), HARD)])
        assert distribution(b1) is distribution(b2)


class TestProb:
    def test_single_soft_unit_is_a_sigmoid(self):
        base = BeliefBase([((1,), 1.5)])
        want = math.exp(1.5) / (1.0 + math.exp(1.5))
        assert prob(base, Query.literal(1)) == pytest.approx(want, rel=1e-12)
        assert prob(base, Query.literal(-1)) == pytest.approx(1 - want, rel=1e-12)

    def test_independent_units_multiply(self):
        base = BeliefBase([((1,), 1.0), ((2,), 2.0)])
        p1 = math.exp(1.0) / (1.0 + math.exp(1.0))
        p2 = math.exp(2.0) / (1.0 + math.exp(2.0))
        assert prob(base, Query.literals([1, 2])) == pytest.approx(p1 * p2, rel=1e-12)

    def test_tautological_query_is_certain(self):
        base = BeliefBase([((1,), 1.0)])
        assert prob(base, TAUT) == pytest.approx(1.0)

    def test_query_variable_out_of_range(self):
        base = BeliefBase([((1,), 1.0)])
        with pytest.raises(PreconditionError, match="query uses variable"):
            prob(base, Query.literal(2))

    def test_matches_oracle_on_random_bases(self):
        rng = random.Random(20154)
        for _ in range(40):
            base = random_base(rng)
            q = Query([random_clause(rng, base.num_vars)])
            want = oracle_mass(base, q.clauses) / oracle_mass(base)
            assert prob(base, q) == pytest.approx(want, abs=1e-12)


class TestCondProb:
    def test_matches_ratio_of_masses(self):
        rng = random.Random(20155)
        checked = 0
        while checked < 40:
            base = random_base(rng)
            q = Query([random_clause(rng, base.num_vars)])
            g = Query([random_clause(rng, base.num_vars)])
            denom = oracle_mass(base, g.clauses)
            if denom == 0.0:
                continue
            want = oracle_mass(base, tuple(q.clauses) + g.clauses) / denom
            assert cond_prob(base, q, g) == pytest.approx(want, abs=1e-12)
            checked += 1

    def test_chain_rule(self):
        base = BeliefBase([((1, 2), 1.0), ((-1, 3), 2.0), ((2,), 0.7)])
        q, g = Query.literal(3), Query.literal(2)
        joint = prob(base, Query([(3,), (2,)]))
        assert cond_prob(base, q, g) * prob(base, g) == pytest.approx(joint, rel=1e-12)

    def test_given_accepts_query_or_clauses(self):
        base = BeliefBase([((1, 2), 1.0), ((2, 3), 0.5)])
        q = Query.literal(1)
        as_query = cond_prob(base, q, Query.literal(3))
        as_clauses = cond_prob(base, q, [Clause((3,))])
        assert as_query == as_clauses

    def test_independent_units_do_not_interact(self):
        base = BeliefBase([((1,), 1.0), ((2,), 2.0)])
        assert cond_prob(base, Query.literal(1), Query.literal(2)) == pytest.approx(
            prob(base, Query.literal(1)), rel=1e-12
        )

    def test_zero_probability_conditioning_rejected(self):
        base = BeliefBase([((1,), HARD)])
        with pytest.raises(PreconditionError, match="zero probability"):
            cond_prob(base, Query.literal(1), Query.literal(-1))


FOUR_WORLDS = BeliefBase([((1,), 2.0), ((2,), 1.0)])  # scores TT=3 TF=2 FT=1 FF=0


class TestTopK:
    def test_ranked_by_score(self):
        out = top_k_worlds(FOUR_WORLDS, TAUT, 4)
        assert [r.world.values for r in out] == [
            (True, True),
            (True, False),
            (False, True),
            (False, False),
        ]
        z = sum(math.exp(s) for s in (3.0, 2.0, 1.0, 0.0))
        for r, s in zip(out, (3.0, 2.0, 1.0, 0.0)):
            assert r.probability == pytest.approx(math.exp(s) / z, rel=1e-9)

    def test_scores_are_exact(self):
        out = top_k_models(FOUR_WORLDS, TAUT, 4)
        assert [score for _, score in out] == [3.0, 2.0, 1.0, 0.0]

    def test_k_truncates(self):
        out = top_k_worlds(FOUR_WORLDS, TAUT, 2)
        assert [r.world.values for r in out] == [(True, True), (True, False)]

    def test_k_beyond_world_count_returns_all(self):
        assert len(top_k_worlds(FOUR_WORLDS, TAUT, 10)) == 4

    def test_constraint_filters_worlds(self):
        out = top_k_worlds(FOUR_WORLDS, Query.literal(2), 4)
        assert [r.world.values for r in out] == [(True, True), (False, True)]

    def test_hard_entries_filter_worlds(self):
        base = BeliefBase([((1,), 2.0), ((2,), 1.0), ((-1, -2), HARD)])
        out = top_k_worlds(base, TAUT, 4)
        assert [r.world.values for r in out] == [
            (True, False),
            (False, True),
            (False, False),
        ]

    def test_ties_break_lexicographically(self):
        base = BeliefBase([((1,), 1.0), ((2,), 1.0)])
        out = top_k_worlds(base, TAUT, 4)
        assert [r.world.values for r in out] == [
            (True, True),
            (False, True),
            (True, False),
            (False, False),
        ]

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError, match="k must be >= 1"):
            top_k_worlds(FOUR_WORLDS, TAUT, 0)

    def test_constraint_unsatisfiable_with_hard(self):
        base = BeliefBase([((1,), HARD), ((2,), 1.0)])
        with pytest.raises(PreconditionError, match="constraint is unsatisfiable"):
            top_k_worlds(base, Query.literal(-1), 1)

    def test_models_work_above_the_enumeration_guard(self):
        base = BeliefBase([((v,), 1.0) for v in range(1, 31)])
        out = top_k_models(base, Query.literal(1), 1)
        assert out[0][0].values == (True,) * 30
        assert out[0][1] == pytest.approx(30.0)
        with pytest.raises(LimitError):
            top_k_worlds(base, Query.literal(1), 1)

    def test_matches_oracle_on_random_bases(self):
        rng = random.Random(20156)
        for _ in range(30):
            base = random_base(rng, max_vars=5)
            ranked = sorted(
                (
                    (oracle_score(base, World.from_index(i, base.num_vars)), i)
                    for i in range(1 << base.num_vars)
                    if oracle_score(base, World.from_index(i, base.num_vars)) is not None
                ),
                key=lambda t: -t[0],
            )
            k = rng.randint(1, 6)
            out = top_k_models(base, TAUT if base.num_vars > 1 else Query([(1, -1)]), k)
            assert len(out) == min(k, len(ranked))
            got_scores = [s for _, s in out]
            assert got_scores == sorted(got_scores, reverse=True)
            for (world, score), (want, _) in zip(out, ranked):
                assert score == pytest.approx(want, abs=1e-9)
                assert oracle_score(base, world) == pytest.approx(score, abs=1e-9)

    def test_mpe_is_the_top_world(self):
        best = mpe(FOUR_WORLDS, Query.literal(-1))
        assert best.world.values == (False, True)
        z = sum(math.exp(s) for s in (3.0, 2.0, 1.0, 0.0))
        assert best.probability == pytest.approx(math.exp(1.0) / z, rel=1e-9)


class TestIntersections:
    KB = KnowledgeBase([(1, 2), (-1, 3), (2, 3)])

    def test_common_clauses_of_first_k(self):
        worlds = [World((True, True, True)), World((True, False, True))]
        assert intersections(self.KB, worlds, 1) == frozenset({0, 1, 2})
        assert intersections(self.KB, worlds, 2) == frozenset({0, 1, 2})
        worlds.append(World((False, False, False)))  # keeps only (-1, 3)
        assert intersections(self.KB, worlds, 3) == frozenset({1})

    def test_accepts_ranked_worlds(self):
        ranked = [RankedWorld(World((True, True, True)), 0.5)]
        assert intersections(self.KB, ranked, 1) == frozenset({0, 1, 2})

    def test_k_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            intersections(self.KB, [World((True, True, True))], 2)


class TestDeadline:
    @staticmethod
    def hard_instance():
        # complementary soft unit pairs: the optimistic bound only tightens at
        # the leaves, so branch and bound must visit the full tree
        entries = []
        for v in range(1, 13):
            entries.append(((v,), 1.0))
            entries.append(((-v,), 1.0))
        return BeliefBase(entries)

    def test_expired_deadline_raises(self):
        base = self.hard_instance()
        with pytest.raises(SolveTimeout, match="deadline"):
            top_k_models(base, TAUT, 1, deadline=time.monotonic() - 1.0)

    def test_generous_deadline_completes(self):
        base = self.hard_instance()
        out = top_k_models(base, TAUT, 1, deadline=time.monotonic() + 60.0)
        assert out[0][1] == pytest.approx(12.0)
        assert out[0][0].values == (False,) * 12

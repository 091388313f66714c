"""Explanation algorithms over knowledge bases and belief bases.

Four entry points:

* ``monolithic_explanation``      — smallest clause subset entailing a query,
  via the hitting-set / correction-set duality loop;
* ``model_reconciling_explanation`` — additions and retractions that make a
  human knowledge base entail the query;
* ``prob_monolithic``             — the k-bounded probabilistic variant that
  restricts the search to clauses satisfied by the top-k most probable
  query worlds;
* ``prob_model_reconciling``      — the reconciliation variant driven by the
  combined agent/human world ranking.

Metrics (gain and power, log base 2) and the preference maximizer
``most_preferred`` live here too.  Set events are conjunctions of clauses;
the probability of an empty conjunction is 1 by convention.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import minsets, probability, sat
from .formulas import (
    HARD,
    BeliefBase,
    Clause,
    KnowledgeBase,
    PreconditionError,
    Query,
    SolveTimeout,
    WeightedClause,
    classical_projection,
    negate_query,
)

DEFAULT_GAMMA = 0.5
DEFAULT_BUDGET = 64


@dataclass(frozen=True)
class KBound:
    """How tight the top-k restriction ended up.

    ``lower_bound`` is the total probability of the k worlds that induced the
    explanation — a guaranteed lower bound on the explanation's own
    probability.  It is None when the base exceeds the exact-enumeration
    guard (the search itself does not need the partition function).
    """

    k_requested: int
    k_achieved: int
    lower_bound: float | None


@dataclass(frozen=True)
class MonolithicExplanation:
    clause_indices: frozenset[int]
    entails_query: bool
    prob_query_given: float | None = None
    gain: float | None = None
    power: float | None = None
    gamma: float | None = None
    # metadata populated by most_preferred
    candidates_considered: int | None = None
    budget: int | None = None
    enumeration_exhausted: bool | None = None

    def sorted_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.clause_indices))


@dataclass(frozen=True)
class ReconcilingExplanation:
    epsilon_plus: frozenset[int]  # indices into the agent KB
    epsilon_minus: frozenset[int]  # indices into the human KB / projection
    gain: float | None = None
    power: float | None = None
    diagnostics: dict[str, float] | None = None
    k_bound: KBound | None = None


def _check_deadline(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise SolveTimeout("deadline exceeded")


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise PreconditionError(f"gamma must be within [0, 1], got {gamma}")


def _require_consistent_entailing(clauses, num_vars: int, q: Query, who: str):
    """Shared precondition check; returns the negated-query clauses."""
    if not sat.is_sat(clauses, num_vars=num_vars).satisfiable:
        raise PreconditionError(f"{who} is inconsistent")
    neg = negate_query(q, num_vars)
    if sat.is_sat(tuple(clauses) + neg).satisfiable:
        raise PreconditionError(f"{who} does not entail the query")
    return neg


def _min_entailing_subset(
    entail: minsets.SoftHardProblem,
    corr: minsets.SoftHardProblem,
    deadline: float | None,
) -> frozenset[int] | None:
    """Smallest soft-index subset unsatisfiable with ``entail``'s hard part.

    Implicit hitting-set search over correction sets of ``corr`` (whose
    hard part must be a subset of ``entail``'s, so any subset satisfiable
    for ``entail`` is satisfiable for ``corr``).  A bootstrap phase first
    collects pairwise disjoint correction sets until their union entails,
    seeding the collection and its lower bound.  The main loop then asks
    for a minimum hitting set of the collection; if it entails it is
    optimal, otherwise it is extended with further correction sets until
    it does entail, and the extension is shrunk by deletion into an
    incumbent whenever that can improve on the best one so far.  The
    incumbent caps the hitting-set search, which declares it optimal as
    soon as the proven lower bound reaches its size.

    Returns None when even the full soft set stays satisfiable (nothing
    entails); callers turn that into their own precondition error.
    """
    hitter = minsets.IncrementalHittingSet()
    union: set[int] = set()
    while entail.satisfiable_with(union).satisfiable:
        _check_deadline(deadline)
        mcs = minsets.get_mcs(union, corr)
        if mcs.problem_satisfiable:
            return None
        hitter.add_set(mcs.indices)
        union |= mcs.indices

    def refine(cand: set[int], prefer: frozenset[int]) -> set[int]:
        kept = set(cand)
        for i in sorted(cand, key=lambda x: (x in prefer, x)):
            _check_deadline(deadline)
            if not entail.satisfiable_with(kept - {i}).satisfiable:
                kept.discard(i)
        return kept

    incumbent: set[int] | None = None
    while True:
        _check_deadline(deadline)
        cap = None if incumbent is None else len(incumbent)
        seed = hitter.minimum(cap=cap)
        if seed is None:  # lower bound met the incumbent: it is optimal
            assert incumbent is not None
            return frozenset(incumbent)
        ext = set(seed)
        while entail.satisfiable_with(ext).satisfiable:
            _check_deadline(deadline)
            mcs = minsets.get_mcs(ext, corr)
            if mcs.problem_satisfiable:
                return None
            hitter.add_set(mcs.indices)
            ext |= mcs.indices
        if ext == set(seed):  # the optimal hitting set already entails
            return frozenset(seed)
        if incumbent is None or len(ext) < len(incumbent):
            cand = refine(ext, seed)
            if incumbent is None or len(cand) < len(incumbent):
                incumbent = cand


# ---------------------------------------------------------------------------
# Algorithm: monolithic (smallest entailing subset)


def monolithic_explanation(
    kb: KnowledgeBase, q: Query, deadline: float | None = None
) -> MonolithicExplanation:
    """A minimum-cardinality subset of kb's clauses that entails q.

    Duality loop: repeatedly take a minimum hitting set of the correction
    sets found so far as a candidate; if it entails q, done — otherwise grow
    a new correction set disjoint from it.
    """
    q.check_against(kb.num_vars)
    neg = _require_consistent_entailing(kb.clauses, kb.num_vars, q, "knowledge base")
    top = max([kb.num_vars] + [c.max_var for c in neg])  # negation may add aux vars
    if not sat.is_sat(neg, num_vars=top).satisfiable:
        # the query is valid: the empty subset already entails it
        return MonolithicExplanation(frozenset(), entails_query=True)
    problem = minsets.SoftHardProblem(kb.clauses, neg, num_vars=top)
    eps = _min_entailing_subset(problem, problem, deadline)
    if eps is None:  # defensive; excluded by the entailment precondition
        raise PreconditionError("knowledge base does not entail the query")
    return MonolithicExplanation(eps, entails_query=True)


# ---------------------------------------------------------------------------
# Algorithm: model reconciliation (classical)


def model_reconciling_explanation(
    kb_agent: KnowledgeBase,
    kb_human: KnowledgeBase,
    q: Query,
    deadline: float | None = None,
) -> ReconcilingExplanation:
    """Additions ε⁺ (agent clauses) and retractions ε⁻ (human clauses).

    After the update, the human knowledge base (kb_human \\ ε⁻) ∪ ε⁺ is
    consistent and entails q.  Steps: restore consistency of the human base
    against the full agent base (collecting removal candidates E⁻), run the
    duality loop over agent-only clauses until the kept human base plus the
    candidate entails q, then re-admit as much of E⁻ as stays consistent.
    """
    num_vars = max(kb_agent.num_vars, kb_human.num_vars)
    q.check_against(num_vars)
    neg = _require_consistent_entailing(
        kb_agent.clauses, num_vars, q, "agent knowledge base"
    )
    agent_set = set(kb_agent.clauses)
    human_set = set(kb_human.clauses)
    shared_idx = [i for i, c in enumerate(kb_agent.clauses) if c in human_set]
    agent_only_idx = [i for i, c in enumerate(kb_agent.clauses) if c not in human_set]

    # preprocessing: drop a minimal set of human-only clauses conflicting with
    # the agent's knowledge
    e_minus: list[int] = []
    both = tuple(kb_agent.clauses) + tuple(kb_human.clauses)
    if not sat.is_sat(both, num_vars=num_vars).satisfiable:
        human_only = [j for j, c in enumerate(kb_human.clauses) if c not in agent_set]
        pre = minsets.SoftHardProblem(
            [kb_human.clauses[j] for j in human_only],
            kb_agent.clauses,
            num_vars=num_vars,
        )
        pre_mcs = minsets.get_mcs((), pre)
        e_minus = [human_only[i] for i in sorted(pre_mcs.indices)]
    dropped = set(e_minus)
    kept_human = tuple(
        kb_human.clauses[j] for j in range(len(kb_human.clauses)) if j not in dropped
    )

    # duality loop over agent-only clauses
    soft = [kb_agent.clauses[i] for i in agent_only_idx]
    hard = tuple(kb_agent.clauses[i] for i in shared_idx) + neg
    top = max([num_vars] + [c.max_var for c in neg])  # negation may add aux vars
    if not sat.is_sat(kept_human + neg, num_vars=top).satisfiable:
        eps_plus: frozenset[int] = frozenset()  # kept human base already entails
    else:
        entail = minsets.SoftHardProblem(soft, kept_human + neg, num_vars=top)
        problem = minsets.SoftHardProblem(soft, hard, num_vars=top)
        chosen = _min_entailing_subset(entail, problem, deadline)
        if chosen is None:  # defensive
            raise PreconditionError("agent knowledge base does not entail the query")
        eps_plus = frozenset(agent_only_idx[i] for i in chosen)

    # decide which removal candidates must stay out
    eps_minus: frozenset[int] = frozenset()
    if e_minus:
        plus_clauses = tuple(kb_agent.clauses[i] for i in sorted(eps_plus))
        back = tuple(kb_human.clauses[j] for j in e_minus)
        if not sat.is_sat(
            kept_human + plus_clauses + back, num_vars=num_vars
        ).satisfiable:
            fin = minsets.SoftHardProblem(
                back, kept_human + plus_clauses, num_vars=num_vars
            )
            fin_mcs = minsets.get_mcs((), fin)
            eps_minus = frozenset(e_minus[i] for i in sorted(fin_mcs.indices))
    return ReconcilingExplanation(eps_plus, eps_minus)


# ---------------------------------------------------------------------------
# metrics


def _eps_clauses(base: BeliefBase, eps: Iterable) -> tuple[Clause, ...]:
    """Explanation as clauses; integers are resolved as entry indices."""
    items = list(eps)
    if items and all(isinstance(e, int) for e in items):
        return tuple(base.entries[i].clause for i in items)
    return tuple(c if isinstance(c, Clause) else Clause(c) for c in items)


def _extended(base: BeliefBase, *events: Sequence[Clause]) -> BeliefBase:
    """Widen num_vars so external clauses (e.g. agent clauses) are in scope."""
    maxv = base.num_vars
    for ev in events:
        for c in ev:
            if c.max_var > maxv:
                maxv = c.max_var
    if maxv == base.num_vars:
        return base
    return BeliefBase(base.entries, maxv)


def _ratio_log2(num: float, den: float) -> float:
    if num <= 0.0:
        return -math.inf
    return math.log2(num / den)


def gain_mono(base: BeliefBase, eps: Iterable, q: Query) -> float:
    """log₂ of how much conditioning on the explanation raises belief in q."""
    clauses = _eps_clauses(base, eps)
    b = _extended(base, clauses, q.clauses)
    d = probability.distribution(b)
    p_eps = d.mass(clauses)
    if p_eps <= 0.0:
        raise PreconditionError("explanation has zero probability")
    p_q = d.mass(q.clauses)
    if p_q <= 0.0:
        raise PreconditionError("query has zero probability")
    p_cond = d.mass(tuple(q.clauses) + clauses) / p_eps
    return _ratio_log2(p_cond, p_q)


def power_mono(
    base: BeliefBase, eps: Iterable, q: Query, gamma: float = DEFAULT_GAMMA
) -> float:
    """Gain plus γ times the probability of the explanation itself."""
    _check_gamma(gamma)
    clauses = _eps_clauses(base, eps)
    b = _extended(base, clauses, q.clauses)
    return gain_mono(b, clauses, q) + gamma * probability.distribution(b).mass(clauses)


def _mrp_masses(
    base_human: BeliefBase,
    eps_plus: Iterable,
    eps_minus: Iterable,
    q: Query,
) -> dict[str, float]:
    plus = _eps_clauses(base_human, eps_plus)
    minus = _eps_clauses(base_human, eps_minus)
    b = _extended(base_human, plus, minus, q.clauses)
    d = probability.distribution(b)
    out = {
        "prob_query": d.mass(q.clauses),
        "prob_plus": d.mass(plus),
        "prob_minus": d.mass(minus) if minus else 0.0,
    }
    if out["prob_plus"] <= 0.0:
        raise PreconditionError("epsilon-plus has zero probability under the human base")
    if out["prob_query"] <= 0.0:
        raise PreconditionError("query has zero probability under the human base")
    out["prob_query_given_plus"] = d.mass(tuple(q.clauses) + plus) / out["prob_plus"]
    if minus:
        p_minus = d.mass(minus)
        if p_minus >= 1.0:
            raise PreconditionError(
                "epsilon-minus holds with probability 1; cannot condition on its negation"
            )
        p_both = d.mass(plus + minus)
        out["prob_minus"] = p_minus
        out["prob_plus_given_not_minus"] = (out["prob_plus"] - p_both) / (1.0 - p_minus)
    else:
        out["prob_plus_given_not_minus"] = out["prob_plus"]
    return out


def gain_mrp(
    base_human: BeliefBase, eps_plus: Iterable, eps_minus: Iterable, q: Query
) -> float:
    """Reconciliation gain: belief shift on q plus the surprise of ε⁺ given ¬ε⁻.

    The second term is 0 when ε⁻ is empty (nothing was retracted, so there is
    no negated-retraction event to condition on).
    """
    m = _mrp_masses(base_human, eps_plus, eps_minus, q)
    gain = _ratio_log2(m["prob_query_given_plus"], m["prob_query"])
    minus = _eps_clauses(base_human, eps_minus)
    if minus:
        gain += _ratio_log2(m["prob_plus_given_not_minus"], m["prob_plus"])
    return gain


def power_mrp(
    base_human: BeliefBase,
    eps_plus: Iterable,
    eps_minus: Iterable,
    q: Query,
    gamma: float = DEFAULT_GAMMA,
) -> float:
    _check_gamma(gamma)
    m = _mrp_masses(base_human, eps_plus, eps_minus, q)
    return gain_mrp(base_human, eps_plus, eps_minus, q) + gamma * (
        m["prob_plus"] + m["prob_minus"]
    )


# ---------------------------------------------------------------------------
# Algorithm: k-bounded probabilistic monolithic


def _ranked(base: BeliefBase, constraint: Query, k: int, deadline):
    """Top-k worlds with probabilities when enumerable, scores-only beyond."""
    if base.num_vars <= probability.MAX_ENUM_VARS:
        return probability.top_k_worlds(base, constraint, k, deadline), True
    models = probability.top_k_models(base, constraint, k, deadline)
    return [probability.RankedWorld(w, None) for w, _ in models], False


def prob_monolithic(
    base: BeliefBase,
    q: Query,
    k_hat: int,
    gamma: float = DEFAULT_GAMMA,
    deadline: float | None = None,
) -> tuple[MonolithicExplanation, KBound]:
    """Probabilistic monolithic explanation bounded by the top-k query worlds.

    The candidate pool I_k is the set of clauses satisfied by all of the k
    most probable query worlds; k starts at k_hat (clamped to the number of
    such worlds) and decreases until I_k entails q, which is guaranteed to
    happen by k = 1 for a consistent, entailing projection.
    """
    if k_hat < 1:
        raise PreconditionError(f"k_hat must be >= 1, got {k_hat}")
    _check_gamma(gamma)
    projection = classical_projection(base)
    q.check_against(base.num_vars)
    neg = _require_consistent_entailing(
        projection.clauses, projection.num_vars, q, "classical projection"
    )
    metrics_ok = base.num_vars <= probability.MAX_ENUM_VARS
    d = probability.distribution(base) if metrics_ok else None
    if metrics_ok:
        p_q = d.mass(q.clauses)
        if p_q >= 1.0:
            raise PreconditionError(
                "query already has degree of belief 1; no subset can raise it"
            )
    worlds, _ = _ranked(base, q, k_hat, deadline)
    for k in range(len(worlds), 0, -1):
        _check_deadline(deadline)
        i_k = probability.intersections(projection, worlds, k)
        sub = tuple(projection.clauses[i] for i in sorted(i_k))
        if sat.is_sat(sub + neg).satisfiable:
            continue
        mapping = sorted(i_k)
        inner = monolithic_explanation(
            KnowledgeBase(sub, projection.num_vars), q, deadline
        )
        indices = frozenset(mapping[i] for i in inner.clause_indices)
        if metrics_ok:
            eps = tuple(projection.clauses[i] for i in sorted(indices))
            p_eps = d.mass(eps)
            p_cond = d.mass(tuple(q.clauses) + eps) / p_eps
            gain = _ratio_log2(p_cond, p_q)
            expl = MonolithicExplanation(
                indices,
                entails_query=True,
                prob_query_given=p_cond,
                gain=gain,
                power=gain + gamma * p_eps,
                gamma=gamma,
            )
            bound = KBound(k_hat, k, sum(w.probability for w in worlds[:k]))
        else:
            expl = MonolithicExplanation(indices, entails_query=True, gamma=gamma)
            bound = KBound(k_hat, k, None)
        return expl, bound
    raise PreconditionError("no k-bounded explanation exists")  # unreachable when valid


# ---------------------------------------------------------------------------
# Algorithm: probabilistic model reconciliation


def prob_model_reconciling(
    kb_agent: KnowledgeBase,
    base_human: BeliefBase,
    q: Query,
    k_hat: int,
    gamma: float = DEFAULT_GAMMA,
    deadline: float | None = None,
) -> ReconcilingExplanation:
    """Model reconciliation guided by the combined agent/human world ranking.

    Shared clauses become hard; each agent-only clause is weighted by the sum
    W of the human base's soft weights, so satisfying one more agent clause
    always outweighs any purely human preference.  The top-k worlds of the
    combined base (with q enforced) bound the candidate additions, and the
    classical reconciliation runs on that restriction.  Diagnostics are
    computed under the human base's own distribution when it is enumerable.
    """
    if k_hat < 1:
        raise PreconditionError(f"k_hat must be >= 1, got {k_hat}")
    _check_gamma(gamma)
    num_vars = max(kb_agent.num_vars, base_human.num_vars)
    q.check_against(num_vars)
    base_human.check_hard_satisfiable()
    neg = _require_consistent_entailing(
        kb_agent.clauses, num_vars, q, "agent knowledge base"
    )
    human_proj = classical_projection(base_human)
    human_set = set(human_proj.clauses)
    shared_idx = sorted(i for i, c in enumerate(kb_agent.clauses) if c in human_set)
    agent_only_idx = [i for i, c in enumerate(kb_agent.clauses) if c not in human_set]
    w_total = sum(e.weight for e in base_human.soft_entries)
    if w_total <= 0.0:
        w_total = 1.0  # all-hard human base: any positive constant works
    combined_entries = list(base_human.entries)
    combined_entries.extend(
        WeightedClause(kb_agent.clauses[i], HARD) for i in shared_idx
    )
    combined_entries.extend(
        WeightedClause(kb_agent.clauses[i], w_total) for i in agent_only_idx
    )
    combined = BeliefBase(combined_entries, num_vars)
    worlds, combined_metrics_ok = _ranked(combined, q, k_hat, deadline)
    agent_wide = KnowledgeBase(kb_agent.clauses, num_vars)
    for k in range(len(worlds), 0, -1):
        _check_deadline(deadline)
        i_k = probability.intersections(agent_wide, worlds, k)
        cand = sorted(set(i_k) | set(shared_idx))
        sub = tuple(kb_agent.clauses[i] for i in cand)
        if sat.is_sat(sub + neg).satisfiable:
            continue
        inner = model_reconciling_explanation(
            KnowledgeBase(sub, num_vars), human_proj, q, deadline
        )
        eps_plus = frozenset(cand[i] for i in inner.epsilon_plus)
        eps_minus = inner.epsilon_minus
        lower = (
            sum(w.probability for w in worlds[:k]) if combined_metrics_ok else None
        )
        bound = KBound(k_hat, k, lower)
        break
    else:
        raise PreconditionError(
            "agent knowledge cannot be reconciled under the hard human beliefs"
        )
    if num_vars > probability.MAX_ENUM_VARS:
        return ReconcilingExplanation(eps_plus, eps_minus, k_bound=bound)
    plus_clauses = tuple(kb_agent.clauses[i] for i in sorted(eps_plus))
    minus_clauses = tuple(human_proj.clauses[j] for j in sorted(eps_minus))
    human_wide = _extended(
        BeliefBase(base_human.entries, num_vars), plus_clauses, q.clauses
    )
    m = _mrp_masses(human_wide, plus_clauses, minus_clauses, q)
    gain = gain_mrp(human_wide, plus_clauses, minus_clauses, q)
    power = gain + gamma * (m["prob_plus"] + m["prob_minus"])
    diagnostics = {
        "prob_query": m["prob_query"],
        "prob_query_given_plus": m["prob_query_given_plus"],
        "prob_plus": m["prob_plus"],
        "prob_plus_given_not_minus": m["prob_plus_given_not_minus"],
        "prob_minus": m["prob_minus"],
    }
    return ReconcilingExplanation(eps_plus, eps_minus, gain, power, diagnostics, bound)


# ---------------------------------------------------------------------------
# most-preferred selection


def _minimal_hitting_sets(
    collection: Sequence[frozenset[int]], limit: int
) -> tuple[list[frozenset[int]], bool]:
    """Minimal hitting sets by (cardinality, lex) order, up to `limit`.

    Returns (sets, exhausted).  With a complete collection of correction
    sets, these are exactly the minimal entailing subsets (duality).
    """
    sets = [s for s in dict.fromkeys(collection)]
    if not sets:
        return [frozenset()], True
    universe = sorted(set().union(*sets))
    out: list[frozenset[int]] = []
    for size in range(1, len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            s = set(combo)
            if any(not (s & m) for m in sets):
                continue
            if any(all((s - {e}) & m for m in sets) for e in combo):
                continue  # some element is redundant: not minimal
            out.append(frozenset(combo))
            if len(out) > limit:
                return out[:limit], False
    return out, True


def most_preferred(
    base: BeliefBase,
    q: Query,
    budget: int = DEFAULT_BUDGET,
    gamma: float = DEFAULT_GAMMA,
) -> MonolithicExplanation:
    """The highest-power minimal entailing explanation (budgeted enumeration).

    Candidates are the minimal entailing subsets of the classical projection
    (enumerated via correction-set duality, at most `budget` of them, in
    cardinality-then-lexicographic order), scored by power; ties prefer
    smaller then lexicographically smaller index sets.
    """
    if budget < 1:
        raise PreconditionError(f"budget must be >= 1, got {budget}")
    _check_gamma(gamma)
    projection = classical_projection(base)
    q.check_against(base.num_vars)
    neg = _require_consistent_entailing(
        projection.clauses, projection.num_vars, q, "classical projection"
    )
    d = probability.distribution(base)
    p_q = d.mass(q.clauses)
    if not sat.is_sat(neg).satisfiable:
        # q is valid on its own; the empty subset already explains it
        return MonolithicExplanation(
            clause_indices=frozenset(),
            entails_query=True,
            prob_query_given=1.0,
            gain=_ratio_log2(1.0, p_q),
            power=_ratio_log2(1.0, p_q) + gamma,
            gamma=gamma,
            candidates_considered=1,
            budget=budget,
            enumeration_exhausted=True,
        )
    problem = minsets.SoftHardProblem(projection.clauses, neg)
    mcses = minsets.enumerate_mcses(problem)
    collection = [cs.indices for cs in mcses if cs.indices]
    candidates, exhausted = _minimal_hitting_sets(collection, budget)
    best = None
    for cand in candidates:
        eps = tuple(projection.clauses[i] for i in sorted(cand))
        p_eps = d.mass(eps)
        p_cond = d.mass(tuple(q.clauses) + eps) / p_eps
        gain = _ratio_log2(p_cond, p_q)
        power = gain + gamma * p_eps
        key = (-power, len(cand), tuple(sorted(cand)))
        if best is None or key < best[0]:
            best = (key, cand, p_cond, gain, power)
    _, cand, p_cond, gain, power = best
    return MonolithicExplanation(
        clause_indices=cand,
        entails_query=True,
        prob_query_given=p_cond,
        gain=gain,
        power=power,
        gamma=gamma,
        candidates_considered=len(candidates),
        budget=budget,
        enumeration_exhausted=exhausted,
    )

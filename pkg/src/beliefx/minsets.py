"""Minimal correction sets, MCS enumeration, and minimum hitting sets.

These are the duality primitives used by the explanation algorithms: an
explanation search alternates between hitting the correction sets found so
far and extracting a new correction set when the candidate fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import sat
from .formulas import Clause, PreconditionError, World


@dataclass(frozen=True)
class SoftHardProblem:
    """Indexed soft clauses plus inviolable hard clauses.

    The hard part alone must be satisfiable; the constructor checks this
    eagerly because every operation here assumes it.
    """

    soft: tuple[Clause, ...]
    hard: tuple[Clause, ...]
    num_vars: int

    def __init__(
        self,
        soft: Iterable[Clause | Iterable[int]],
        hard: Iterable[Clause | Iterable[int]] = (),
        num_vars: int | None = None,
    ):
        soft_t = tuple(c if isinstance(c, Clause) else Clause(c) for c in soft)
        hard_t = tuple(c if isinstance(c, Clause) else Clause(c) for c in hard)
        top = max([c.max_var for c in soft_t] + [c.max_var for c in hard_t] + [0])
        if num_vars is None:
            num_vars = top
        elif num_vars < top:
            raise ValueError(
                f"num_vars {num_vars} is smaller than the largest variable {top}"
            )
        if not sat.is_sat(hard_t, num_vars=num_vars).satisfiable:
            raise PreconditionError("hard clauses alone are unsatisfiable")
        object.__setattr__(self, "soft", soft_t)
        object.__setattr__(self, "hard", hard_t)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "_engine", None)

    def _selector(self, index: int) -> int:
        return self.num_vars + 1 + index

    def _solver(self) -> sat.IncrementalSolver:
        """One shared solver holding the hard clauses plus every soft clause
        behind a fresh selector variable; subsets are tested via assumptions,
        so learned clauses carry over between grow passes."""
        eng = self._engine
        if eng is None:
            eng = sat.IncrementalSolver(
                _gated_clauses(self), self.num_vars + len(self.soft)
            )
            for i in range(len(self.soft)):
                eng.set_phase(self._selector(i), False)  # free gates stay open
            object.__setattr__(self, "_engine", eng)
        return eng

    def satisfiable_with(self, indices: Iterable[int]) -> sat.SatResult:
        """Solve the hard clauses plus the given soft clauses (by index).

        Runs on the shared incremental solver, so repeated queries over
        changing subsets stay cheap.
        """
        idx = sorted(set(indices))
        for i in idx:
            if not 0 <= i < len(self.soft):
                raise ValueError(f"soft index {i} out of range")
        return self._solver().solve([self._selector(i) for i in idx])


def _gated_clauses(problem: SoftHardProblem) -> list[tuple[int, ...]]:
    out = [c.literals for c in problem.hard]
    out.extend(
        c.literals + (-problem._selector(i),) for i, c in enumerate(problem.soft)
    )
    return out


@dataclass(frozen=True)
class CorrectionSet:
    """Soft-clause indices whose removal restores satisfiability (an MCS)."""

    indices: frozenset[int]
    problem_satisfiable: bool = False  # True iff soft ∪ hard was already satisfiable

    def sorted_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))


def _grow(
    problem: SoftHardProblem, model: World, first: Sequence[int] = ()
) -> tuple[set[int], World]:
    """Grow a maximal satisfiable soft subset from a model, ascending index.

    Clauses already satisfied by the current model are accepted without a
    solver call (the outcome is identical to testing them individually, since
    the model witnesses satisfiability of the extended set).  ``first`` lists
    indices the model is known to satisfy (the caller's seed); keeping them at
    the front of the assumption order lets the solver reuse assumption levels
    between consecutive calls.
    """
    soft = problem.soft
    n = problem.num_vars
    eng = problem._solver()
    order = list(first)
    accepted = set(order)
    for i, c in enumerate(soft):
        if i not in accepted and model.satisfies_clause(c):
            accepted.add(i)
            order.append(i)
    for i in range(len(soft)):
        if i in accepted:
            continue
        if model.satisfies_clause(soft[i]):
            accepted.add(i)
            order.append(i)
            continue
        assumptions = [problem._selector(j) for j in order]
        assumptions.append(problem._selector(i))
        r = eng.solve(assumptions)
        if r.satisfiable:
            accepted.add(i)
            order.append(i)
            model = World(r.model.values[:n])
    return accepted, model


def get_mcs(seed: Iterable[int], problem: SoftHardProblem) -> CorrectionSet:
    """A minimal correction set disjoint from ``seed``.

    Starts from the deterministic model of the seed clauses plus the hard
    clauses, then grows a maximal satisfiable subset over the remaining soft
    clauses in ascending index order; the complement is the MCS.
    """
    seed = sorted(set(seed))
    for i in seed:
        if not 0 <= i < len(problem.soft):
            raise ValueError(f"seed index {i} out of range")
    r = problem.satisfiable_with(seed)
    if not r.satisfiable:
        raise PreconditionError("seed clauses plus hard clauses are unsatisfiable")
    accepted, _ = _grow(problem, World(r.model.values[: problem.num_vars]), seed)
    mcs = frozenset(range(len(problem.soft))) - frozenset(accepted)
    return CorrectionSet(indices=mcs, problem_satisfiable=not mcs)


def enumerate_mcses(
    problem: SoftHardProblem, limit: int | None = None
) -> list[CorrectionSet]:
    """All MCSes of the problem, lexicographic by sorted index tuple.

    Complete enumeration: each discovered MCS is blocked by a selector clause
    requiring later solutions to satisfy at least one of its members, so every
    round yields a fresh MCS until none remain.  Intended for desk-scale
    inputs (test oracles and property suites).
    """
    n, m = problem.num_vars, len(problem.soft)
    # a private solver: blocking clauses must not leak into the shared engine
    eng = sat.IncrementalSolver(_gated_clauses(problem), n + m)
    for i in range(m):
        eng.set_phase(problem._selector(i), False)
    found: list[frozenset[int]] = []
    while True:
        r = eng.solve()
        if not r.satisfiable:
            break
        world = World(r.model.values[:n])
        accepted, _ = _grow(problem, world)
        mcs = frozenset(range(m)) - frozenset(accepted)
        found.append(mcs)
        if not mcs:
            break
        eng.add_clause(tuple(problem._selector(i) for i in mcs))
    found.sort(key=lambda s: tuple(sorted(s)))
    if limit is not None:
        found = found[:limit]
    return [
        CorrectionSet(indices=s, problem_satisfiable=not s) for s in found
    ]


@dataclass(frozen=True)
class HittingSetInstance:
    universe: frozenset[int]
    collection: tuple[frozenset[int], ...]

    def __init__(self, collection: Iterable[Iterable[int]], universe: Iterable[int] | None = None):
        coll = tuple(frozenset(s) for s in collection)
        if universe is None:
            uni = frozenset().union(*coll) if coll else frozenset()
        else:
            uni = frozenset(universe)
        for s in coll:
            if not s <= uni:
                raise ValueError("collection member is not a subset of the universe")
        object.__setattr__(self, "universe", uni)
        object.__setattr__(self, "collection", coll)


def _disjoint_lower_bound(sets: Sequence[frozenset[int]]) -> int:
    taken: set[int] = set()
    count = 0
    for s in sets:
        if taken.isdisjoint(s):
            count += 1
            taken |= s
    return count


def _greedy_hitting_set(sets: Sequence[frozenset[int]]) -> set[int]:
    """Greedy cover: repeatedly take the element hitting the most sets."""
    uncovered = list(sets)
    chosen: set[int] = set()
    while uncovered:
        occurrence: dict[int, int] = {}
        for s in uncovered:
            for e in s:
                occurrence[e] = occurrence.get(e, 0) + 1
        best = min(occurrence, key=lambda e: (-occurrence[e], e))
        uncovered = [s for s in uncovered if best not in s]
        chosen.add(best)
    return chosen


def _greedy_upper_bound(sets: list[frozenset[int]]) -> int:
    return len(_greedy_hitting_set(sets))


def _optimal_size(sets: list[frozenset[int]]) -> int:
    """Branch and bound for the minimum hitting-set cardinality."""
    occurrence: dict[int, int] = {}
    for s in sets:
        for e in s:
            occurrence[e] = occurrence.get(e, 0) + 1
    best = _greedy_upper_bound(sets)

    def bb(uncovered: list[frozenset[int]], chosen: int) -> None:
        nonlocal best
        if not uncovered:
            if chosen < best:
                best = chosen
            return
        if chosen + _disjoint_lower_bound(uncovered) >= best:
            return
        branch = min(uncovered, key=len)
        for e in sorted(branch, key=lambda e: (-occurrence[e], e)):
            bb([s for s in uncovered if e not in s], chosen + 1)

    bb(sets, 0)
    return best


def _lex_smallest(sets: list[frozenset[int]], k: int) -> tuple[int, ...] | None:
    """Lexicographically smallest hitting set of exactly minimum size k."""

    def dfs(uncovered: list[frozenset[int]], floor: int, budget: int) -> list[int] | None:
        if not uncovered:
            return []
        if budget == 0 or _disjoint_lower_bound(uncovered) > budget:
            return None
        candidates = sorted({e for s in uncovered for e in s if e >= floor})
        for e in candidates:
            rest = dfs([s for s in uncovered if e not in s], e + 1, budget - 1)
            if rest is not None:
                return [e] + rest
        return None

    res = dfs(sets, min((min(s) for s in sets), default=0), k)
    return None if res is None else tuple(res)


def min_hitting_set(inst: HittingSetInstance | Iterable[Iterable[int]]) -> frozenset[int]:
    """A minimum-cardinality hitting set; ties broken lexicographically.

    Exact: a branch-and-bound pass (elements ordered by occurrence count,
    greedy upper bound, max-disjoint-sets lower bound) fixes the optimum
    size, then a lexicographic search returns the smallest sorted index
    tuple of that size.
    """
    if not isinstance(inst, HittingSetInstance):
        inst = HittingSetInstance(inst)
    sets = list(dict.fromkeys(inst.collection))  # dedupe, keep order
    if not sets:
        return frozenset()
    if any(not s for s in sets):
        raise PreconditionError("collection contains an empty set (unhittable)")
    # a superset of another member is hit whenever the subset is
    sets = [s for s in sets if not any(t < s for t in sets)]
    k = _optimal_size(sets)
    result = _lex_smallest(sets, k)
    assert result is not None and len(result) == k
    return frozenset(result)


class IncrementalHittingSet:
    """Minimum hitting sets of a growing collection of sets.

    The duality loops add one set per iteration and re-ask for a minimum
    hitting set each time, so this keeps a SAT encoding alive between
    calls: one pick variable per universe element, one clause per set,
    and a sequential counter bounding how many picks may be true.  The
    bound only ever grows and sets are only added, so the encoding is
    rebuilt only when the bound increases or an unseen element arrives;
    otherwise each call is one incremental solve (or a greedy fast path
    when the greedy cover already matches a proven lower bound).

    Results are deterministic but ties are not broken lexicographically;
    use :func:`min_hitting_set` when the lexicographic answer matters.
    """

    def __init__(self) -> None:
        self._sets: list[frozenset[int]] = []
        self._elements: tuple[int, ...] = ()
        self._pos: dict[int, int] = {}
        self._bound = 1
        self._engine: sat.IncrementalSolver | None = None

    def add_set(self, indices: Iterable[int]) -> None:
        fs = frozenset(indices)
        if not fs:
            raise PreconditionError("collection contains an empty set (unhittable)")
        self._sets.append(fs)
        if not fs <= self._pos.keys():
            self._engine = None  # unseen elements: the variable layout changes
        elif self._engine is not None:
            self._engine.add_clause(tuple(self._pos[e] + 1 for e in fs))

    def minimum(self, cap: int | None = None) -> frozenset[int] | None:
        """A minimum-cardinality hitting set of the sets added so far.

        With ``cap`` set, returns None as soon as the proven lower bound
        reaches ``cap`` — callers holding a hitting set of that size then
        know it is optimal without paying for the final infeasibility
        proof.
        """
        sets = self._sets
        if not sets:
            return frozenset()
        lower = _disjoint_lower_bound(sets)
        if lower > self._bound:
            self._bound = lower
            self._engine = None
        greedy = _greedy_hitting_set(sets)
        while True:
            if cap is not None and self._bound >= cap:
                return None
            if len(greedy) <= self._bound:
                return frozenset(greedy)
            eng = self._build()
            r = eng.solve()
            if r.satisfiable:
                vals = r.model.values
                return frozenset(
                    e for t, e in enumerate(self._elements) if vals[t]
                )
            self._bound += 1
            self._engine = None

    def _build(self) -> sat.IncrementalSolver:
        """(Re)encode at the current bound: set clauses plus an at-most-k
        sequential counter over the pick variables (element t picks var t+1;
        register (t, j) tracks whether at least j of the first t+1 picks are
        true)."""
        if self._engine is not None:
            return self._engine
        elements = tuple(sorted(frozenset().union(*self._sets)))
        self._elements = elements
        self._pos = {e: t for t, e in enumerate(elements)}
        u, k = len(elements), self._bound
        pruned = list(dict.fromkeys(self._sets))
        pruned = [s for s in pruned if not any(t < s for t in pruned)]
        clauses: list[tuple[int, ...]] = [
            tuple(self._pos[e] + 1 for e in s) for s in pruned
        ]

        def reg(t: int, j: int) -> int:
            return u + t * k + j

        for t in range(u - 1):
            pick = t + 1
            clauses.append((-pick, reg(t, 1)))
            if t:
                clauses.append((-reg(t - 1, 1), reg(t, 1)))
                for j in range(2, k + 1):
                    clauses.append((-reg(t - 1, j), reg(t, j)))
                    clauses.append((-pick, -reg(t - 1, j - 1), reg(t, j)))
        for t in range(1, u):
            clauses.append((-(t + 1), -reg(t - 1, k)))
        num_vars = u + max(u - 1, 0) * k
        eng = sat.IncrementalSolver(clauses, num_vars)
        for v in range(1, num_vars + 1):
            eng.set_phase(v, False)
        self._engine = eng
        return eng

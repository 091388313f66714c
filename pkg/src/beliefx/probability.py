"""Exact log-linear semantics of weighted belief bases.

A belief base induces a distribution over total assignments ("worlds"):
P(w) = exp(sum of weights of soft entries satisfied by w) / Z, restricted to
worlds satisfying every hard entry (hard violations get probability zero).
Everything here is exact: probabilities come from exhaustive enumeration
(vectorized, log-space, guarded at 26 variables), and top-k worlds come from
a deterministic branch-and-bound weighted-MaxSAT optimizer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import sat
from .formulas import (
    BeliefBase,
    Clause,
    LimitError,
    PreconditionError,
    Query,
    SolveTimeout,
    World,
)

MAX_ENUM_VARS = 26  # exact-enumeration guard
_CACHE_VARS = 22  # score arrays are kept in memory up to this size
_CHUNK = 1 << 20


@dataclass(frozen=True, order=True)
class LogScore:
    """A natural-log score; -inf is the BottomHard marker (absorbs addition)."""

    value: float

    @property
    def is_bottom(self) -> bool:
        return self.value == -math.inf

    def __add__(self, other: "LogScore | float") -> "LogScore":
        o = other.value if isinstance(other, LogScore) else other
        return LogScore(self.value + o)

    def __float__(self) -> float:
        return self.value


BottomHard = LogScore(-math.inf)


@dataclass(frozen=True)
class RankedWorld:
    world: World
    probability: float | None  # exp(score - log_partition); None above the guard

    def sort_key(self):
        return self.world.values


def world_score(base: BeliefBase, w: World) -> LogScore:
    """Sum of satisfied soft weights, or BottomHard when a hard entry fails."""
    if w.num_vars != base.num_vars:
        raise PreconditionError(
            f"world covers {w.num_vars} variables, base has {base.num_vars}"
        )
    total = 0.0
    for e in base.entries:
        if e.is_hard:
            if not w.satisfies_clause(e.clause):
                return BottomHard
        elif w.satisfies_clause(e.clause):
            total += e.weight
    return LogScore(total)


class Distribution:
    """Cached exact distribution of a belief base (use ``distribution(base)``)."""

    def __init__(self, base: BeliefBase):
        if base.num_vars > MAX_ENUM_VARS:
            raise LimitError(
                f"exact enumeration refused: {base.num_vars} variables exceeds "
                f"the {MAX_ENUM_VARS}-variable guard"
            )
        base.check_hard_satisfiable()
        self.base = base
        self.num_vars = base.num_vars
        self._cached_scores: np.ndarray | None = None
        self._log_z: float | None = None

    # -- enumeration core --------------------------------------------------

    def _clause_mask(self, idx: np.ndarray, clause: Clause) -> np.ndarray:
        m = np.zeros(idx.shape, dtype=bool)
        for lit in clause:
            v = lit if lit > 0 else -lit
            bit = (idx >> (v - 1)) & 1
            m |= bit.astype(bool) if lit > 0 else ~bit.astype(bool)
        return m

    def _chunk_scores(self, lo: int, hi: int) -> np.ndarray:
        idx = np.arange(lo, hi, dtype=np.int64)
        scores = np.zeros(idx.shape, dtype=np.float64)
        for e in self.base.entries:
            mask = self._clause_mask(idx, e.clause)
            if e.is_hard:
                scores[~mask] = -np.inf
            else:
                scores[mask] += e.weight
        return scores

    def _chunks(self) -> Iterable[tuple[int, np.ndarray]]:
        total = 1 << self.num_vars
        if self.num_vars <= _CACHE_VARS:
            if self._cached_scores is None:
                self._cached_scores = self._chunk_scores(0, total)
            yield 0, self._cached_scores
            return
        for lo in range(0, total, _CHUNK):
            yield lo, self._chunk_scores(lo, min(lo + _CHUNK, total))

    @staticmethod
    def _logsumexp(values: np.ndarray) -> float:
        m = values.max() if values.size else -math.inf
        if m == -math.inf:
            return -math.inf
        return float(m + np.log(np.exp(values - m).sum()))

    def log_mass(self, clauses: Sequence[Clause]) -> float:
        """log Σ exp(score) over hard-satisfying worlds satisfying all clauses."""
        total = -math.inf
        for lo, scores in self._chunks():
            if clauses:
                idx = np.arange(lo, lo + scores.shape[0], dtype=np.int64)
                mask = np.ones(scores.shape, dtype=bool)
                for c in clauses:
                    mask &= self._clause_mask(idx, c)
                part = self._logsumexp(scores[mask])
            else:
                part = self._logsumexp(scores)
            total = np.logaddexp(total, part)
        return float(total)

    @property
    def log_partition(self) -> float:
        if self._log_z is None:
            z = self.log_mass(())
            if z == -math.inf:
                raise PreconditionError("hard entries of the belief base are unsatisfiable")
            self._log_z = z
        return self._log_z

    def mass(self, clauses: Sequence[Clause]) -> float:
        """Probability of the conjunction of the given clauses."""
        num = self.log_mass(tuple(clauses))
        if num == -math.inf:
            return 0.0
        return float(math.exp(num - self.log_partition))


@lru_cache(maxsize=128)
def distribution(base: BeliefBase) -> Distribution:
    return Distribution(base)


def _event_clauses(event: Query | Iterable[Clause]) -> tuple[Clause, ...]:
    if isinstance(event, Query):
        return event.clauses
    return tuple(c if isinstance(c, Clause) else Clause(c) for c in event)


def log_partition(base: BeliefBase) -> LogScore:
    return LogScore(distribution(base).log_partition)


def prob(base: BeliefBase, q: Query) -> float:
    """Degree of belief in q: total probability of the worlds satisfying it."""
    d = distribution(base)
    q.check_against(base.num_vars)
    return d.mass(q.clauses)


def cond_prob(base: BeliefBase, q: Query, given: Query | Iterable[Clause]) -> float:
    """P(q | given) where ``given`` is a conjunction of clauses."""
    d = distribution(base)
    q.check_against(base.num_vars)
    given_clauses = _event_clauses(given)
    denom = d.mass(given_clauses)
    if denom <= 0.0:
        raise PreconditionError("conditioning event has zero probability")
    num = d.mass(tuple(q.clauses) + given_clauses)
    return num / denom


# ---------------------------------------------------------------------------
# weighted MaxSAT branch and bound (top-k / MPE)

_EPS = 1e-12


class _MaxSat:
    """Deterministic B&B optimizer: maximize satisfied soft weight.

    Search order is lexicographic (variables ascending, False before True),
    so the first optimum found is the lexicographically smallest one; with
    strict-improvement updates this realizes the documented tie-break.  Hard
    clauses are enforced with unit propagation.
    """

    def __init__(
        self,
        hard: Sequence[Clause],
        soft: Sequence[tuple[Clause, float]],
        num_vars: int,
        deadline: float | None = None,
    ):
        self.num_vars = num_vars
        self.deadline = deadline
        self.hard = [list(c.literals) for c in hard]
        self.soft = [list(c.literals) for c, _ in soft]
        self.weights = [w for _, w in soft]
        self.total_soft = sum(self.weights)
        size = 2 * num_vars + 2
        self.h_occ: list[list[int]] = [[] for _ in range(size)]
        self.s_occ: list[list[int]] = [[] for _ in range(size)]
        for ci, lits in enumerate(self.hard):
            for l in lits:
                self.h_occ[self._lidx(l)].append(ci)
        for ci, lits in enumerate(self.soft):
            for l in lits:
                self.s_occ[self._lidx(l)].append(ci)
        self.val = [0] * (num_vars + 1)
        self.h_true = [0] * len(self.hard)
        self.h_free = [len(c) for c in self.hard]
        self.s_true = [0] * len(self.soft)
        self.s_free = [len(c) for c in self.soft]
        self.violated = 0.0
        self.trail: list[int] = []
        self.best_score: float | None = None
        self.best_model: tuple[bool, ...] | None = None
        self._nodes = 0

    @staticmethod
    def _lidx(lit: int) -> int:
        return (lit << 1) if lit > 0 else ((-lit) << 1) | 1

    # -- assignment bookkeeping ---------------------------------------------

    def _assign(self, lit: int) -> bool:
        """Assign lit true; update counters; False on immediate hard conflict."""
        var = lit if lit > 0 else -lit
        self.val[var] = 1 if lit > 0 else -1
        self.trail.append(lit)
        ok = True
        for ci in self.h_occ[self._lidx(lit)]:
            self.h_true[ci] += 1
            self.h_free[ci] -= 1
        for ci in self.h_occ[self._lidx(-lit)]:
            self.h_free[ci] -= 1
            if self.h_free[ci] == 0 and self.h_true[ci] == 0:
                ok = False
        for ci in self.s_occ[self._lidx(lit)]:
            self.s_true[ci] += 1
            self.s_free[ci] -= 1
        for ci in self.s_occ[self._lidx(-lit)]:
            self.s_free[ci] -= 1
            if self.s_free[ci] == 0 and self.s_true[ci] == 0:
                self.violated += self.weights[ci]
        return ok

    def _undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            lit = self.trail.pop()
            var = lit if lit > 0 else -lit
            self.val[var] = 0
            for ci in self.h_occ[self._lidx(lit)]:
                self.h_true[ci] -= 1
                self.h_free[ci] += 1
            for ci in self.h_occ[self._lidx(-lit)]:
                self.h_free[ci] += 1
            for ci in self.s_occ[self._lidx(lit)]:
                self.s_true[ci] -= 1
                self.s_free[ci] += 1
            for ci in self.s_occ[self._lidx(-lit)]:
                if self.s_free[ci] == 0 and self.s_true[ci] == 0:
                    self.violated -= self.weights[ci]
                self.s_free[ci] += 1

    def _propagate(self, start: int) -> bool:
        """Unit-propagate hard clauses over trail[start:]; False on conflict."""
        qi = start
        while qi < len(self.trail):
            lit = self.trail[qi]
            qi += 1
            for ci in self.h_occ[self._lidx(-lit)]:
                if self.h_true[ci] > 0:
                    continue
                free = self.h_free[ci]
                if free == 0:
                    return False
                if free == 1:
                    unit = 0
                    for l in self.hard[ci]:
                        v = l if l > 0 else -l
                        if self.val[v] == 0:
                            unit = l
                            break
                    if unit and not self._assign(unit):
                        return False
        return True

    def _enter(self, lit: int) -> bool:
        mark = len(self.trail)
        if not self._assign(lit):
            return True  # conflict; caller undoes to its own mark
        return not self._propagate(mark)

    def _leaf_score(self) -> float:
        # exact sequential sum, independent of the incremental accumulator
        total = 0.0
        for ci, w in enumerate(self.weights):
            if self.s_true[ci] > 0:
                total += w
        return total

    # -- search ---------------------------------------------------------------

    def _search(self, next_var: int) -> None:
        self._nodes += 1
        if self.deadline is not None and self._nodes % 2048 == 0:
            if time.monotonic() > self.deadline:
                raise SolveTimeout("optimizer deadline exceeded")
        if (
            self.best_score is not None
            and self.total_soft - self.violated <= self.best_score + _EPS
        ):
            return
        v = next_var
        while v <= self.num_vars and self.val[v] != 0:
            v += 1
        if v > self.num_vars:
            score = self._leaf_score()
            if self.best_score is None or score > self.best_score + _EPS:
                self.best_score = score
                self.best_model = tuple(self.val[u] == 1 for u in range(1, self.num_vars + 1))
            return
        for lit in (-v, v):  # False first: lexicographic leaf order
            mark = len(self.trail)
            conflict = self._enter(lit)
            if not conflict:
                self._search(v + 1)
            self._undo_to(mark)

    def solve(self) -> tuple[World, float] | None:
        """Best world and its exact soft score, or None if hard is unsatisfiable."""
        if any(len(c) == 0 for c in self.hard):
            return None
        for lits in self.hard:
            if len(lits) == 1:
                lit = lits[0]
                var = lit if lit > 0 else -lit
                if self.val[var] == 0:
                    if not self._assign(lit):
                        return None
                elif (self.val[var] == 1) != (lit > 0):
                    return None
        if not self._propagate(0):
            return None
        self._search(1)
        if self.best_model is None:
            return None
        return World(self.best_model), self.best_score


def _optimize(
    hard: Sequence[Clause],
    soft: Sequence[tuple[Clause, float]],
    num_vars: int,
    deadline: float | None,
) -> tuple[World, float] | None:
    solver = _MaxSat(hard, soft, num_vars, deadline)
    return solver.solve()


def top_k_models(
    base: BeliefBase,
    constraint: Query,
    k: int,
    deadline: float | None = None,
) -> list[tuple[World, float]]:
    """The k best-scoring hard-satisfying worlds meeting the constraint.

    Probability-free core of top_k_worlds: returns (world, soft score) pairs
    in non-increasing score order (ties lexicographic).  Works above the
    enumeration guard because no partition function is needed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    base.check_hard_satisfiable()
    constraint.check_against(base.num_vars)
    hard = list(base.hard_clauses) + list(constraint.clauses)
    if not sat.is_sat(hard, num_vars=base.num_vars).satisfiable:
        raise PreconditionError("constraint is unsatisfiable with the hard entries")
    soft = [(e.clause, e.weight) for e in base.soft_entries]
    out: list[tuple[World, float]] = []
    blocking: list[Clause] = []
    while len(out) < k:
        res = _optimize(hard + blocking, soft, base.num_vars, deadline)
        if res is None:
            break
        world, score = res
        out.append((world, score))
        blocking.append(
            Clause(tuple(-(v) if world.values[v - 1] else v for v in range(1, base.num_vars + 1)))
        )
        if base.num_vars == 0:
            break
    return out


def top_k_worlds(
    base: BeliefBase,
    constraint: Query,
    k: int,
    deadline: float | None = None,
) -> list[RankedWorld]:
    """The k most probable worlds satisfying hard entries and the constraint."""
    d = distribution(base)  # applies the variable guard and hard check
    models = top_k_models(base, constraint, k, deadline)
    z = d.log_partition
    return [RankedWorld(w, math.exp(score - z)) for w, score in models]


def mpe(base: BeliefBase, evidence: Query, deadline: float | None = None) -> RankedWorld:
    """Most probable world consistent with the evidence."""
    return top_k_worlds(base, evidence, 1, deadline)[0]


def intersections(
    kb_source, worlds: Sequence[RankedWorld | World], k: int
) -> frozenset[int]:
    """Indices of source clauses satisfied by every one of the first k worlds."""
    if not 1 <= k <= len(worlds):
        raise ValueError(f"k={k} out of range 1..{len(worlds)}")
    ws = [w.world if isinstance(w, RankedWorld) else w for w in worlds[:k]]
    out = []
    for i, clause in enumerate(kb_source.clauses):
        if all(w.satisfies_clause(clause) for w in ws):
            out.append(i)
    return frozenset(out)

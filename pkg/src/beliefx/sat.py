"""Bundled CDCL SAT engine: satisfiability, models, entailment, backbones.

The engine is deterministic so that results are reproducible bit-for-bit
across runs:

* branching picks the unassigned variable with the highest conflict-driven
  activity (ties broken by lowest index, so the very first decisions walk
  variables in ascending order) and assigns its saved polarity, initially
  positive;
* whenever the current partial assignment already satisfies every input
  clause, the remaining variables are completed with False and that model is
  returned (learned clauses are implied by the input, so the completion is
  sound);
* conflict-driven learning uses first-UIP clauses with two-watched-literal
  propagation; restarts follow the Luby sequence with a fixed conflict unit.

Every call builds a fresh solver, so results depend only on the arguments.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

from .formulas import (
    Clause,
    KnowledgeBase,
    Literal,
    PreconditionError,
    Query,
    World,
    negate_query,
)


@dataclass(frozen=True)
class SatResult:
    status: str  # "sat" or "unsat"
    model: World | None  # present iff sat

    @property
    def satisfiable(self) -> bool:
        return self.status == "sat"


def _as_literal_lists(clauses: Iterable) -> list[list[Literal]]:
    out = []
    for c in clauses:
        if isinstance(c, Clause):
            out.append(list(c.literals))
        else:
            out.append(list(c))
    return out


_RESTART_UNIT = 128  # conflicts per Luby step
_ACT_DECAY = 1.0 / 0.95
_CLA_DECAY = 1.0 / 0.999
_ACT_RESCALE = 1e100


class _Solver:
    """One-shot CDCL solver over clauses 1..num_vars; see module docstring."""

    def __init__(self, clauses: list[list[Literal]], num_vars: int):
        self.num_vars = num_vars
        self.clauses: list[list[Literal]] = []  # originals then learned
        self.n_original = 0
        self.values = [0] * (num_vars + 1)  # 0 unassigned, 1 true, -1 false
        self.levels = [0] * (num_vars + 1)
        self.reasons: list[int | None] = [None] * (num_vars + 1)
        self.trail: list[Literal] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[int]] = [[] for _ in range(2 * num_vars + 2)]
        self.ok = True
        self._sat_scan_from = 0  # rotating pointer for the all-satisfied scan
        self.acts = [0.0] * (num_vars + 1)
        self.act_inc = 1.0
        self.phase = [True] * (num_vars + 1)
        self.heap = [(0.0, v) for v in range(1, num_vars + 1)]  # already a heap
        self.assume_stack: list[Literal] = []  # assumptions with a live level
        self.cla_act: list[float] = []  # learned-clause activities
        self.cla_inc = 1.0
        for lits in clauses:
            if not self._add_original(lits):
                self.ok = False
                break
        self.max_learnts = max(4000, self.n_original)

    # -- literal helpers ---------------------------------------------------

    def _lidx(self, lit: Literal) -> int:
        return (lit << 1) if lit > 0 else ((-lit) << 1) | 1

    def _value(self, lit: Literal) -> int:
        v = self.values[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    # -- clause setup ------------------------------------------------------

    def _add_original(self, lits: list[Literal]) -> bool:
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.cla_act.append(0.0)
        self.n_original = ci + 1
        if not lits:
            return False
        if len(lits) == 1:
            return self._enqueue_root(lits[0])
        self.watches[self._lidx(lits[0])] += (ci, lits[1])
        self.watches[self._lidx(lits[1])] += (ci, lits[0])
        return True

    def _enqueue_root(self, lit: Literal) -> bool:
        v = self._value(lit)
        if v == 1:
            return True
        if v == -1:
            return False
        self._assign(lit, None)
        return True

    def _assign(self, lit: Literal, reason: int | None) -> None:
        var = lit if lit > 0 else -lit
        self.values[var] = 1 if lit > 0 else -1
        self.levels[var] = len(self.trail_lim)
        self.reasons[var] = reason
        self.phase[var] = lit > 0
        self.trail.append(lit)

    # -- activity ------------------------------------------------------------

    def _bump(self, var: int) -> None:
        act = self.acts[var] + self.act_inc
        self.acts[var] = act
        if act > _ACT_RESCALE:
            scale = 1.0 / _ACT_RESCALE
            for v in range(1, self.num_vars + 1):
                self.acts[v] *= scale
            self.act_inc *= scale
            self._rebuild_heap()
        else:
            heapq.heappush(self.heap, (-act, var))

    def _rebuild_heap(self) -> None:
        self.heap = [
            (-self.acts[v], v) for v in range(1, self.num_vars + 1)
            if self.values[v] == 0
        ]
        heapq.heapify(self.heap)

    def _bump_clause(self, ci: int) -> None:
        act = self.cla_act[ci] + self.cla_inc
        self.cla_act[ci] = act
        if act > _ACT_RESCALE:
            scale = 1.0 / _ACT_RESCALE
            for i in range(self.n_original, len(self.cla_act)):
                self.cla_act[i] *= scale
            self.cla_inc *= scale

    def _pick_var(self) -> int | None:
        heap = self.heap
        while heap:
            neg_act, var = heapq.heappop(heap)
            if self.values[var] == 0 and self.acts[var] == -neg_act:
                return var
        # every queued entry was stale; rebuild from scratch once
        self._rebuild_heap()
        if self.heap:
            return heapq.heappop(self.heap)[1]
        return None

    # -- propagation -------------------------------------------------------

    def _propagate(self) -> int | None:
        """Unit-propagate; return a conflicting clause index or None.

        Watch lists hold (clause index, blocker literal) pairs flattened
        into one list; a true blocker skips the clause without touching
        its literal array."""
        values = self.values
        clauses = self.clauses
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            fl = -p  # literal that became false
            wl = watches[(p << 1) | 1 if p > 0 else (-p) << 1]
            i = j = 0
            n = len(wl)
            while i < n:
                ci = wl[i]
                blk = wl[i + 1]
                i += 2
                if (values[blk] if blk > 0 else -values[-blk]) == 1:
                    wl[j] = ci
                    wl[j + 1] = blk
                    j += 2
                    continue
                lits = clauses[ci]
                if lits[0] == fl:
                    lits[0] = lits[1]
                    lits[1] = fl
                first = lits[0]
                fv = values[first] if first > 0 else -values[-first]
                if fv == 1:
                    wl[j] = ci
                    wl[j + 1] = first
                    j += 2
                    continue
                moved = False
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if (values[lk] if lk > 0 else -values[-lk]) != -1:
                        lits[1] = lk
                        lits[k] = fl
                        watches[(lk << 1) if lk > 0 else ((-lk) << 1) | 1] += (ci, first)
                        moved = True
                        break
                if moved:
                    continue
                wl[j] = ci
                wl[j + 1] = first
                j += 2
                if fv == -1:  # conflict
                    while i < n:
                        wl[j] = wl[i]
                        wl[j + 1] = wl[i + 1]
                        j += 2
                        i += 2
                    del wl[j:]
                    self.qhead = len(trail)
                    return ci
                self._assign(first, ci)
            del wl[j:]
        return None

    # -- conflict analysis ---------------------------------------------------

    def _analyze(self, confl: int) -> tuple[list[Literal], int]:
        """First-UIP learned clause and its backjump level."""
        dl = len(self.trail_lim)
        seen = [False] * (self.num_vars + 1)
        out: list[Literal] = []
        counter = 0
        p: Literal | None = None
        idx = len(self.trail) - 1
        ci = confl
        while True:
            if ci >= self.n_original:
                self._bump_clause(ci)
            reason_lits = self.clauses[ci]
            for q in reason_lits:
                if p is not None and q == p:
                    continue
                v = q if q > 0 else -q
                if not seen[v] and self.levels[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.levels[v] >= dl:
                        counter += 1
                    else:
                        out.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            ci = self.reasons[abs(p)]
        learnt = [-p] + out
        if not out:
            bt = 0
        else:
            bt = max(self.levels[q if q > 0 else -q] for q in out)
            # put a highest-level literal in watch position 1
            for k in range(1, len(learnt)):
                v = abs(learnt[k])
                if self.levels[v] == bt:
                    learnt[1], learnt[k] = learnt[k], learnt[1]
                    break
        return learnt, bt

    def _backjump(self, level: int) -> None:
        target = self.trail_lim[level]
        for lit in reversed(self.trail[target:]):
            var = lit if lit > 0 else -lit
            self.values[var] = 0
            self.reasons[var] = None
        del self.trail[target:]
        del self.trail_lim[level:]
        del self.assume_stack[level:]
        self.qhead = len(self.trail)

    def _record_learnt(self, learnt: list[Literal]) -> None:
        if len(learnt) == 1:
            self._assign(learnt[0], None)
            return
        ci = len(self.clauses)
        self.clauses.append(learnt)
        self.cla_act.append(self.cla_inc)
        self.watches[self._lidx(learnt[0])].append(ci)
        self.watches[self._lidx(learnt[1])].append(ci)
        self._assign(learnt[0], ci)

    def _reduce_db(self) -> None:
        """Drop the less active half of the learned clauses.

        Clauses currently acting as a reason and binary clauses are kept;
        watches and reason indices are rebuilt around the compacted array.
        The clause positions 0/1 stay the watched literals, so the watch
        invariant survives mid-search reduction.
        """
        n0 = self.n_original
        ranked = sorted(
            range(n0, len(self.clauses)),
            key=lambda ci: (self.cla_act[ci], ci),
        )
        drop: set[int] = set()
        for ci in ranked[: len(ranked) // 2]:
            lits = self.clauses[ci]
            if len(lits) <= 2:
                continue
            v = lits[0] if lits[0] > 0 else -lits[0]
            if self.values[v] != 0 and self.reasons[v] == ci:
                continue  # locked: reason of a current assignment
            drop.add(ci)
        self.max_learnts = int(self.max_learnts * 1.3) + 16
        if not drop:
            return
        remap: dict[int, int] = {}
        new_clauses = self.clauses[:n0]
        new_act = self.cla_act[:n0]
        for ci in range(n0, len(self.clauses)):
            if ci in drop:
                continue
            remap[ci] = len(new_clauses)
            new_clauses.append(self.clauses[ci])
            new_act.append(self.cla_act[ci])
        self.clauses = new_clauses
        self.cla_act = new_act
        for v in range(1, self.num_vars + 1):
            r = self.reasons[v]
            if r is None:
                continue
            if self.values[v] == 0:
                self.reasons[v] = None  # stale entry from an old backjump
            elif r >= n0:
                self.reasons[v] = remap[r]
        for wl in self.watches:
            del wl[:]
        for ci, lits in enumerate(new_clauses):
            if len(lits) >= 2:
                self.watches[self._lidx(lits[0])].append(ci)
                self.watches[self._lidx(lits[1])].append(ci)

    # -- model policy --------------------------------------------------------

    def _all_original_satisfied(self) -> bool:
        values = self.values
        clauses = self.clauses
        n = self.n_original
        start = self._sat_scan_from
        for off in range(n):
            ci = start + off
            if ci >= n:
                ci -= n
            sat = False
            for lit in clauses[ci]:
                if (values[lit] if lit > 0 else -values[-lit]) == 1:
                    sat = True
                    break
            if not sat:
                self._sat_scan_from = ci
                return False
        return True

    def _model(self) -> World:
        # unassigned variables are completed with False
        return World(tuple(self.values[v] == 1 for v in range(1, self.num_vars + 1)))

    # -- main loop -------------------------------------------------------------

    def solve(self, assumptions: Sequence[Literal]) -> SatResult:
        """Solve under the given assumptions.

        May be called repeatedly with different assumptions; learned clauses
        (implied by the original clauses alone) carry over between calls, and
        assumption levels shared with the previous call are kept in place, so
        sweeps over slowly-changing assumption sets stay cheap.
        """
        if not self.ok:
            return SatResult("unsat", None)
        keep = 0
        stack = self.assume_stack
        while keep < len(stack) and keep < len(assumptions) and stack[keep] == assumptions[keep]:
            keep += 1
        if len(self.trail_lim) > keep:
            self._backjump(keep)
        placed = keep
        conflicts = 0
        luby_u = luby_v = 1
        budget = _RESTART_UNIT  # conflicts until the next restart
        while True:
            confl = self._propagate()
            if confl is not None:
                if not self.trail_lim:
                    self.ok = False  # conflict among implied roots: clauses unsat
                    return SatResult("unsat", None)
                conflicts += 1
                self.act_inc *= _ACT_DECAY
                self.cla_inc *= _CLA_DECAY
                learnt, bt = self._analyze(confl)
                self._backjump(bt)
                if bt < placed:
                    placed = bt
                self._record_learnt(learnt)
                if len(self.clauses) - self.n_original > self.max_learnts:
                    self._reduce_db()
                continue
            if conflicts >= budget and len(self.trail_lim) > placed:
                self._backjump(placed)  # restart, keeping assumption levels
                if (luby_u & -luby_u) == luby_v:
                    luby_u += 1
                    luby_v = 1
                else:
                    luby_v *= 2
                budget = conflicts + luby_v * _RESTART_UNIT
                continue
            if placed < len(assumptions):
                a = assumptions[placed]
                if self._value(a) == -1:
                    return SatResult("unsat", None)
                self.trail_lim.append(len(self.trail))
                self.assume_stack.append(a)
                placed += 1
                if self._value(a) == 0:
                    self._assign(a, None)
                continue
            if self._all_original_satisfied():
                return SatResult("sat", self._model())
            var = self._pick_var()
            if var is None:
                return SatResult("sat", self._model())
            self.trail_lim.append(len(self.trail))
            self._assign(var if self.phase[var] else -var, None)


class IncrementalSolver:
    """A reusable solver over a fixed variable range.

    Clauses can be added between ``solve`` calls; learned clauses and
    branching activity persist, which makes long sequences of related
    queries (growing subsets, assumption probes) much cheaper than fresh
    ``is_sat`` calls.  Not exported: internal plumbing for minsets.
    """

    def __init__(self, clauses: Iterable, num_vars: int):
        self._solver = _Solver(_as_literal_lists(clauses), num_vars)

    def add_clause(self, clause: Clause | Iterable[Literal]) -> None:
        lits = list(clause.literals) if isinstance(clause, Clause) else list(clause)
        s = self._solver
        for l in lits:
            if (l if l > 0 else -l) > s.num_vars:
                raise ValueError(f"literal {l} outside the solver's variable range")
        if s.trail_lim:
            s._backjump(0)
        if not s._add_original(lits):
            s.ok = False
        s.qhead = 0  # replay root propagation so the new watches are seen

    def set_phase(self, var: int, value: bool) -> None:
        """Set the initial branching polarity of a variable (a hint only;
        phase saving overrides it once the variable has been assigned)."""
        self._solver.phase[var] = value

    def solve(self, assumptions: Sequence[Literal] = ()) -> SatResult:
        return self._solver.solve(tuple(assumptions))


def is_sat(
    clauses: Iterable,
    assumptions: Sequence[Literal] = (),
    num_vars: int | None = None,
) -> SatResult:
    """Satisfiability of a clause set under assumption literals.

    Deterministic: the returned model follows the fixed branching policy
    documented in the module docstring.  The model always covers variables
    1..num_vars (inferred from the input when not given).
    """
    lits = _as_literal_lists(clauses)
    maxv = 0
    for c in lits:
        for l in c:
            a = l if l > 0 else -l
            if a > maxv:
                maxv = a
    for l in assumptions:
        a = l if l > 0 else -l
        if a > maxv:
            maxv = a
    if num_vars is None:
        num_vars = maxv
    elif maxv > num_vars:
        raise ValueError(f"clauses use variable {maxv} > num_vars={num_vars}")
    solver = _Solver(lits, num_vars)
    return solver.solve(tuple(assumptions))


def entails(kb: KnowledgeBase, q: Query) -> bool:
    """True iff every model of kb satisfies q.  Inconsistent kb is an error."""
    if not is_sat(kb.clauses, num_vars=kb.num_vars).satisfiable:
        raise PreconditionError("knowledge base is inconsistent")
    q.check_against(kb.num_vars)
    negation = negate_query(q, kb.num_vars)
    return not is_sat(tuple(kb.clauses) + negation).satisfiable


def backbone(kb: KnowledgeBase) -> frozenset[Literal]:
    """All literals entailed by a consistent kb.

    One initial model, then one assumption-based call per surviving candidate
    (a literal true in every model seen so far); every discovered countermodel
    prunes the candidate pool.  A single solver instance is reused across the
    calls so clauses learned while refuting one candidate speed up the next.
    """
    solver = _Solver(_as_literal_lists(kb.clauses), kb.num_vars)
    first = solver.solve(())
    if not first.satisfiable:
        raise PreconditionError("knowledge base is inconsistent")
    model = first.model
    candidates: dict[int, Literal] = {
        v: (v if model.value(v) else -v) for v in range(1, kb.num_vars + 1)
    }
    result: set[Literal] = set()
    for v in range(1, kb.num_vars + 1):
        lit = candidates.get(v)
        if lit is None:
            continue
        r = solver.solve((-lit,))
        if not r.satisfiable:
            result.add(lit)
        else:
            m = r.model
            for u in list(candidates):
                cand = candidates[u]
                if not m.satisfies_literal(cand):
                    del candidates[u]
    return frozenset(result)

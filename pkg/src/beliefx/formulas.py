"""Clause-level propositional containers and DIMACS-style serialization.

Literals are plain DIMACS integers: variable ``v`` is the positive literal
``v``, its negation is ``-v``.  Clauses keep a canonical literal order so that
structural equality, hashing and serialization are stable.  Knowledge bases
and belief bases are immutable; clause identity is positional (index), which
is what every explanation in this package is expressed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class ParseError(ValueError):
    """Malformed textual input; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(ValueError):
    """An operation was called on semantically unsuitable input."""


class LimitError(RuntimeError):
    """An internal resource guard was hit (e.g. exact-enumeration size)."""


class SolveTimeout(RuntimeError):
    """A cooperative deadline expired inside a solver loop."""


Literal = int
Variable = int


def lit_var(lit: Literal) -> Variable:
    return abs(lit)


def _canonical(literals: Iterable[Literal]) -> tuple[Literal, ...]:
    # sorted by variable, negative phase before positive for equal variables
    return tuple(sorted(set(literals), key=lambda l: (abs(l), l)))


@dataclass(frozen=True, order=True)
class Clause:
    """A disjunction of literals in canonical order (deduplicated, sorted)."""

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal]):
        raw = tuple(literals)
        for l in raw:
            if not isinstance(l, int) or l == 0:
                raise ValueError(f"invalid literal {l!r}")
        object.__setattr__(self, "literals", _canonical(raw))

    @property
    def is_tautology(self) -> bool:
        seen = set(self.literals)
        return any(-l in seen for l in self.literals)

    @property
    def max_var(self) -> Variable:
        return max((abs(l) for l in self.literals), default=0)

    def satisfied_by(self, assignment: dict[Variable, bool]) -> bool:
        return any(assignment.get(abs(l)) == (l > 0) for l in self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        return " ".join(str(l) for l in self.literals) + " 0"


HARD = math.inf


@dataclass(frozen=True)
class WeightedClause:
    """A clause with a positive finite weight, or a hard (inviolable) clause."""

    clause: Clause
    weight: float  # math.inf marks a hard clause

    def __post_init__(self):
        w = self.weight
        if w != HARD and not (isinstance(w, (int, float)) and math.isfinite(w) and w > 0):
            raise ValueError(f"soft weight must be positive and finite, got {w!r}")

    @property
    def is_hard(self) -> bool:
        return self.weight == HARD


def _check_clauses(clauses: tuple[Clause, ...], num_vars: int, what: str) -> None:
    if num_vars < 0:
        raise ValueError("num_vars must be >= 0")
    for i, c in enumerate(clauses):
        if len(c) == 0:
            raise ValueError(f"{what} clause {i} is empty")
        if c.is_tautology:
            raise ValueError(f"{what} clause {i} is a tautology: {c}")
        if c.max_var > num_vars:
            raise ValueError(f"{what} clause {i} uses variable {c.max_var} > num_vars={num_vars}")


@dataclass(frozen=True)
class KnowledgeBase:
    """An indexed set of clauses; explanations refer to these indices."""

    clauses: tuple[Clause, ...]
    num_vars: int

    def __init__(self, clauses: Iterable[Clause | Iterable[Literal]], num_vars: int | None = None):
        cs = tuple(c if isinstance(c, Clause) else Clause(c) for c in clauses)
        if num_vars is None:
            num_vars = max((c.max_var for c in cs), default=0)
        _check_clauses(cs, num_vars, "KB")
        object.__setattr__(self, "clauses", cs)
        object.__setattr__(self, "num_vars", num_vars)

    def __len__(self) -> int:
        return len(self.clauses)

    def __getitem__(self, i: int) -> Clause:
        return self.clauses[i]

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def clause_set(self) -> frozenset[Clause]:
        return frozenset(self.clauses)

    def subset(self, indices: Iterable[int]) -> "KnowledgeBase":
        """KB restricted to the given clause indices (num_vars preserved)."""
        return KnowledgeBase((self.clauses[i] for i in sorted(indices)), self.num_vars)


@dataclass(frozen=True)
class BeliefBase:
    """A weighted (log-linear) clause base; hard entries must be satisfiable.

    Hard entries restrict the distribution's support: worlds violating any
    hard entry have probability zero.  The satisfiability of the hard slice
    is checked lazily the first time the base is used probabilistically.
    """

    entries: tuple[WeightedClause, ...]
    num_vars: int
    _hard_ok: list = field(default=None, compare=False, repr=False, hash=False)

    def __init__(self, entries: Iterable[WeightedClause | tuple], num_vars: int | None = None):
        es = []
        for e in entries:
            if not isinstance(e, WeightedClause):
                clause, weight = e
                if not isinstance(clause, Clause):
                    clause = Clause(clause)
                e = WeightedClause(clause, float(weight))
            es.append(e)
        es = tuple(es)
        if num_vars is None:
            num_vars = max((e.clause.max_var for e in es), default=0)
        _check_clauses(tuple(e.clause for e in es), num_vars, "belief base")
        object.__setattr__(self, "entries", es)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "_hard_ok", [None])  # lazy cache cell

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> WeightedClause:
        return self.entries[i]

    def __iter__(self) -> Iterator[WeightedClause]:
        return iter(self.entries)

    @property
    def hard_clauses(self) -> tuple[Clause, ...]:
        return tuple(e.clause for e in self.entries if e.is_hard)

    @property
    def soft_entries(self) -> tuple[WeightedClause, ...]:
        return tuple(e for e in self.entries if not e.is_hard)

    def check_hard_satisfiable(self) -> None:
        """Raise PreconditionError if the hard slice is unsatisfiable (cached)."""
        cell = self._hard_ok
        if cell[0] is None:
            from . import sat

            cell[0] = sat.is_sat([c.literals for c in self.hard_clauses], num_vars=self.num_vars).satisfiable
        if not cell[0]:
            raise PreconditionError("hard entries of the belief base are unsatisfiable")


def classical_projection(base: BeliefBase) -> KnowledgeBase:
    """Drop all weights: the belief base's clauses as a plain KB, same order."""
    return KnowledgeBase((e.clause for e in base.entries), base.num_vars)


@dataclass(frozen=True)
class Query:
    """A conjunction of clauses to be explained or measured.

    Unlike KB clauses, query clauses may be tautological (they denote events,
    not base members); evaluators handle that semantically.
    """

    clauses: tuple[Clause, ...]

    def __init__(self, clauses: Iterable[Clause | Iterable[Literal]] | Clause):
        if isinstance(clauses, Clause):
            clauses = (clauses,)
        cs = tuple(c if isinstance(c, Clause) else Clause(c) for c in clauses)
        if not cs:
            raise ValueError("a query needs at least one clause")
        for c in cs:
            if len(c) == 0:
                raise ValueError("query clause is empty")
        object.__setattr__(self, "clauses", cs)

    @classmethod
    def literal(cls, lit: Literal) -> "Query":
        return cls((Clause((lit,)),))

    @classmethod
    def literals(cls, lits: Iterable[Literal]) -> "Query":
        """Conjunction of unit clauses, one per literal."""
        return cls(tuple(Clause((l,)) for l in lits))

    @property
    def max_var(self) -> Variable:
        return max((c.max_var for c in self.clauses), default=0)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def check_against(self, num_vars: int) -> None:
        if self.max_var > num_vars:
            raise PreconditionError(
                f"query uses variable {self.max_var} but the base has only {num_vars} variables"
            )


@dataclass(frozen=True)
class World:
    """A total assignment over variables 1..num_vars."""

    values: tuple[bool, ...]

    @property
    def num_vars(self) -> int:
        return len(self.values)

    def value(self, var: Variable) -> bool:
        return self.values[var - 1]

    def satisfies_literal(self, lit: Literal) -> bool:
        return self.values[abs(lit) - 1] == (lit > 0)

    def satisfies_clause(self, clause: Clause) -> bool:
        return any(self.satisfies_literal(l) for l in clause)

    def satisfies_all(self, clauses: Iterable[Clause]) -> bool:
        return all(self.satisfies_clause(c) for c in clauses)

    @classmethod
    def from_index(cls, index: int, num_vars: int) -> "World":
        """Variable v is true iff bit v-1 of index is set."""
        return cls(tuple(bool((index >> (v - 1)) & 1) for v in range(1, num_vars + 1)))

    def to_index(self) -> int:
        return sum(1 << i for i, b in enumerate(self.values) if b)


def negate_query(query: Query, num_vars: int | None = None) -> tuple[Clause, ...]:
    """Clauses equivalent to the negation of ``query``.

    A conjunction of unit clauses negates to a single clause of flipped
    literals.  Otherwise one fresh selector variable is introduced per query
    clause (numbered above ``num_vars``): selectors are never part of any
    explanation, so the extra variables are harmless downstream.
    """
    if num_vars is None:
        num_vars = query.max_var
    if all(len(c) == 1 for c in query.clauses):
        return (Clause(tuple(-c.literals[0] for c in query.clauses)),)
    out: list[Clause] = []
    selectors = []
    nxt = max(num_vars, query.max_var)
    for c in query.clauses:
        nxt += 1
        selectors.append(nxt)
        for l in c:
            out.append(Clause((-nxt, -l)))
    out.insert(0, Clause(tuple(selectors)))
    return tuple(out)


# ---------------------------------------------------------------------------
# serialization


def _split_lines(text: str | bytes) -> list[str]:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return text.split("\n")


def _parse_clause_tokens(tokens: list[str], lineno: int) -> list[Literal]:
    if not tokens or tokens[-1] != "0":
        raise ParseError("clause line must end with 0", lineno)
    lits: list[Literal] = []
    for tok in tokens[:-1]:
        try:
            lit = int(tok)
        except ValueError:
            raise ParseError(f"bad literal {tok!r}", lineno) from None
        if lit == 0:
            raise ParseError("unexpected 0 inside clause", lineno)
        lits.append(lit)
    return lits


def parse_cnf(text: str | bytes) -> KnowledgeBase:
    """Parse DIMACS CNF (``p cnf V C`` header, ``c`` comments, 0-terminated lines)."""
    num_vars = None
    expected = None
    clauses: list[Clause] = []
    for lineno, raw in enumerate(_split_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise ParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                num_vars, expected = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or expected < 0:
                raise ParseError(f"malformed header {line!r}", lineno)
            continue
        if num_vars is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        lits = _parse_clause_tokens(line.split(), lineno)
        for lit in lits:
            if abs(lit) > num_vars:
                raise ParseError(f"literal {lit} out of range (header says {num_vars} vars)", lineno)
        clause = Clause(lits)
        if len(clause) == 0:
            raise ParseError("empty clause", lineno)
        if clause.is_tautology:
            raise ParseError(f"tautological clause: {clause}", lineno)
        clauses.append(clause)
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    if len(clauses) != expected:
        raise ParseError(f"header announced {expected} clauses, found {len(clauses)}")
    return KnowledgeBase(clauses, num_vars)


def write_cnf(kb: KnowledgeBase) -> str:
    lines = [f"p cnf {kb.num_vars} {len(kb.clauses)}"]
    lines.extend(str(c) for c in kb.clauses)
    return "\n".join(lines) + "\n"


def format_weight(w: float) -> str:
    """Weights are serialized to 9 significant digits (round-trip stable)."""
    return format(w, ".9g")


def parse_wcnf(text: str | bytes) -> BeliefBase:
    """Parse new-style (header-less) WCNF: ``h`` rows are hard, numeric rows soft."""
    entries: list[WeightedClause] = []
    any_line = False
    for lineno, raw in enumerate(_split_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            raise ParseError("headers are not used in WCNF input", lineno)
        any_line = True
        tokens = line.split()
        head, rest = tokens[0], tokens[1:]
        if head == "h":
            weight = HARD
        else:
            try:
                weight = float(head)
            except ValueError:
                raise ParseError(f"bad weight {head!r}", lineno) from None
            if not math.isfinite(weight) or weight <= 0:
                raise ParseError(f"weight must be positive and finite, got {head!r}", lineno)
        lits = _parse_clause_tokens(rest, lineno)
        clause = Clause(lits)
        if len(clause) == 0:
            raise ParseError("empty clause", lineno)
        if clause.is_tautology:
            raise ParseError(f"tautological clause: {clause}", lineno)
        entries.append(WeightedClause(clause, weight))
    if not any_line:
        raise ParseError("no clauses found in WCNF input")
    return BeliefBase(entries)


def write_wcnf(base: BeliefBase) -> str:
    lines = []
    for e in base.entries:
        prefix = "h" if e.is_hard else format_weight(e.weight)
        lines.append(f"{prefix} {e.clause}")
    return "\n".join(lines) + "\n"


def parse_query(text: str | bytes) -> Query:
    """Parse a query file: header-less, 0-terminated clause lines (a conjunction)."""
    clauses: list[Clause] = []
    for lineno, raw in enumerate(_split_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        lits = _parse_clause_tokens(line.split(), lineno)
        clause = Clause(lits)
        if len(clause) == 0:
            raise ParseError("empty clause", lineno)
        clauses.append(clause)
    if not clauses:
        raise ParseError("query file contains no clauses")
    return Query(tuple(clauses))


def write_query(query: Query) -> str:
    return "\n".join(str(c) for c in query.clauses) + "\n"

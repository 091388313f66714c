"""Benchmark harness: instance generators, scenarios, and suite execution.

Generators are fully deterministic per seed (a single random.Random stream,
consumed in a documented order).  Suites are directories of
``<name>.cnf``/``<name>.wcnf`` + ``<name>.query`` files, with an optional
``<name>.human.wcnf`` for the reconciliation algorithms; ``run_suite``
executes one algorithm per instance in worker processes under a cooperative
deadline, with a hard watchdog at timeout + 0.5 s.
"""

from __future__ import annotations

import csv
import json
import math
import multiprocessing
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import explain, sat
from .formulas import (
    HARD,
    BeliefBase,
    Clause,
    KnowledgeBase,
    LimitError,
    ParseError,
    PreconditionError,
    Query,
    SolveTimeout,
    WeightedClause,
    classical_projection,
    parse_cnf,
    parse_query,
    parse_wcnf,
)

ALGORITHMS = ("alg1", "alg2", "alg3", "alg4")

DEFAULT_WEIGHT_RANGE = (0.5, 5.0)

#: watchdog slack on top of the cooperative deadline, in seconds
WATCHDOG_SLACK = 0.5


# ---------------------------------------------------------------------------
# generators


def gen_random_cnf(
    n_vars: int, n_clauses: int, width: int = 3, seed: int = 0
) -> KnowledgeBase:
    """Uniform random width-`width` CNF; clauses deduplicated, never tautological.

    Each clause draws `width` distinct variables (so no tautologies) and
    independent random polarities.  Duplicates are redrawn; if the requested
    count exceeds what the parameters allow, raises PreconditionError.
    """
    if n_vars < 1 or n_clauses < 0 or width < 1:
        raise PreconditionError("n_vars and width must be >= 1, n_clauses >= 0")
    if width > n_vars:
        raise PreconditionError(
            f"clause width {width} exceeds variable count {n_vars}"
        )
    distinct = math.comb(n_vars, width) * (2**width)
    if n_clauses > distinct:
        raise PreconditionError(
            f"cannot draw {n_clauses} distinct clauses; only {distinct} exist"
        )
    rng = random.Random(seed)
    seen: set[Clause] = set()
    out: list[Clause] = []
    attempts = 0
    cap = 1000 + 200 * n_clauses
    while len(out) < n_clauses:
        attempts += 1
        if attempts > cap:
            raise PreconditionError(
                "exceeded retry budget while deduplicating random clauses"
            )
        chosen = rng.sample(range(1, n_vars + 1), width)
        clause = Clause(tuple(v if rng.random() < 0.5 else -v for v in chosen))
        if clause in seen:
            continue
        seen.add(clause)
        out.append(clause)
    return KnowledgeBase(out, n_vars)


def _round_weight(w: float) -> float:
    # 9 significant digits: survives the WCNF write/parse round trip exactly
    return float(format(w, ".9g"))


def assign_random_weights(
    kb: KnowledgeBase,
    lo: float = DEFAULT_WEIGHT_RANGE[0],
    hi: float = DEFAULT_WEIGHT_RANGE[1],
    seed: int = 0,
) -> BeliefBase:
    """Weight every clause uniformly in [lo, hi] (all soft)."""
    if not (0 < lo <= hi) or math.isinf(hi):
        raise PreconditionError(f"invalid weight range [{lo}, {hi}]")
    rng = random.Random(seed)
    entries = tuple(
        WeightedClause(c, _round_weight(rng.uniform(lo, hi))) for c in kb.clauses
    )
    return BeliefBase(entries, kb.num_vars)


def make_human_scenario(kb: KnowledgeBase, scenario: int, seed: int = 0) -> KnowledgeBase:
    """Degrade a knowledge base: scenario s removes 10·s % of the clauses,
    then strips 20% of the literals (rounded down) from 10·s % of the
    remaining clauses.  Clauses emptied by stripping are dropped.
    """
    if scenario not in (1, 2, 3, 4, 5):
        raise PreconditionError(f"scenario must be 1..5, got {scenario}")
    rng = random.Random(seed)
    m = len(kb.clauses)
    n_remove = (10 * scenario * m) // 100
    removed = set(rng.sample(range(m), n_remove))
    remaining = [kb.clauses[i] for i in range(m) if i not in removed]
    n_prune = (10 * scenario * len(remaining)) // 100
    pruned = set(rng.sample(range(len(remaining)), n_prune))
    out: list[Clause] = []
    for i, clause in enumerate(remaining):
        if i in pruned:
            drop = (20 * len(clause)) // 100
            if drop:
                gone = set(rng.sample(range(len(clause)), drop))
                lits = [l for j, l in enumerate(clause.literals) if j not in gone]
                if not lits:
                    continue
                clause = Clause(lits)
        out.append(clause)
    return KnowledgeBase(out, kb.num_vars)


def backbone_query(kb: KnowledgeBase, max_literals: int, seed: int = 0) -> Query:
    """A conjunction of up to max_literals randomly chosen backbone literals."""
    if max_literals < 1:
        raise PreconditionError(f"max_literals must be >= 1, got {max_literals}")
    literals = sat.backbone(kb)
    if not literals:
        raise PreconditionError("knowledge base has an empty backbone")
    rng = random.Random(seed)
    n = min(max_literals, len(literals))
    chosen = sorted(rng.sample(list(literals), n), key=lambda l: (abs(l), l))
    return Query(tuple(Clause((l,)) for l in chosen))


# ---------------------------------------------------------------------------
# delivery-robot fixture

_ROOMS = ("room1", "room2")
_CORRIDORS = ("A", "B")
_PAIRS = (("room1", "room2"), ("room2", "room1"))

DEFAULT_ROBOT_WEIGHTS = (3.0, 0.5, 0.5, 3.0, 3.0, 0.5)


def office_robot_variables(horizon: int) -> dict[str, int]:
    """Stable name → DIMACS id map for the delivery-robot encoding."""
    if horizon < 1:
        raise PreconditionError(f"horizon must be >= 1, got {horizon}")
    names: dict[str, int] = {}

    def add(name: str) -> None:
        names[name] = len(names) + 1

    for c in _CORRIDORS:
        add(f"crowded({c})")
    for t in range(horizon):
        add(f"deliver_{t}")
    for src, dst in _PAIRS:
        for c in _CORRIDORS:
            for t in range(horizon):
                add(f"move({src},{dst},{c})_{t}")
    for t in range(horizon + 1):
        add(f"package-delivered_{t}")
    for room in _ROOMS:
        for t in range(horizon + 1):
            add(f"robot-at({room})_{t}")
    return names


def build_office_robot(
    horizon: int = 2, weights: tuple[float, ...] | None = None
) -> BeliefBase:
    """A two-room, two-corridor delivery task as a weighted belief base.

    The robot starts in room1 and must have delivered the package by the
    final step (both hard).  Moving through a corridor succeeds or leaves the
    robot in place depending on whether the corridor is crowded; crowdedness
    and the movement outcomes are soft with weights (w1..w6):
    w1/w2 crowded(A)/crowded(B); w3 success and w4 staying when crowded;
    w5 success and w6 staying when clear.  Frame axioms make every fluent
    change attributable to an action; same-route corridors and
    move-vs-deliver are mutually exclusive.

    The shortest plan needs two steps (move, then deliver), so the hard core
    is satisfiable only for horizon >= 2; construction itself never fails.
    """
    w = DEFAULT_ROBOT_WEIGHTS if weights is None else tuple(weights)
    if len(w) != 6 or any(not (x > 0 and math.isfinite(x)) for x in w):
        raise PreconditionError("weights must be six positive finite numbers")
    ids = office_robot_variables(horizon)
    crowded = {c: ids[f"crowded({c})"] for c in _CORRIDORS}
    deliver = [ids[f"deliver_{t}"] for t in range(horizon)]
    move = {
        (src, dst, c, t): ids[f"move({src},{dst},{c})_{t}"]
        for src, dst in _PAIRS
        for c in _CORRIDORS
        for t in range(horizon)
    }
    pkg = [ids[f"package-delivered_{t}"] for t in range(horizon + 1)]
    at = {
        (room, t): ids[f"robot-at({room})_{t}"]
        for room in _ROOMS
        for t in range(horizon + 1)
    }

    hard: list[Clause] = []
    # initial state and goal
    hard.append(Clause((at[("room1", 0)],)))
    hard.append(Clause((-at[("room2", 0)],)))
    hard.append(Clause((-pkg[0],)))
    hard.append(Clause((pkg[horizon],)))
    # action preconditions
    for t in range(horizon):
        hard.append(Clause((-deliver[t], at[("room2", t)])))
        for src, dst in _PAIRS:
            for c in _CORRIDORS:
                hard.append(Clause((-move[(src, dst, c, t)], at[(src, t)])))
    # deterministic effect of delivering
    for t in range(horizon):
        hard.append(Clause((-deliver[t], pkg[t + 1])))
    # frame: fluent changes require a responsible action
    for t in range(horizon):
        hard.append(Clause((-pkg[t], pkg[t + 1])))
        hard.append(Clause((pkg[t], -pkg[t + 1], deliver[t])))
        for room in _ROOMS:
            other = "room2" if room == "room1" else "room1"
            arriving = tuple(move[(other, room, c, t)] for c in _CORRIDORS)
            departing = tuple(move[(room, other, c, t)] for c in _CORRIDORS)
            hard.append(Clause((at[(room, t)], -at[(room, t + 1)]) + arriving))
            hard.append(Clause((-at[(room, t)], at[(room, t + 1)]) + departing))
    # exclusions: one corridor per route, and moving excludes delivering
    for t in range(horizon):
        for src, dst in _PAIRS:
            hard.append(
                Clause((-move[(src, dst, "A", t)], -move[(src, dst, "B", t)]))
            )
        for src, dst in _PAIRS:
            for c in _CORRIDORS:
                hard.append(Clause((-move[(src, dst, c, t)], -deliver[t])))

    entries: list[WeightedClause] = [WeightedClause(c, HARD) for c in hard]
    entries.append(WeightedClause(Clause((crowded["A"],)), w[0]))
    entries.append(WeightedClause(Clause((crowded["B"],)), w[1]))
    for src, dst in _PAIRS:
        for c in _CORRIDORS:
            for t in range(horizon):
                m = move[(src, dst, c, t)]
                cr = crowded[c]
                stay = at[(src, t + 1)]
                arrive = at[(dst, t + 1)]
                entries.append(WeightedClause(Clause((-m, -cr, arrive)), w[2]))
                entries.append(WeightedClause(Clause((-m, -cr, stay)), w[3]))
                entries.append(WeightedClause(Clause((-m, cr, arrive)), w[4]))
                entries.append(WeightedClause(Clause((-m, cr, stay)), w[5]))
    return BeliefBase(tuple(entries), len(ids))


# ---------------------------------------------------------------------------
# suite execution


@dataclass(frozen=True)
class BenchConfig:
    suite: str
    algorithm: str
    output: str
    k_hat: int = 4
    gamma: float = 0.5
    timeout: float = 60.0
    seed: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise PreconditionError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if not self.timeout > 0:
            raise PreconditionError(f"timeout must be > 0, got {self.timeout}")
        if self.k_hat < 1:
            raise PreconditionError(f"k_hat must be >= 1, got {self.k_hat}")
        if self.jobs < 1:
            raise PreconditionError(f"jobs must be >= 1, got {self.jobs}")


@dataclass
class BenchRecord:
    instance: str
    status: str  # solved | timeout | error
    runtime: float
    sizes: dict[str, int] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)
    k_achieved: int | None = None
    message: str | None = None

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "status": self.status,
            "runtime": self.runtime,
            "sizes": self.sizes,
            "metrics": self.metrics,
            "k_achieved": self.k_achieved,
            "message": self.message,
        }


def _instance_paths(suite: Path, name: str) -> dict[str, str]:
    paths = {"query": str(suite / f"{name}.query")}
    for ext in ("cnf", "wcnf"):
        p = suite / f"{name}.{ext}"
        if p.exists():
            paths[ext] = str(p)
    human = suite / f"{name}.human.wcnf"
    if human.exists():
        paths["human"] = str(human)
    return paths


def _load_agent_kb(paths: dict[str, str]) -> KnowledgeBase:
    if "cnf" in paths:
        return parse_cnf(Path(paths["cnf"]).read_text())
    if "wcnf" in paths:
        return classical_projection(parse_wcnf(Path(paths["wcnf"]).read_text()))
    raise PreconditionError("instance has no .cnf or .wcnf file")


def _load_base(paths: dict[str, str]) -> BeliefBase:
    if "wcnf" not in paths:
        raise PreconditionError("algorithm requires a weighted .wcnf instance")
    return parse_wcnf(Path(paths["wcnf"]).read_text())


def _load_human(paths: dict[str, str]) -> BeliefBase:
    if "human" not in paths:
        raise PreconditionError("instance has no .human.wcnf file")
    return parse_wcnf(Path(paths["human"]).read_text())


def _solve_instance(
    algorithm: str,
    paths: dict[str, str],
    k_hat: int,
    gamma: float,
    deadline: float,
) -> dict:
    query = parse_query(Path(paths["query"]).read_text())
    if algorithm == "alg1":
        expl = explain.monolithic_explanation(_load_agent_kb(paths), query, deadline)
        return {
            "sizes": {"eps": len(expl.clause_indices)},
            "metrics": {},
            "k_achieved": None,
            "indices": sorted(expl.clause_indices),
        }
    if algorithm == "alg2":
        agent = _load_agent_kb(paths)
        human = classical_projection(_load_human(paths))
        rec = explain.model_reconciling_explanation(agent, human, query, deadline)
        return {
            "sizes": {
                "eps_plus": len(rec.epsilon_plus),
                "eps_minus": len(rec.epsilon_minus),
            },
            "metrics": {},
            "k_achieved": None,
            "eps_plus": sorted(rec.epsilon_plus),
            "eps_minus": sorted(rec.epsilon_minus),
        }
    if algorithm == "alg3":
        expl, bound = explain.prob_monolithic(
            _load_base(paths), query, k_hat, gamma, deadline
        )
        metrics = {}
        for key in ("prob_query_given", "gain", "power"):
            value = getattr(expl, key)
            if value is not None:
                metrics[key] = value
        if bound.lower_bound is not None:
            metrics["lower_bound"] = bound.lower_bound
        return {
            "sizes": {"eps": len(expl.clause_indices)},
            "metrics": metrics,
            "k_achieved": bound.k_achieved,
            "indices": sorted(expl.clause_indices),
        }
    agent = _load_agent_kb(paths)
    human_base = _load_human(paths)
    rec = explain.prob_model_reconciling(
        agent, human_base, query, k_hat, gamma, deadline
    )
    metrics = {}
    if rec.gain is not None:
        metrics["gain"] = rec.gain
    if rec.power is not None:
        metrics["power"] = rec.power
    if rec.k_bound is not None and rec.k_bound.lower_bound is not None:
        metrics["lower_bound"] = rec.k_bound.lower_bound
    return {
        "sizes": {
            "eps_plus": len(rec.epsilon_plus),
            "eps_minus": len(rec.epsilon_minus),
        },
        "metrics": metrics,
        "k_achieved": rec.k_bound.k_achieved if rec.k_bound else None,
        "eps_plus": sorted(rec.epsilon_plus),
        "eps_minus": sorted(rec.epsilon_minus),
    }


def _worker(algorithm, paths, k_hat, gamma, timeout, conn) -> None:
    start = time.monotonic()
    try:
        payload = _solve_instance(algorithm, paths, k_hat, gamma, start + timeout)
        conn.send(("solved", time.monotonic() - start, payload, None))
    except SolveTimeout:
        conn.send(("timeout", time.monotonic() - start, None, None))
    except (ParseError, PreconditionError, LimitError, ValueError, OSError) as exc:
        message = f"{type(exc).__name__}: {exc}"
        conn.send(("error", time.monotonic() - start, None, message))
    except Exception as exc:  # pragma: no cover - defensive
        conn.send(("error", time.monotonic() - start, None, repr(exc)))
    finally:
        conn.close()


def _finish(name: str, proc, conn, started: float, config: BenchConfig) -> BenchRecord:
    if proc.is_alive():
        proc.terminate()
        proc.join()
        conn.close()
        return BenchRecord(name, "timeout", config.timeout)
    proc.join()
    if not conn.poll():
        conn.close()
        elapsed = min(time.monotonic() - started, config.timeout + WATCHDOG_SLACK)
        return BenchRecord(
            name, "error", elapsed, message="worker exited without a result"
        )
    status, runtime, payload, message = conn.recv()
    conn.close()
    if status == "solved" and runtime > config.timeout:
        # finished a hair past the deadline; honor the runtime<=timeout invariant
        return BenchRecord(name, "timeout", config.timeout)
    if status == "timeout":
        runtime = min(runtime, config.timeout)
    record = BenchRecord(name, status, runtime, message=message)
    if payload:
        record.sizes = payload.get("sizes", {})
        record.metrics = payload.get("metrics", {})
        record.k_achieved = payload.get("k_achieved")
    return record


def run_suite(config: BenchConfig) -> list[BenchRecord]:
    """Run one algorithm over every instance of a suite directory.

    Per-instance failures become `error` records and the run continues; an
    unreadable suite directory raises.  Records are ordered by instance id.
    Writes results.jsonl, summary.json, and summary.csv under config.output.
    """
    suite = Path(config.suite)
    if not suite.is_dir():
        raise PreconditionError(f"suite directory not found: {suite}")
    names = sorted(p.stem for p in suite.glob("*.query"))
    pending = [(name, _instance_paths(suite, name)) for name in names]
    records: dict[str, BenchRecord] = {}
    active: list[tuple[str, multiprocessing.Process, object, float]] = []
    idx = 0
    while idx < len(pending) or active:
        while idx < len(pending) and len(active) < config.jobs:
            name, paths = pending[idx]
            idx += 1
            parent_conn, child_conn = multiprocessing.Pipe(duplex=False)
            proc = multiprocessing.Process(
                target=_worker,
                args=(
                    config.algorithm,
                    paths,
                    config.k_hat,
                    config.gamma,
                    config.timeout,
                    child_conn,
                ),
            )
            proc.start()
            child_conn.close()
            active.append((name, proc, parent_conn, time.monotonic()))
        still: list[tuple[str, multiprocessing.Process, object, float]] = []
        for name, proc, conn, started in active:
            expired = time.monotonic() - started > config.timeout + WATCHDOG_SLACK
            if proc.is_alive() and not expired:
                still.append((name, proc, conn, started))
                continue
            records[name] = _finish(name, proc, conn, started, config)
        active = still
        if active:
            time.sleep(0.01)
    ordered = [records[name] for name in sorted(records)]
    _write_outputs(ordered, config)
    return ordered


def _write_outputs(records: list[BenchRecord], config: BenchConfig) -> None:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.jsonl", "w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json()) + "\n")
    solved = [r for r in records if r.status == "solved"]
    timed_out = sum(1 for r in records if r.status == "timeout")
    errors = sum(1 for r in records if r.status == "error")
    mean_runtime = (
        sum(r.runtime for r in solved) / len(solved) if solved else None
    )
    summary = {
        "algorithm": config.algorithm,
        "suite": str(config.suite),
        "instances": len(records),
        "solved": len(solved),
        "timed_out": timed_out,
        "errors": errors,
        "mean_runtime_solved": mean_runtime,
        "k_hat": config.k_hat,
        "gamma": config.gamma,
        "timeout": config.timeout,
        "seed": config.seed,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "instances", "S", "T/O", "errors", "Runtime"])
        writer.writerow(
            [
                config.algorithm,
                len(records),
                len(solved),
                timed_out,
                errors,
                "" if mean_runtime is None else f"{mean_runtime:.3f}",
            ]
        )

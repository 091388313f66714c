"""Command-line interface.

Subcommands: ``prob``, ``explain {mono,mrp,pmono,pmrp}``, ``topk``,
``gen {random,scenario,robot}``, and ``bench``.  Payload goes to stdout
(JSON when ``--json`` is set, a small stable text rendering otherwise);
diagnostics go to stderr.  Exit codes: 0 success, 2 input/parse error,
3 precondition/semantic error, 4 internal limit.

Clauses are rendered as DIMACS literal lists ("1 -2 0"); assignments as
literal lists without the terminator.  ``--oracle`` switches ``prob`` and
``topk`` to an independent brute-force reference (at most 20 variables).
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
from pathlib import Path

from . import bench as bench_harness
from . import explain, probability
from .formulas import (
    BeliefBase,
    Clause,
    KnowledgeBase,
    LimitError,
    ParseError,
    PreconditionError,
    Query,
    classical_projection,
    parse_cnf,
    parse_query,
    parse_wcnf,
    write_cnf,
    write_query,
    write_wcnf,
)

ORACLE_MAX_VARS = 20


# ---------------------------------------------------------------------------
# small helpers


def _round6(x: float | None) -> float | None:
    return None if x is None else round(x, 6)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _load_kb_path(path: str) -> KnowledgeBase:
    if path.endswith(".wcnf"):
        return classical_projection(parse_wcnf(_read(path)))
    return parse_cnf(_read(path))


def _load_base_path(path: str) -> BeliefBase:
    if not path.endswith(".wcnf"):
        raise ParseError(f"expected a .wcnf file, got {path}")
    return parse_wcnf(_read(path))


def _assignment_str(values: tuple[bool, ...]) -> str:
    return " ".join(str(i + 1 if v else -(i + 1)) for i, v in enumerate(values))


def _emit(args, command: str, payload: dict, lines: list[str]) -> int:
    if getattr(args, "json", False):
        print(json.dumps({"command": command, "status": "ok", "payload": payload}))
    else:
        for line in lines:
            print(line)
    return 0


def _group_payload(indices, clauses) -> dict:
    return {
        "indices": [int(i) for i in indices],
        "clauses": [str(c) for c in clauses],
    }


def _group_lines(label: str, indices, clauses) -> list[str]:
    lines = [f"{label} indices: {' '.join(str(i) for i in indices) or '-'}"]
    lines.extend(
        f"{label} clause {i}: {c}" for i, c in zip(indices, clauses)
    )
    return lines


# ---------------------------------------------------------------------------
# brute-force reference (--oracle)


def _oracle_rows(base: BeliefBase) -> list[tuple[tuple[bool, ...], float]]:
    if base.num_vars > ORACLE_MAX_VARS:
        raise LimitError(
            f"--oracle supports at most {ORACLE_MAX_VARS} variables, "
            f"got {base.num_vars}"
        )

    def holds(clause: Clause, bits) -> bool:
        return any(bits[abs(l) - 1] == (l > 0) for l in clause.literals)

    rows = []
    for bits in itertools.product((False, True), repeat=base.num_vars):
        score = 0.0
        ok = True
        for entry in base.entries:
            if holds(entry.clause, bits):
                if not entry.is_hard:
                    score += entry.weight
            elif entry.is_hard:
                ok = False
                break
        if ok:
            rows.append((bits, score))
    if not rows:
        raise PreconditionError("hard entries are unsatisfiable")
    return rows


def _oracle_mass(rows, z: float, clauses) -> float:
    def holds(clause, bits):
        return any(bits[abs(l) - 1] == (l > 0) for l in clause.literals)

    terms = [
        math.exp(s) for bits, s in rows if all(holds(c, bits) for c in clauses)
    ]
    return math.fsum(terms) / z


def _oracle_prob(base: BeliefBase, q: Query, given: Query | None) -> float:
    q.check_against(base.num_vars)
    rows = _oracle_rows(base)
    z = math.fsum(math.exp(s) for _, s in rows)
    if given is None:
        return _oracle_mass(rows, z, q.clauses)
    given.check_against(base.num_vars)
    den = _oracle_mass(rows, z, given.clauses)
    if den <= 0.0:
        raise PreconditionError("conditioning event has zero probability")
    return _oracle_mass(rows, z, tuple(q.clauses) + tuple(given.clauses)) / den


def _oracle_topk(base: BeliefBase, q: Query, k: int):
    q.check_against(base.num_vars)
    rows = _oracle_rows(base)
    z = math.fsum(math.exp(s) for _, s in rows)

    def holds(clause, bits):
        return any(bits[abs(l) - 1] == (l > 0) for l in clause.literals)

    matching = [
        (bits, s) for bits, s in rows if all(holds(c, bits) for c in q.clauses)
    ]
    if not matching:
        raise PreconditionError("constraint is unsatisfiable with the hard entries")
    matching.sort(key=lambda row: (-row[1], row[0]))
    return [(bits, math.exp(s) / z) for bits, s in matching[:k]]


# ---------------------------------------------------------------------------
# subcommands


def cmd_prob(args) -> int:
    start = time.monotonic()
    base = parse_wcnf(_read(args.wcnf))
    q = parse_query(_read(args.query))
    given = parse_query(_read(args.given)) if args.given else None
    if args.oracle:
        p = _oracle_prob(base, q, given)
    elif given is not None:
        p = probability.cond_prob(base, q, given)
    else:
        p = probability.prob(base, q)
    payload = {"prob": _round6(p), "elapsed_s": round(time.monotonic() - start, 6)}
    return _emit(args, "prob", payload, [f"P = {p:.6f}"])


def cmd_explain(args) -> int:
    start = time.monotonic()
    q = parse_query(_read(args.query))
    if args.mode == "mono":
        kb = (
            parse_cnf(_read(args.cnf))
            if args.cnf
            else classical_projection(parse_wcnf(_read(args.wcnf)))
        )
        result = explain.monolithic_explanation(kb, q)
        indices = result.sorted_indices()
        clauses = [kb.clauses[i] for i in indices]
        payload = _group_payload(indices, clauses)
        payload["elapsed_s"] = round(time.monotonic() - start, 6)
        return _emit(args, "explain mono", payload, _group_lines("eps", indices, clauses))
    if args.mode == "mrp":
        agent = _load_kb_path(args.agent)
        human = _load_kb_path(args.human)
        rec = explain.model_reconciling_explanation(agent, human, q)
        plus = sorted(rec.epsilon_plus)
        minus = sorted(rec.epsilon_minus)
        plus_clauses = [agent.clauses[i] for i in plus]
        minus_clauses = [human.clauses[j] for j in minus]
        payload = {
            "eps_plus": _group_payload(plus, plus_clauses),
            "eps_minus": _group_payload(minus, minus_clauses),
            "elapsed_s": round(time.monotonic() - start, 6),
        }
        lines = _group_lines("eps_plus", plus, plus_clauses)
        lines += _group_lines("eps_minus", minus, minus_clauses)
        return _emit(args, "explain mrp", payload, lines)
    if args.mode == "pmono":
        base = parse_wcnf(_read(args.wcnf))
        result, bound = explain.prob_monolithic(base, q, args.k, args.gamma)
        projection = classical_projection(base)
        indices = result.sorted_indices()
        clauses = [projection.clauses[i] for i in indices]
        payload = _group_payload(indices, clauses)
        payload["metrics"] = {
            "prob_query_given": _round6(result.prob_query_given),
            "gain": _round6(result.gain),
            "power": _round6(result.power),
            "gamma": _round6(result.gamma),
        }
        payload["k_bound"] = {
            "k_requested": bound.k_requested,
            "k_achieved": bound.k_achieved,
            "lower_bound": _round6(bound.lower_bound),
        }
        payload["elapsed_s"] = round(time.monotonic() - start, 6)
        lines = _group_lines("eps", indices, clauses)
        for key, value in payload["metrics"].items():
            lines.append(f"{key} = {'NA' if value is None else format(value, '.6f')}")
        lines.append(
            f"k: requested {bound.k_requested} achieved {bound.k_achieved}"
            + (
                ""
                if bound.lower_bound is None
                else f" lower_bound {bound.lower_bound:.6f}"
            )
        )
        return _emit(args, "explain pmono", payload, lines)
    # pmrp
    agent = _load_kb_path(args.agent)
    human_base = _load_base_path(args.human)
    rec = explain.prob_model_reconciling(agent, human_base, q, args.k, args.gamma)
    human_proj = classical_projection(human_base)
    plus = sorted(rec.epsilon_plus)
    minus = sorted(rec.epsilon_minus)
    plus_clauses = [agent.clauses[i] for i in plus]
    minus_clauses = [human_proj.clauses[j] for j in minus]
    payload = {
        "eps_plus": _group_payload(plus, plus_clauses),
        "eps_minus": _group_payload(minus, minus_clauses),
        "metrics": {
            "gain": _round6(rec.gain),
            "power": _round6(rec.power),
            "gamma": _round6(args.gamma),
        },
        "diagnostics": (
            None
            if rec.diagnostics is None
            else {k: _round6(v) for k, v in rec.diagnostics.items()}
        ),
        "k_bound": {
            "k_requested": rec.k_bound.k_requested,
            "k_achieved": rec.k_bound.k_achieved,
            "lower_bound": _round6(rec.k_bound.lower_bound),
        },
        "elapsed_s": round(time.monotonic() - start, 6),
    }
    lines = _group_lines("eps_plus", plus, plus_clauses)
    lines += _group_lines("eps_minus", minus, minus_clauses)
    for key, value in payload["metrics"].items():
        lines.append(f"{key} = {'NA' if value is None else format(value, '.6f')}")
    if rec.diagnostics:
        for key in sorted(rec.diagnostics):
            lines.append(f"{key} = {rec.diagnostics[key]:.6f}")
    lines.append(
        f"k: requested {rec.k_bound.k_requested} achieved {rec.k_bound.k_achieved}"
    )
    return _emit(args, "explain pmrp", payload, lines)


def cmd_topk(args) -> int:
    start = time.monotonic()
    base = parse_wcnf(_read(args.wcnf))
    q = parse_query(_read(args.query))
    if args.k < 1:
        raise PreconditionError(f"k must be >= 1, got {args.k}")
    if args.oracle:
        ranked = _oracle_topk(base, q, args.k)
        rows = [(bits, p) for bits, p in ranked]
    else:
        worlds = probability.top_k_worlds(base, q, args.k)
        rows = [(w.world.values, w.probability) for w in worlds]
    if len(rows) < args.k:
        print(
            f"warning: only {len(rows)} worlds satisfy the constraint "
            f"(requested k={args.k})",
            file=sys.stderr,
        )
    payload = {
        "worlds": [
            {"assignment": _assignment_str(bits), "prob": _round6(p)}
            for bits, p in rows
        ],
        "elapsed_s": round(time.monotonic() - start, 6),
    }
    lines = [
        f"world {i + 1}: {_assignment_str(bits)}  "
        f"p={'NA' if p is None else format(p, '.6f')}"
        for i, (bits, p) in enumerate(rows)
    ]
    return _emit(args, "topk", payload, lines)


def _parse_robot_weights(text: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != 6:
        raise ValueError(f"--weights expects 6 comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def cmd_gen(args) -> int:
    start = time.monotonic()
    files: list[str] = []
    if args.kind == "random":
        kb = bench_harness.gen_random_cnf(args.vars, args.clauses, args.width, args.seed)
        cnf_path = f"{args.out}.cnf"
        Path(cnf_path).write_text(write_cnf(kb))
        files.append(cnf_path)
        if args.weights:
            lo, hi = args.weights
            base = bench_harness.assign_random_weights(kb, lo, hi, args.seed)
            wcnf_path = f"{args.out}.wcnf"
            Path(wcnf_path).write_text(write_wcnf(base))
            files.append(wcnf_path)
        if args.query_literals:
            query = bench_harness.backbone_query(kb, args.query_literals, args.seed)
            query_path = f"{args.out}.query"
            Path(query_path).write_text(write_query(query))
            files.append(query_path)
        params = {
            "vars": args.vars,
            "clauses": args.clauses,
            "width": args.width,
            "seed": args.seed,
        }
        command = "gen random"
    elif args.kind == "scenario":
        kb = parse_cnf(_read(args.cnf))
        human = bench_harness.make_human_scenario(kb, args.level, args.seed)
        Path(args.out).write_text(write_cnf(human))
        files.append(args.out)
        params = {"cnf": args.cnf, "level": args.level, "seed": args.seed}
        command = "gen scenario"
    else:
        weights = (
            _parse_robot_weights(args.weights) if args.weights else None
        )
        base = bench_harness.build_office_robot(args.horizon, weights)
        Path(args.out).write_text(write_wcnf(base))
        files.append(args.out)
        params = {"horizon": args.horizon}
        command = "gen robot"
    payload = {
        "files": files,
        "params": params,
        "elapsed_s": round(time.monotonic() - start, 6),
    }
    lines = [f"wrote {f}" for f in files]
    lines.append("params: " + " ".join(f"{k}={v}" for k, v in params.items()))
    return _emit(args, command, payload, lines)


def cmd_bench(args) -> int:
    start = time.monotonic()
    config = bench_harness.BenchConfig(
        suite=args.suite,
        algorithm=args.alg,
        output=args.out,
        k_hat=args.k,
        gamma=args.gamma,
        timeout=args.timeout,
        seed=args.seed,
        jobs=args.jobs,
    )
    records = bench_harness.run_suite(config)
    solved = [r for r in records if r.status == "solved"]
    timed_out = sum(1 for r in records if r.status == "timeout")
    errors = sum(1 for r in records if r.status == "error")
    mean_runtime = (
        sum(r.runtime for r in solved) / len(solved) if solved else None
    )
    summary = {
        "algorithm": config.algorithm,
        "instances": len(records),
        "solved": len(solved),
        "timed_out": timed_out,
        "errors": errors,
        "mean_runtime_solved": _round6(mean_runtime),
    }
    payload = {
        "summary": summary,
        "records": [r.to_json() for r in records],
        "elapsed_s": round(time.monotonic() - start, 6),
    }
    line = (
        f"instances={len(records)} solved={len(solved)} timed_out={timed_out} "
        f"errors={errors} mean_runtime_solved="
        + ("NA" if mean_runtime is None else f"{mean_runtime:.3f}")
    )
    return _emit(args, "bench", payload, [line])


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefx",
        description="Explanations over knowledge bases and weighted belief bases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prob", help="degree of belief in a query")
    p.add_argument("--wcnf", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--given")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("explain", help="compute an explanation")
    modes = p.add_subparsers(dest="mode", required=True)
    m = modes.add_parser("mono", help="smallest entailing clause subset")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--cnf")
    src.add_argument("--wcnf")
    m.add_argument("--query", required=True)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_explain)
    m = modes.add_parser("mrp", help="model-reconciling explanation")
    m.add_argument("--agent", required=True)
    m.add_argument("--human", required=True)
    m.add_argument("--query", required=True)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_explain)
    m = modes.add_parser("pmono", help="k-bounded probabilistic explanation")
    m.add_argument("--wcnf", required=True)
    m.add_argument("--query", required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--gamma", type=float, default=explain.DEFAULT_GAMMA)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_explain)
    m = modes.add_parser("pmrp", help="probabilistic model reconciliation")
    m.add_argument("--agent", required=True)
    m.add_argument("--human", required=True)
    m.add_argument("--query", required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--gamma", type=float, default=explain.DEFAULT_GAMMA)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_explain)

    p = sub.add_parser("topk", help="most probable worlds under a constraint")
    p.add_argument("--wcnf", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("gen", help="generate instances")
    kinds = p.add_subparsers(dest="kind", required=True)
    g = kinds.add_parser("random", help="random CNF/WCNF instance")
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--clauses", type=int, required=True)
    g.add_argument("--width", type=int, default=3)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True, help="output path prefix")
    g.add_argument("--weights", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--query-literals", type=int, dest="query_literals")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gen)
    g = kinds.add_parser("scenario", help="degraded human knowledge base")
    g.add_argument("--cnf", required=True)
    g.add_argument("--level", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gen)
    g = kinds.add_parser("robot", help="delivery-robot fixture")
    g.add_argument("--horizon", type=int, default=2)
    g.add_argument("--weights", help="six comma-separated weights")
    g.add_argument("--out", required=True)
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--alg", required=True, choices=bench_harness.ALGORITHMS)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--gamma", type=float, default=explain.DEFAULT_GAMMA)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``maximin <command> ...``.

Exit codes: 0 success, 1 usage or input errors (a JSON error object is
written to stderr), 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import oracle, protocol, solvers
from .flowcore import trim_to_forest
from .instance import (
    InstanceError,
    SolutionFormatError,
    complete_bipartite_k33,
    complete_graph_k4,
    gen_cubic_gap,
    gen_phragmen_worstcase,
    gen_random,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
)
from .numeric import format_number, to_exact
from .verify import verify_full

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

GRAPHS = {"k4": complete_graph_k4, "k33": complete_bipartite_k33}
ALGORITHMS = ("balanced-phragmms", "seq-phragmen", "mms", "lazy-mms")


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", f"{self.prog}: {message}")


# ---------------------------------------------------------------- io helpers


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str | None, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError("io", f"cannot write {path}: {exc.strerror}") from exc


def _number(text: str):
    if text in ("inf", "infinity"):
        return math.inf
    try:
        return to_exact(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError("usage", f"not a number: {text!r}") from exc


def _instance(args):
    return parse_instance(_read(args.instance), exact=args.exact)


def _solution(instance, path):
    return parse_solution(instance, _read(path))


def _json(obj) -> str:
    return json.dumps(obj, indent=1)


# ---------------------------------------------------------------- commands


def cmd_generate(args):
    if args.family == "phragmen-worstcase":
        inst = gen_phragmen_worstcase(args.k, args.eps, exact=args.exact)
    elif args.family == "cubic-gap":
        if args.graph_file:
            graph = {int(v): [int(u) for u in nbrs] for v, nbrs in json.loads(_read(args.graph_file)).items()}
        else:
            graph = GRAPHS[args.graph]()
        inst = gen_cubic_gap(graph, args.k, exact=args.exact)
    else:
        inst = gen_random(args.voters, args.candidates, args.k, args.approval_prob, args.stakes,
                          seed=args.seed, exact=args.exact)
    _write(args.output, serialize_instance(inst))
    return EXIT_OK


def _solve(instance, algorithm, threshold=None, eps=None):
    if algorithm == "balanced-phragmms":
        return solvers.solve_balanced_phragmms(instance)
    if algorithm == "seq-phragmen":
        return solvers.solve_seq_phragmen(instance)
    if algorithm == "mms":
        return solvers.solve_mms(instance)
    if threshold is not None:
        result = solvers.solve_lazy_mms(instance, threshold)
        if result is None:
            raise CliError("no_solution", f"lazy MMS found no committee at threshold {threshold}")
        return result
    return solvers.solve_lazy_mms_search(instance, eps if eps is not None else to_exact("0.1"))


def cmd_solve(args):
    inst = _instance(args)
    threshold = _number(args.threshold) if args.threshold is not None else None
    eps = _number(args.eps) if args.eps is not None else None
    solution = _solve(inst, args.algorithm, threshold, eps)
    _write(args.output, serialize_solution(inst, solution))
    return EXIT_OK


def cmd_postprocess(args):
    inst = _instance(args)
    solution = _solution(inst, args.solution)
    result = solvers.ls_pjr(inst, solution, _number(args.eps))
    _write(args.output, serialize_solution(inst, result))
    return EXIT_OK


def cmd_verify(args):
    inst = _instance(args)
    solution = _solution(inst, args.solution)
    pjr_t = None
    if args.pjr_t is not None:
        pjr_t = inst.t_hat if args.pjr_t == "hat" else _number(args.pjr_t)
    report = verify_full(inst, solution, pjr_t=pjr_t)
    _write(None, _json(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_trim(args):
    inst = _instance(args)
    solution = trim_to_forest(inst, _solution(inst, args.solution))
    _write(args.output, serialize_solution(inst, solution))
    return EXIT_OK


def cmd_oracle(args):
    # ground truth is always computed in exact arithmetic
    inst = _instance(args).to_exact()
    if args.query == "opt":
        value, committee = oracle.opt_maximin(inst)
        out = {"value": format_number(value), "committee": [inst.candidate_names[c] for c in committee]}
    elif args.query == "pjr":
        if not args.solution:
            raise CliError("usage", "oracle pjr needs --solution")
        solution = _solution(inst, args.solution)
        t = inst.t_hat if args.t in (None, "hat") else _number(args.t)
        check = oracle.check_pjr_exact(inst, solution.committee, t)
        out = {"t": format_number(to_exact(t)), "pjr": check.ok}
        if not check.ok:
            out["witness"] = {"voters": [inst.voter_names[n] for n in check.voters], "r": check.r}
    else:
        if not args.solution or not args.candidate:
            raise CliError("usage", "oracle score needs --solution and --candidate")
        solution = _solution(inst, args.solution)
        try:
            c = inst.candidate_id(args.candidate)
        except (KeyError, ValueError) as exc:
            raise CliError("input", f"unknown candidate {args.candidate!r}") from exc
        out = {"candidate": args.candidate, "score": oracle.score_by_rootfind(inst, solution, c)}
    _write(args.output, _json(out))
    return EXIT_OK


def cmd_simulate(args):
    inst = _instance(args)
    try:
        provers = protocol.load_provers(json.loads(_read(args.provers)))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CliError("input", f"bad prover spec: {exc}") from exc
    winner, log = protocol.run_window(inst, provers, args.mode, args.window, args.extension)
    _write(args.output, protocol.log_to_jsonl(log).rstrip("\n"))
    if args.winner_out and winner is not None:
        _write(args.winner_out, serialize_solution(inst, winner))
    return EXIT_OK


BENCH_ALGOS = {
    "balanced-phragmms": solvers.solve_balanced_phragmms,
    "seq-phragmen": solvers.solve_seq_phragmen,
    "mms": solvers.solve_mms,
}


def _bench_instance(family, size, trial, seed):
    if family == "phragmen-worstcase":
        return gen_phragmen_worstcase(size, to_exact("0.1"), exact=True)
    if family == "cubic-gap":
        return gen_cubic_gap(complete_graph_k4(), min(size, 3))
    k = max(1, size // 2)
    return gen_random(size, size, k, 0.4, "integer(1,10)", seed=seed * 100003 + size * 1009 + trial,
                      exact=True)


def _bench_row(task):
    family, size, trial, seed, with_opt, timing = task
    inst = _bench_instance(family, size, trial, seed)
    opt = None
    if with_opt:
        try:
            opt, _ = oracle.opt_maximin(inst)
        except oracle.OracleTooLarge:
            opt = None
    rows = []
    for name, solve in BENCH_ALGOS.items():
        start = time.perf_counter()
        solution = solve(inst)
        elapsed = time.perf_counter() - start
        value = solution.objective
        ratio = "" if opt is None or value == 0 else f"{float(opt / value):.6f}"
        rows.append([family, size, trial, name, f"{float(value):.9g}",
                     "" if opt is None else f"{float(opt):.9g}", ratio,
                     f"{elapsed:.6f}" if timing else ""])
    return rows


def cmd_bench(args):
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError as exc:
        raise CliError("usage", f"bad --sizes: {args.sizes!r}") from exc
    tasks = [(args.family, size, trial, args.seed, not args.no_oracle, not args.no_timing)
             for size in sizes for trial in range(args.trials)]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_bench_row, tasks))
    else:
        results = [_bench_row(t) for t in tasks]
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["family", "size", "trial", "algorithm", "objective", "opt", "ratio", "seconds"])
        for rows in results:
            writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maximin", description="Maximin support committee elections.")
    parser.add_argument("--exact", action="store_true", help="use exact rational arithmetic")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def exact_flag(p):
        # also accepted after the subcommand
        p.add_argument("--exact", action="store_true", default=argparse.SUPPRESS,
                       help="use exact rational arithmetic")

    def io(p, solution=False, output=True):
        exact_flag(p)
        p.add_argument("-i", "--instance", required=True)
        if solution:
            p.add_argument("-s", "--solution", required=True)
        if output:
            p.add_argument("-o", "--output")

    gen = sub.add_parser("generate", help="write an instance")
    gsub = gen.add_subparsers(dest="family", required=True, parser_class=_Parser)
    g = gsub.add_parser("phragmen-worstcase")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--eps", type=_number, default=to_exact("0.1"))
    g = gsub.add_parser("cubic-gap")
    g.add_argument("--graph", choices=sorted(GRAPHS), default="k4")
    g.add_argument("--graph-file", help="JSON adjacency lists {vertex: [neighbours]}")
    g.add_argument("--k", type=int, required=True)
    g = gsub.add_parser("random")
    g.add_argument("--voters", type=int, required=True)
    g.add_argument("--candidates", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--approval-prob", type=float, default=0.5)
    g.add_argument("--stakes", default="unit", help="unit | integer(lo,hi) | uniform(lo,hi) | pareto(a)")
    g.add_argument("--seed", type=int, default=0)
    for g in gsub.choices.values():
        g.add_argument("-o", "--output")
        exact_flag(g)
        g.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run an election rule")
    p.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    p.add_argument("--threshold", help="lazy-mms: fixed threshold")
    p.add_argument("--eps", help="lazy-mms: search precision when no threshold is given")
    io(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("postprocess", help="improve a solution")
    p.add_argument("method", choices=["ls-pjr"])
    p.add_argument("--eps", required=True, help="number or inf")
    io(p, solution=True)
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("verify", help="check a submitted solution")
    p.add_argument("--pjr-t", help="also test the PJR condition at this t ('hat' for stake/k)")
    io(p, solution=True, output=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trim", help="reduce a solution to a forest")
    io(p, solution=True)
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("oracle", help="brute-force ground truth")
    p.add_argument("query", choices=["opt", "pjr", "score"])
    p.add_argument("-s", "--solution")
    p.add_argument("--t", help="pjr: threshold (default stake/k)")
    p.add_argument("--candidate", help="score: candidate name")
    p.add_argument("--threads", type=int, default=1, help="accepted for symmetry; enumeration is serial")
    io(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("simulate", help="run an election window")
    p.add_argument("--provers", required=True, help='JSON list of {"strategy", "submit_block"}')
    p.add_argument("--mode", choices=["full", "full_check", "optimized"], default="full")
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--extension", type=int, help="extension length in blocks (default k)")
    p.add_argument("--winner-out")
    io(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="CSV of objectives, ratios to OPT and timings")
    p.add_argument("--family", choices=["random", "phragmen-worstcase", "cubic-gap"], default="random")
    p.add_argument("--sizes", default="4,6,8")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-oracle", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="omit timings for byte-stable output")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        error = {"error": exc.kind, "message": str(exc)}
    except InstanceError as exc:
        error = {"error": "instance", "message": str(exc)}
        if exc.entity is not None:
            error["entity"] = exc.entity
    except SolutionFormatError as exc:
        error = {"error": "solution", "message": str(exc)}
    except (ValueError, oracle.OracleTooLarge) as exc:
        error = {"error": "input", "message": str(exc)}
    sys.stderr.write(json.dumps(error) + "\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

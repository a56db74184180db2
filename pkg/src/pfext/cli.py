"""Command line front end.

    pfext analyze FILE        singular points, exponents, Fuchs verdict
    pfext monodromy FILE      loop plan, monodromy matrices and checks
    pfext extension FILE      both cocycle routes and class verdicts
    pfext compare A B         class equality of two extension reports
    pfext corpus run          every bundled problem plus the acceptance criteria

Reports are JSON (written to ``--out`` or stdout); a short summary goes to
stderr. Exit codes: 0 success, 2 parse error, 3 non-Fuchsian input,
4 numerical failure, 5 inconclusive class verdict. ``corpus run`` exits 1
when an expectation or acceptance criterion fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ParseError
from .pipeline import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_PARSE,
    check_expectations,
    cmd_compare,
    compare_exit_code,
    default_stage,
    load_corpus,
    load_problem,
    run,
    summary_lines,
)
from .report import dumps


def _add_numeric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--precision-target", type=float, help="relative tail bound of each Taylor step (default 1e-16)")
    p.add_argument("--theta", type=float, help="step length as a fraction of the distance to the nearest pole (default 0.4)")
    p.add_argument("--taylor-order", type=int, help="maximal Taylor order per step (default 64)")
    p.add_argument("--clearance", type=float, help="minimal distance of paths from singular points")
    p.add_argument("--tol-class", type=float, help="relative residual threshold for coboundary verdicts (default 1e-6)")
    p.add_argument("--seed", type=int, help="seed of the randomized irreducibility witness (default 0)")
    p.add_argument("--timings", action="store_true", help="include wall clock timings (reports are then not reproducible)")


def _flags(args: argparse.Namespace) -> dict:
    return {
        "precision_target": args.precision_target,
        "theta": args.theta,
        "taylor_order": args.taylor_order,
        "clearance": args.clearance,
        "tol_class": args.tol_class,
        "seed": args.seed,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfext", description="Monodromy and extension classes of inhomogeneous Fuchsian equations.")
    parser.add_argument("--version", action="version", version=f"pfext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "singular points, exponents and the Fuchs verdict"),
        ("monodromy", "monodromy representation with consistency checks"),
        ("extension", "extension cocycle by both routes and its class"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="problem file (JSON) or an earlier report")
        p.add_argument("--out", help="write the report here instead of stdout")
        _add_numeric_flags(p)
    p = sub.add_parser("compare", help="compare the extension classes of two reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out", help="write the verdict here instead of stdout")
    p.add_argument("--tol-class", type=float, help="relative residual threshold (default 1e-6)")
    corpus = sub.add_parser("corpus", help="bundled reference problems")
    csub = corpus.add_subparsers(dest="corpus_command", required=True)
    p = csub.add_parser("run", help="run every corpus problem and the acceptance criteria")
    p.add_argument("--dir", help="corpus directory (default: the bundled corpus)")
    p.add_argument("--out", help="directory for the per-problem reports")
    p.add_argument("--no-acceptance", action="store_true", help="skip the acceptance criteria")
    _add_numeric_flags(p)
    p = csub.add_parser("list", help="list the corpus problems")
    p.add_argument("--dir", help="corpus directory (default: the bundled corpus)")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _cmd_stage(args: argparse.Namespace) -> int:
    stage = "analyze" if args.command == "analyze" else args.command
    try:
        problem = load_problem(args.file)
    except ParseError as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE
    result = run(problem, stage, _flags(args), timings=args.timings)
    _emit(dumps(result.report), args.out)
    for line in summary_lines(result):
        _err(line)
    return result.exit_code


def _load_report(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read report {path}: {exc}") from None


def _cmd_compare(args: argparse.Namespace) -> int:
    try:
        a, b = _load_report(args.report_a), _load_report(args.report_b)
    except ParseError as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE
    kwargs = {} if args.tol_class is None else {"tol": args.tol_class}
    try:
        result = cmd_compare(a, b, **kwargs)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        _err(f"error: malformed report ({type(exc).__name__}: {exc})")
        return EXIT_PARSE
    _emit(dumps(result), args.out)
    reason = f" ({result['reason']})" if "reason" in result else ""
    _err(f"verdict: {result['verdict']}{reason}")
    return compare_exit_code(result)


def _cmd_corpus(args: argparse.Namespace) -> int:
    try:
        entries = load_corpus(args.dir)
    except ParseError as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE
    if args.corpus_command == "list":
        for path, prob in entries:
            print(f"{prob.name}: {prob.operator}" + (f" = {prob.inhomogeneity}" if prob.inhomogeneity else "") + f"  [{path.name}]")
        return EXIT_OK
    start = time.perf_counter()
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    failed = False
    for path, prob in entries:
        result = run(prob, default_stage(prob), _flags(args), timings=args.timings)
        if out_dir:
            (out_dir / f"{prob.name}.json").write_text(dumps(result.report))
        issues = check_expectations(result, prob.expect)
        failed |= bool(issues)
        status = "ok" if not issues else "MISMATCH: " + "; ".join(issues)
        lines = summary_lines(result)
        print(f"{lines[0]} [{status}]")
        for line in lines[1:]:
            print(line)
    if not args.no_acceptance:
        from .acceptance import run_all

        print("acceptance criteria:")
        for res in run_all(args.dir, seed=args.seed or 0):
            failed |= not res.passed
            print(res.line())
    print(f"corpus run finished in {time.perf_counter() - start:.1f} s: {'FAILED' if failed else 'all passed'}")
    return EXIT_FAILED if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "corpus":
        return _cmd_corpus(args)
    return _cmd_stage(args)


if __name__ == "__main__":
    sys.exit(main())

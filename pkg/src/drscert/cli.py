"""Command-line front end.

    drscert classify problem.json [--format text]
    drscert certify problem.json
    drscert repair problem.json [-o repaired.json]
    drscert generate --kind wisdp --n 10 --m 10 --count 20 [--messy] --seed 7 --out DIR
    drscert bench --kind wisdp --n 10 --m 10 --count 20 --mode strong-infeasibility

Exit status: 0 for a Definite or CandidateSet diagnosis, 2 for
Indeterminate, 3 when ``certify`` finds a certificate that fails
verification, 1 for unreadable input or bad arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .affine import build_projector
from .certificates import Solution, VerificationReport, verify_certificate
from .classifier import Certainty, FeasibilityStatus, certificate_tol, classify, params_for
from .problems import GALLERY_IDS, ProblemFormatError, canonical_example, read_problem, write_problem
from .report import text_summary, write_report

EXIT_OK, EXIT_INPUT, EXIT_INDETERMINATE, EXIT_UNVERIFIED = 0, 1, 2, 3


class CliError(Exception):
    pass


def _param_args(p):
    g = p.add_argument_group("iteration parameters (defaults scale with the problem)")
    g.add_argument("--gamma", type=float)
    g.add_argument("--max-iters", type=int)
    g.add_argument("--eps", type=float, dest="eps_residual", help="residual threshold for the diverging verdicts")
    g.add_argument("--big-M", type=float, dest="big_M", help="norm of z at which a run is declared diverging")
    g.add_argument("--conv-tol", type=float)
    g.add_argument("--window", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drscert", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    for name, help_ in (
        ("classify", "classify a problem document and print the report"),
        ("certify", "classify and re-verify every attached certificate"),
        ("repair", "write the repaired problem document"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="problem document (JSON), or gallery:<id>")
        p.add_argument("-o", "--output", help="write here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        _param_args(p)

    p = sub.add_parser("generate", help="write instance documents")
    p.add_argument("--kind", choices=("wisdp", "gallery"), default="wisdp")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--messy", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("bench", help="detection rates on generated weakly infeasible SDPs")
    p.add_argument("--kind", choices=("wisdp",), default="wisdp")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("strong-infeasibility", "infeasibility"), default="strong-infeasibility")
    p.add_argument("--sets", default="clean,messy", help="comma list from {clean, messy}")
    p.add_argument("--max-iters", type=int, help="N (default 50000, or the largest checkpoint)")
    p.add_argument("--checkpoints", help="comma list of N for --mode infeasibility")
    p.add_argument("--tol", type=float, help="step tolerance (strong) or 1/||z|| threshold (infeasibility)")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--threads", type=int, help=f"worker threads (default ${bench.THREADS_ENV} or CPU count)")
    p.add_argument("--format", choices=("json", "text"), default="text")
    return ap


def load_problem(src: str):
    if src.startswith("gallery:"):
        try:
            return canonical_example(src.split(":", 1)[1])
        except KeyError as err:
            raise CliError(str(err.args[0])) from None
    try:
        data = Path(src).read_bytes()
    except OSError as err:
        raise CliError(f"cannot read {src}: {err.strerror}") from None
    try:
        return read_problem(data)
    except ProblemFormatError as err:
        raise CliError(f"{src}: {err}") from None


def _params(problem, args):
    overrides = {k: getattr(args, k) for k in ("gamma", "max_iters", "eps_residual", "big_M", "conv_tol", "window")}
    try:
        return params_for(problem, build_projector(problem.A, problem.b), **overrides)
    except ValueError as err:
        raise CliError(str(err)) from None


def _emit(args, payload: bytes | str):
    if isinstance(payload, str):
        payload = (payload + "\n").encode("utf-8")
    if args.output:
        try:
            Path(args.output).write_bytes(payload)
        except OSError as err:
            raise CliError(f"cannot write {args.output}: {err.strerror}") from None
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()


def _exit_for(diag) -> int:
    return EXIT_INDETERMINATE if diag.certainty is Certainty.INDETERMINATE else EXIT_OK


def cmd_classify(args, certify=False) -> int:
    problem = load_problem(args.input)
    diag = classify(problem, _params(problem, args))
    status = _exit_for(diag)
    if certify:
        # re-check every certificate from scratch, independent of the classifier's own checks
        tol = certificate_tol(diag.params_used)
        reports = {}
        if diag.hyperplane is not None:
            reports["hyperplane"] = verify_certificate(problem, diag.hyperplane, tol=tol)
        if diag.direction is not None:
            reports["direction"] = verify_certificate(problem, diag.direction, tol=tol)
        if diag.farkas is not None:
            reports["farkas"] = verify_certificate(problem, diag.farkas, tol=1e-8)
        if diag.solution is not None:
            # a limit point of a diverging run is only as accurate as the run
            sol_tol = tol if diag.cases == ("a",) else diag.params_used.eps_residual
            reports["solution"] = verify_certificate(problem, Solution(diag.solution), tol=sol_tol)
        for rep in diag.repairs:
            # the repaired data has its own scale
            inner = classify(rep.problem, params_for(rep.problem, gamma=diag.params_used.gamma))
            reports[f"repair:{rep.kind.value}"] = _repair_report(rep, inner)
        diag.verification.update({f"recheck:{k}": v for k, v in reports.items()})
        if not all(r.passed for r in diag.verification.values()):
            status = EXIT_UNVERIFIED
    if args.format == "text":
        _emit(args, text_summary(diag, problem.name))
    else:
        _emit(args, write_report(diag))
    return status


def _repair_report(rep, inner):
    out = VerificationReport(f"repair {rep.kind.value}")
    if rep.kind.value == "FeasibilityShift":
        ok = inner.feasibility is FeasibilityStatus.FEASIBLE
        out.add("repaired problem feasible", float(ok), ok)
    else:
        ok = inner.direction is None and inner.feasibility is FeasibilityStatus.FEASIBLE
        out.add("repaired problem has no improving direction", float(ok), ok)
    return out


def cmd_repair(args) -> int:
    problem = load_problem(args.input)
    diag = classify(problem, _params(problem, args))
    if not diag.repairs:
        print(f"no repair for cases {{{diag.label}}} ({diag.certainty.value})", file=sys.stderr)
        _emit(args, write_problem(problem))
        return _exit_for(diag)
    repaired = diag.repairs[0].problem
    if args.format == "text":
        rep = diag.repairs[0]
        _emit(args, f"{rep.kind.value} for cases {{{diag.label}}}: shift={list(map(float, rep.shift))}")
    else:
        _emit(args, write_problem(repaired))
    return _exit_for(diag)


def cmd_generate(args) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise CliError(f"cannot create {out}: {err.strerror}") from None
    if args.kind == "gallery":
        problems = [canonical_example(g) for g in GALLERY_IDS]
    else:
        if args.count < 1:
            raise CliError("--count must be positive")
        try:
            problems = bench.wisdp_suite(args.n, args.m, args.count, args.seed, args.messy)
        except ValueError as err:
            raise CliError(str(err)) from None
    for prob in problems:
        path = out / f"{prob.name}.json"
        try:
            path.write_bytes(write_problem(prob))
        except OSError as err:
            raise CliError(f"cannot write {path}: {err.strerror}") from None
        print(path)
    return EXIT_OK


def cmd_bench(args) -> int:
    sets = [s.strip() for s in args.sets.split(",") if s.strip()]
    bad = [s for s in sets if s not in ("clean", "messy")]
    if bad or not sets:
        raise CliError(f"--sets: unknown set(s) {bad}; use clean and/or messy")
    if args.count < 1:
        raise CliError("--count must be positive")
    try:
        threads = args.threads if args.threads is not None else bench.default_threads()
    except ValueError as err:
        raise CliError(str(err)) from None

    if args.mode == "strong-infeasibility":
        N = args.max_iters or 50_000
        fn, kw = bench.strong_infeasibility_run, {"N": N, "tol": args.tol or bench.STRONG_TOL}
        verdict = "not strongly infeasible"
    else:
        if args.checkpoints:
            try:
                cps = tuple(int(float(t)) for t in args.checkpoints.split(","))
            except ValueError:
                raise CliError(f"--checkpoints: cannot parse {args.checkpoints!r}") from None
        else:
            cps = (args.max_iters or 1_000_000,)
        fn, kw = bench.infeasibility_run, {"checkpoints": cps, "threshold": args.tol or bench.INFEAS_THRESHOLD}
        verdict = "infeasible"
    kw["gamma"] = args.gamma

    results = {}
    for label in sets:
        try:
            problems = bench.wisdp_suite(args.n, args.m, args.count, args.seed, label == "messy")
        except ValueError as err:
            raise CliError(str(err)) from None
        results[label] = bench.run_suite(fn, problems, threads, **kw)
    rows = bench.detection_table(results)

    if args.format == "json":
        doc = {
            "mode": args.mode,
            "kind": args.kind,
            "n": args.n,
            "m": args.m,
            "count": args.count,
            "seed": args.seed,
            "rows": rows,
            "instances": {label: [r.__dict__ for r in res] for label, res in results.items()},
        }
        print(json.dumps(doc, indent=1))
    else:
        print(f"{args.mode}: {args.kind} n={args.n} m={args.m}, {args.count} instances per set")
        print(f"{'set':<8}{'N':>10}  {verdict:>24}  {'rate':>7}")
        for r in rows:
            print(f"{r['set']:<8}{r['N']:>10d}  {r['detected']:>20d}/{r['count']:<3d}  {100 * r['rate']:6.1f}%")
    return EXIT_OK


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    handlers = {
        "classify": cmd_classify,
        "certify": lambda a: cmd_classify(a, certify=True),
        "repair": cmd_repair,
        "generate": cmd_generate,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except CliError as err:
        print(f"drscert: error: {err}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

"""Command-line entry point: solve, simulate, oracle, verify, emit."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from .cnf import CNFFormula
from .dsl import ParseError, parse_dimacs, parse_psystem, serialize_psystem
from .engine import EngineError, StepPolicy, audit_recognizer_trace, run_to_halt
from .family import FamilyOptions, build_family_system, build_injected_configuration, encode_instance, family_info
from .model import InputError
from .multiset import parse_multiset
from .oracle import MAX_VARS, NOT_AN_INSTANCE, YES, middle_assignment, satisfying_assignments

EXIT_YES, EXIT_NO, EXIT_NOT_INSTANCE, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunOutcome:
    exit_code: int
    report: dict = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)

    @property
    def answer(self):
        return self.report.get("answer")

    @property
    def steps(self):
        return self.report.get("steps")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load_cnf(path: str) -> CNFFormula:
    try:
        return parse_dimacs(_read(path))
    except (ParseError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _policy(args) -> StepPolicy:
    return StepPolicy(args.policy, seed=args.seed)


def _answer_code(answer) -> int:
    if answer == YES:
        return EXIT_YES
    if answer == "no":
        return EXIT_NO
    if answer == NOT_AN_INSTANCE:
        return EXIT_NOT_INSTANCE
    return EXIT_RUNTIME


def _is_instance(phi: CNFFormula) -> bool | None:
    """Whether phi has a model, when brute force is affordable."""
    if phi.n > MAX_VARS:
        return None
    return middle_assignment(phi) is not None


def _start_for(system, phi: CNFFormula):
    """(input multiset, start configuration) for running ``system`` on ``phi``."""
    info = family_info(system)
    if info is not None and info.get("mode") == "inject":
        return None, build_injected_configuration(phi, system)
    return encode_instance(phi)[1], None


def _simulate(system, phi_or_input, args, label: str) -> RunOutcome:
    phi = phi_or_input if isinstance(phi_or_input, CNFFormula) else None
    if phi is not None:
        input_ms, start = _start_for(system, phi)
    else:
        input_ms, start = phi_or_input, None
    t0 = time.perf_counter()
    verdict, trace = run_to_halt(system, input_ms, _policy(args), args.max_steps, start=start, require_answer=False)
    wall = time.perf_counter() - t0
    violations = audit_recognizer_trace(trace, system.yes, system.no)
    if args.trace:
        trace.write_jsonl(args.trace)
    report = {
        "command": label,
        "system": system.name,
        "policy": _policy(args).label,
        "answer": verdict.answer,
        "steps": verdict.steps,
        "wall_seconds": round(wall, 4),
        "violations": violations,
        "trace": args.trace,
    }
    code = _answer_code(verdict.answer)
    if phi is not None and _is_instance(phi) is False:
        report["instance"] = NOT_AN_INSTANCE
        code = EXIT_NOT_INSTANCE
    lines = [f"answer: {verdict.answer if verdict.answer else 'none'}", f"steps: {verdict.steps}",
             f"policy: {report['policy']}", f"wall: {wall:.3f}s"]
    if report.get("instance"):
        lines.append("input has no satisfying assignment: not-an-instance")
    if violations:
        lines += [f"audit: {v}" for v in violations]
    if args.trace:
        lines.append(f"trace: {args.trace}")
    return RunOutcome(code, report, lines)


def cmd_solve(args) -> RunOutcome:
    phi = _load_cnf(args.cnf)
    system = build_family_system(phi.n, phi.m, FamilyOptions(mode=args.mode, garbage=args.garbage))
    out = _simulate(system, phi, args, "solve")
    out.report.update(n=phi.n, m=phi.m, mode=args.mode, garbage=args.garbage)
    out.lines.insert(0, f"formula: n={phi.n} m={phi.m} mode={args.mode}{' garbage' if args.garbage else ''}")
    return out


def cmd_simulate(args) -> RunOutcome:
    try:
        system = parse_psystem(_read(args.psys))
    except ParseError as exc:
        raise UsageError(f"{args.psys}:\n{exc}") from exc
    if args.input_cnf and args.input:
        raise UsageError("give either --input or --input-cnf, not both")
    if args.input_cnf:
        source = _load_cnf(args.input_cnf)
    else:
        try:
            source = parse_multiset(args.input or "")
        except ValueError as exc:
            raise UsageError(f"bad --input: {exc}") from exc
    out = _simulate(system, source, args, "simulate")
    out.lines.insert(0, f"system: {system.name}")
    return out


def cmd_oracle(args) -> RunOutcome:
    phi = _load_cnf(args.cnf)
    models = satisfying_assignments(phi)
    mid = middle_assignment(phi)
    answer = NOT_AN_INSTANCE if mid is None else (YES if mid[-1] else "no")
    report = {"command": "oracle", "n": phi.n, "m": phi.m, "models": len(models),
              "median": list(mid) if mid else None, "answer": answer}
    lines = [f"satisfying assignments: {len(models)}",
             f"median: {'(' + ','.join(map(str, mid)) + ')' if mid else 'none'}",
             f"answer: {answer}"]
    return RunOutcome(_answer_code(answer), report, lines)


def verify_file(path: str, seeds: int, mode: str = "inject", max_steps: int = 10_000) -> dict:
    """Oracle answer against the simulator under both deterministic policies and ``seeds`` random ones."""
    entry = {"file": path}
    try:
        phi = parse_dimacs(_read(path))
        mid = middle_assignment(phi)
        if mid is None:
            entry.update(status=NOT_AN_INSTANCE, oracle=NOT_AN_INSTANCE)
            return entry
        expected = YES if mid[-1] else "no"
        system = build_family_system(phi.n, phi.m, FamilyOptions(mode=mode))
        input_ms, start = _start_for(system, phi)
        policies = [StepPolicy("sep-first"), StepPolicy("comm-first")] + [StepPolicy("random", seed=s) for s in range(seeds)]
        runs, problems = [], []
        for pol in policies:
            verdict, trace = run_to_halt(system, input_ms, pol, max_steps, start=start, require_answer=False)
            runs.append({"policy": pol.label, "answer": verdict.answer, "steps": verdict.steps})
            problems += [f"{pol.label}: {v}" for v in audit_recognizer_trace(trace, system.yes, system.no)]
            if verdict.answer != expected:
                problems.append(f"{pol.label}: answered {verdict.answer}, oracle says {expected}")
        if len({r["steps"] for r in runs}) > 1:
            problems.append("halting steps differ across policies")
        entry.update(status="PASS" if not problems else "FAIL", oracle=expected,
                     median=list(mid), steps=runs[0]["steps"], runs=runs, problems=problems)
    except (UsageError, ParseError, ValueError, EngineError) as exc:
        entry.update(status="ERROR", error=str(exc))
    return entry


def cmd_verify(args) -> RunOutcome:
    entries = [verify_file(path, args.seeds, args.mode, args.max_steps) for path in args.cnf]
    counted = [e for e in entries if e["status"] != NOT_AN_INSTANCE]
    passed = sum(e["status"] == "PASS" for e in counted)
    lines = []
    for e in entries:
        if e["status"] in ("PASS", "FAIL"):
            lines.append(f"{e['status']} {e['file']}: oracle {e['oracle']}, {len(e['runs'])} runs, step {e['steps']}")
            lines += [f"    {p}" for p in e["problems"]]
        elif e["status"] == "ERROR":
            lines.append(f"ERROR {e['file']}: {e['error']}")
        else:
            lines.append(f"SKIP {e['file']}: not-an-instance")
    lines.append(f"{passed}/{len(counted)} PASS")
    if any(e["status"] == "FAIL" for e in counted):
        code = EXIT_NO
    elif any(e["status"] == "ERROR" for e in counted):
        code = EXIT_RUNTIME
    elif not counted:
        code = EXIT_NOT_INSTANCE
    else:
        code = EXIT_YES
    return RunOutcome(code, {"command": "verify", "files": entries, "passed": passed, "counted": len(counted)}, lines)


def cmd_emit(args) -> RunOutcome:
    if args.n < 1 or args.m < 1:
        raise UsageError("n and m must be positive")
    system = build_family_system(args.n, args.m, FamilyOptions(mode=args.mode, garbage=args.garbage))
    text = serialize_psystem(system)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        lines = [f"wrote {system.name} to {args.output}"]
    else:
        sys.stdout.write(text)
        lines = []
    report = {"command": "emit", "system": system.name, "output": args.output,
              "rules": sum(1 for _ in system.all_rules()), "alphabet": len(system.alphabet)}
    return RunOutcome(EXIT_YES, report, lines)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="psys", description="Simulate P systems with membrane separation that decide MIDSAT.")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--policy", choices=("sep-first", "comm-first", "random"), default="sep-first")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-steps", type=int, default=10_000)
        p.add_argument("--trace", metavar="PATH", help="write a JSON-lines step trace")
        p.add_argument("--json", action="store_true")

    def family_flags(p):
        p.add_argument("--mode", choices=("inject", "full"), default="inject")
        p.add_argument("--garbage", action="store_true", help="add rules that expel dead objects")

    p = sub.add_parser("solve", help="build the family member for a DIMACS formula and run it")
    p.add_argument("cnf")
    family_flags(p)
    run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="run a system file")
    p.add_argument("psys")
    p.add_argument("--input", help='input multiset, e.g. "x[1,1], xb[2,1]"')
    p.add_argument("--input-cnf", metavar="CNF", help="encode a DIMACS formula as input")
    run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="brute-force MIDSAT answer")
    p.add_argument("cnf")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="compare simulator and oracle on DIMACS files")
    p.add_argument("cnf", nargs="+")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--mode", choices=("inject", "full"), default="inject")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit", help="write a generated system in the text format")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    family_flags(p)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_emit)
    return parser


def run_command(argv) -> RunOutcome:
    """Parse and execute; usage problems raise SystemExit(64)."""
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        return RunOutcome(EXIT_USAGE, {"error": str(exc)}, [f"error: {exc}"])
    except InputError as exc:
        return RunOutcome(EXIT_USAGE, {"error": str(exc)}, [f"error: {exc}"])
    except (EngineError, ValueError, OverflowError) as exc:
        return RunOutcome(EXIT_RUNTIME, {"error": f"{type(exc).__name__}: {exc}"}, [f"runtime error: {exc}"])


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    outcome = run_command(argv)
    as_json = "--json" in argv
    stream = sys.stderr if outcome.exit_code in (EXIT_USAGE, EXIT_RUNTIME) and "error" in outcome.report else sys.stdout
    if as_json:
        print(json.dumps(outcome.report, indent=2, sort_keys=True))
    elif outcome.lines:
        print("\n".join(outcome.lines), file=stream)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())

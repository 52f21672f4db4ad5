"""The ten acceptance criteria as plain functions returning (ok, detail).

Shared by tests/test_acceptance.py and runnable on its own:
``python3 tests/acceptance.py`` prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import random
import sys
import time
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from psys import CNFFormula, StepPolicy, audit_recognizer_trace, run_to_halt, schedule_constants  # noqa: E402
from psys.cli import run_command  # noqa: E402
from psys.dsl import parse_psystem, serialize_psystem  # noqa: E402
from psys.family import build_injected_configuration  # noqa: E402
from psys.model import SEP, rule_length, validate_system  # noqa: E402
from psys.multiset import sym  # noqa: E402
from psys.oracle import middle_assignment, midsat_answer  # noqa: E402

from cases import DATA, TABLE1, WORKED, family, solve  # noqa: E402

SWEEP_SIZE = 200
SWEEP_SEED = 20240601
CONFLUENCE_SEEDS = range(10)


def expected_steps(n: int, m: int) -> int:
    return 3 * n * n + 13 * n + 2 * m + 3


def random_satisfiable(rng: random.Random, max_n: int = 3, max_m: int = 3) -> CNFFormula:
    while True:
        n, m = rng.randint(1, max_n), rng.randint(1, max_m)
        clauses = []
        for _ in range(m):
            width = rng.randint(1, n)
            clauses.append([v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), width)])
        phi = CNFFormula.from_ints(n, clauses)
        if middle_assignment(phi) is not None:
            return phi


@lru_cache(maxsize=None)
def sweep_formulas() -> tuple[CNFFormula, ...]:
    rng = random.Random(SWEEP_SEED)
    seen, out = set(), []
    while len(out) < SWEEP_SIZE:
        phi = random_satisfiable(rng)
        key = (phi.n, tuple(tuple(c) for c in phi.to_ints()))
        if key not in seen:
            seen.add(key)
            out.append(phi)
    return tuple(out)


@lru_cache(maxsize=None)
def sweep_runs():
    """(formula, verdict, audit violations, seconds) for the oracle sweep, inject mode."""
    runs = []
    for phi in sweep_formulas():
        t0 = time.perf_counter()
        system, verdict, trace = solve(phi)
        runs.append((phi, verdict, audit_recognizer_trace(trace, system.yes, system.no), time.perf_counter() - t0))
    return tuple(runs)


@lru_cache(maxsize=None)
def table1_policy_runs():
    """Per benchmark row: list of (policy label, answer, steps, audit violations)."""
    out = {}
    policies = [StepPolicy("sep-first"), StepPolicy("comm-first")] + [StepPolicy("random", seed=s) for s in CONFLUENCE_SEEDS]
    for row in TABLE1:
        runs = []
        for pol in policies:
            system, verdict, trace = solve(row.phi, policy=pol)
            runs.append((pol.label, verdict.answer, verdict.steps, audit_recognizer_trace(trace, system.yes, system.no)))
        out[row.name] = runs
    return out


def criterion_1():
    t0 = time.perf_counter()
    solved = run_command(["solve", str(DATA / "example.cnf")])
    oracle = run_command(["oracle", str(DATA / "example.cnf")])
    wall = time.perf_counter() - t0
    median = tuple(oracle.report["median"])
    ok = solved.answer == "yes" and median == (1, 0, 1) and wall < 1.0
    return ok, f"answer={solved.answer} median={median} wall={wall:.2f}s"


def criterion_2():
    problems, walls = [], []
    for row in TABLE1:
        t0 = time.perf_counter()
        _, verdict, _ = solve(row.phi)
        wall = time.perf_counter() - t0
        walls.append(f"{wall:.1f}s")
        median = middle_assignment(row.phi)
        if verdict.answer != row.answer:
            problems.append(f"{row.name}: simulator says {verdict.answer}")
        if median != row.median:
            problems.append(f"{row.name}: oracle median {median}")
        if wall >= 30:
            problems.append(f"{row.name}: {wall:.1f}s")
    answers = "/".join(row.answer for row in TABLE1)
    return not problems, "; ".join(problems) or f"answers {answers}, medians exact, walls {' '.join(walls)}"


def criterion_3():
    problems, checked = [], 0
    for row in TABLE1:
        for mode in ("inject", "full"):
            _, verdict, _ = solve(row.phi, mode)
            checked += 1
            if verdict.steps != expected_steps(row.n, row.m):
                problems.append(f"{row.name}/{mode}: {verdict.steps}")
    for phi, verdict, _, _ in sweep_runs():
        checked += 1
        if verdict.steps != expected_steps(phi.n, phi.m):
            problems.append(f"{phi}: {verdict.steps}")
    return not problems, "; ".join(problems[:5]) or f"{checked} runs halt at 3n^2+13n+2m+3"


def criterion_4():
    runs = sweep_runs()
    wall = sum(seconds for *_, seconds in runs)  # per-run timings; the runs may be cached
    wrong = [(phi, v.answer) for phi, v, _, _ in runs if v.answer != midsat_answer(phi)]
    ok = not wrong and len(runs) == SWEEP_SIZE and wall < 120
    detail = f"{len(runs) - len(wrong)}/{len(runs)} agree in {wall:.1f}s"
    if wrong:
        detail += f"; first mismatch {wrong[0][0]} -> {wrong[0][1]}"
    return ok, detail


def criterion_5():
    problems = []
    for row in TABLE1:
        outcomes = {(ans, steps) for _, ans, steps, _ in table1_policy_runs()[row.name]}
        if outcomes != {(row.answer, row.steps)}:
            problems.append(f"{row.name}: {sorted(outcomes, key=str)}")
    n_runs = len(CONFLUENCE_SEEDS) + 2
    return not problems, "; ".join(problems) or f"{len(TABLE1)} instances x {n_runs} policies agree"


def criterion_6():
    violations = []
    total = 0
    for name, runs in table1_policy_runs().items():
        for label, _, _, found in runs:
            total += 1
            violations += [f"{name}/{label}: {v}" for v in found]
    for phi, _, found, _ in sweep_runs():
        total += 1
        violations += [f"{phi}: {v}" for v in found]
    return not violations, "; ".join(violations[:5]) or f"{total} runs, one answer each at the final step"


def criterion_7():
    row = WORKED
    n = row.n
    c = schedule_constants(n, row.m)
    _, verdict, trace = solve(row.phi, "full", snapshot_every=1)
    problems = []
    for s in range(c.I_out):
        cfg = trace.snapshots[s]
        xis, omegas = {}, {}
        for inst in cfg.instances:
            for x, k in inst.contents.items():
                if x.name == "xi":
                    xis[x] = xis.get(x, 0) + k
                elif x.name == "omega":
                    omegas[x] = omegas.get(x, 0) + k
        want_xi = {sym("xi", i, s): 1 for i in range(1, n + 1)}
        if xis != want_xi:
            problems.append(f"step {s}: xi {sorted(map(str, xis))}")
        if s <= c.I_dete(n):
            want = {sym("omega", s): 2 ** min(s, n)}
            if omegas != want:
                problems.append(f"step {s}: omega {omegas}")
    ok = not problems and verdict.answer == "yes"
    return ok, "; ".join(problems[:5]) or f"steps 0..{c.I_out - 1} checked on the full-mode trace"


def criterion_8():
    mismatches, checked = [], 0
    for row in TABLE1:
        c = schedule_constants(row.n, row.m)
        targets = {c.I_dete(k) + 3: k for k in range(1, row.n + 1)}
        seen = {}

        def look(cfg, targets=targets, seen=seen):
            if cfg.step in targets:
                seen[targets[cfg.step]] = cfg.by_id(1).contents[sym("mu", targets[cfg.step])] > 0

        system = family(row.n, row.m)
        run_to_halt(system, start=build_injected_configuration(row.phi, system), observer=look)
        for k in range(1, row.n + 1):
            checked += 1
            if seen.get(k) != bool(row.median[k - 1]):
                mismatches.append(f"{row.name} k={k}: mu present={seen.get(k)}")
    return not mismatches, "; ".join(mismatches) or f"{checked} bits match"


def criterion_9():
    problems, systems = [], 0
    for n in range(1, 5):
        for m in range(1, 5):
            for mode in ("inject", "full"):
                for garbage in (False, True):
                    system = family(n, m, mode, garbage)
                    systems += 1
                    long_rules = [r for _, r in system.all_rules() if r.kind != SEP and rule_length(r) > 3]
                    if long_rules:
                        problems.append(f"{system.name}: {len(long_rules)} rules longer than 3")
                    found = validate_system(system)
                    if found:
                        problems.append(f"{system.name}: {found[0]}")
                    if not parse_psystem(serialize_psystem(system)).structurally_equal(system):
                        problems.append(f"{system.name}: round-trip differs")
    return not problems, "; ".join(problems[:5]) or f"{systems} generated systems clean"


def criterion_10():
    problems, checked = [], 0
    cases = [(row.phi, mode) for row in TABLE1 for mode in ("inject", "full")]
    cases += [(phi, "inject") for phi in sweep_formulas()[:50]]
    for phi, mode in cases:
        _, plain, _ = solve(phi, mode)
        _, dirty, _ = solve(phi, mode, garbage=True)
        checked += 1
        if (plain.answer, plain.steps) != (dirty.answer, dirty.steps):
            problems.append(f"{phi}/{mode}: {plain.answer}@{plain.steps} vs {dirty.answer}@{dirty.steps}")
    return not problems, "; ".join(problems[:5]) or f"{checked} runs unchanged with garbage rules"


CRITERIA = {
    1: ("worked example", criterion_1),
    2: ("benchmark answers and medians", criterion_2),
    3: ("halting step count", criterion_3),
    4: ("oracle equivalence sweep", criterion_4),
    5: ("confluence across policies", criterion_5),
    6: ("recognizer audit", criterion_6),
    7: ("counter invariants", criterion_7),
    8: ("determination invariant", criterion_8),
    9: ("static audits", criterion_9),
    10: ("garbage differential", criterion_10),
}


def line(number: int, ok: bool, detail: str) -> str:
    return f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {CRITERIA[number][0]}: {detail}"


if __name__ == "__main__":
    failed = 0
    for number, (_, fn) in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(line(number, ok, detail), flush=True)
    sys.exit(1 if failed else 0)

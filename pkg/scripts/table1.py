"""Run the four benchmark formulas in both modes and print answers, medians, steps and timings.

    python3 scripts/table1.py [--garbage] [--policy random --seed 3]
"""

import argparse
import time
from pathlib import Path

from psys import FamilyOptions, StepPolicy, build_family_system, encode_instance, run_to_halt
from psys.dsl import parse_dimacs
from psys.family import build_injected_configuration, schedule_constants
from psys.oracle import middle_assignment, midsat_answer

DATA = Path(__file__).resolve().parent.parent / "data" / "table1"

ap = argparse.ArgumentParser()
ap.add_argument("--garbage", action="store_true")
ap.add_argument("--policy", default="sep-first")
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--modes", default="inject,full")
args = ap.parse_args()
policy = StepPolicy(args.policy, seed=args.seed)

print(f"{'file':<14}{'n':>3}{'m':>3}  {'median':<16}{'oracle':<8}{'mode':<8}{'answer':<8}{'steps':>6}{'expected':>9}{'sec':>8}")
for path in sorted(DATA.glob("*.cnf")):
    phi = parse_dimacs(path.read_text())
    mid = "".join(map(str, middle_assignment(phi)))
    for mode in args.modes.split(","):
        system = build_family_system(phi.n, phi.m, FamilyOptions(mode=mode, garbage=args.garbage))
        t0 = time.perf_counter()
        if mode == "inject":
            verdict, _ = run_to_halt(system, policy=policy, start=build_injected_configuration(phi, system))
        else:
            verdict, _ = run_to_halt(system, encode_instance(phi)[1], policy=policy)
        wall = time.perf_counter() - t0
        total = schedule_constants(phi.n, phi.m).total
        print(f"{path.name:<14}{phi.n:>3}{phi.m:>3}  {mid:<16}{midsat_answer(phi):<8}{mode:<8}"
              f"{verdict.answer:<8}{verdict.steps:>6}{total:>9}{wall:>8.2f}")

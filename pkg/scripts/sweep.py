"""Random oracle-equivalence sweep.

    python3 scripts/sweep.py --count 500 --max-n 4 --max-m 4 --mode full --seeds 3

Every satisfiable random formula is run under both deterministic policies and
``--seeds`` random ones; answers are compared with the brute-force oracle and
halting steps with the schedule length.
"""

import argparse
import random
import time
from collections import Counter

from psys import CNFFormula, FamilyOptions, StepPolicy, build_family_system, encode_instance, run_to_halt
from psys.engine import audit_recognizer_trace
from psys.family import build_injected_configuration, schedule_constants
from psys.oracle import midsat_answer

ap = argparse.ArgumentParser()
ap.add_argument("--count", type=int, default=200)
ap.add_argument("--max-n", type=int, default=3)
ap.add_argument("--max-m", type=int, default=3)
ap.add_argument("--mode", choices=("inject", "full"), default="inject")
ap.add_argument("--seeds", type=int, default=1)
ap.add_argument("--rng", type=int, default=0)
ap.add_argument("--garbage", action="store_true")
ap.add_argument("--verbatim", action="store_true", help="use the unmodified theta timing")
args = ap.parse_args()

rng = random.Random(args.rng)
systems = {}
policies = [StepPolicy("sep-first"), StepPolicy("comm-first")] + [StepPolicy("random", seed=s) for s in range(args.seeds)]
tally, failures = Counter(), []
t0 = time.perf_counter()
done = 0
while done < args.count:
    n, m = rng.randint(1, args.max_n), rng.randint(1, args.max_m)
    clauses = [[v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), rng.randint(1, n))]
               for _ in range(m)]
    phi = CNFFormula.from_ints(n, clauses)
    expected = midsat_answer(phi)
    if expected == "not-an-instance":
        continue
    done += 1
    key = (n, m)
    if key not in systems:
        systems[key] = build_family_system(n, m, FamilyOptions(mode=args.mode, garbage=args.garbage,
                                                               verbatim=args.verbatim))
    system = systems[key]
    for pol in policies:
        if args.mode == "inject":
            verdict, trace = run_to_halt(system, policy=pol, start=build_injected_configuration(phi, system),
                                         require_answer=False)
        else:
            verdict, trace = run_to_halt(system, encode_instance(phi)[1], policy=pol, require_answer=False)
        ok = (verdict.answer == expected and verdict.steps == schedule_constants(n, m).total
              and not audit_recognizer_trace(trace))
        tally["ok" if ok else "bad"] += 1
        if not ok:
            failures.append((phi.to_ints(), n, pol.label, verdict.answer, verdict.steps, expected))

print(f"{done} formulas x {len(policies)} policies, mode={args.mode}: {tally['ok']} ok, {tally['bad']} bad "
      f"in {time.perf_counter() - t0:.1f}s")
for f in failures[:10]:
    print("  failure:", f)

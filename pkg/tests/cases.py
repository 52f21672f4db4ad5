"""Shared formulas and run helpers for the test-suite."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from psys import CNFFormula, FamilyOptions, StepPolicy, build_family_system, encode_instance, run_to_halt
from psys.family import build_injected_configuration

DATA = Path(__file__).resolve().parent.parent / "data"


@dataclass(frozen=True)
class Row:
    name: str
    n: int
    clauses: tuple
    answer: str
    median: tuple
    steps: int

    @property
    def phi(self) -> CNFFormula:
        return CNFFormula.from_ints(self.n, self.clauses)

    @property
    def m(self) -> int:
        return len(self.clauses)


WORKED = Row("t1-row1", 3, ((1, 2, -3), (1, -2, 3), (-1, 2, 3)), "yes", (1, 0, 1), 75)

TABLE1 = (
    WORKED,
    Row("t1-row2", 5, ((1, 2, -5), (-2, 3), (-1, 3, 4), (1, 4, -5)), "yes", (1, 0, 0, 1, 1), 151),
    Row("t1-row3", 6, ((1, 2, 5, 6), (-2, 3, 4), (-1, -4, 6), (1, -3, -5), (3, -6)), "no", (1, 0, 0, 0, 1, 0), 199),
    Row("t1-row4", 7, ((1, 2, 3, 4), (5, 6, 7), (-1, 2, 5), (3, -5, -6), (3, -4, 7), (-1, -7), (-2, 6)), "yes",
        (0, 1, 0, 0, 0, 1, 1), 255),
)

_SYSTEMS: dict = {}


def family(n: int, m: int, mode: str = "inject", garbage: bool = False, verbatim: bool = False):
    key = (n, m, mode, garbage, verbatim)
    if key not in _SYSTEMS:
        _SYSTEMS[key] = build_family_system(n, m, FamilyOptions(mode=mode, garbage=garbage, verbatim=verbatim))
    return _SYSTEMS[key]


def solve(phi: CNFFormula, mode: str = "inject", garbage: bool = False, policy: StepPolicy = StepPolicy(),
          verbatim: bool = False, snapshot_every=None):
    """Run the family member for ``phi``; returns (system, verdict, trace)."""
    system = family(phi.n, phi.m, mode, garbage, verbatim)
    if mode == "inject":
        start = build_injected_configuration(phi, system)
        verdict, trace = run_to_halt(system, policy=policy, start=start, require_answer=False,
                                     snapshot_every=snapshot_every)
    else:
        verdict, trace = run_to_halt(system, encode_instance(phi)[1], policy=policy, require_answer=False,
                                     snapshot_every=snapshot_every)
    return system, verdict, trace

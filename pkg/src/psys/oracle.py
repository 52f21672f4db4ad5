"""Brute-force reference answers for SAT and MIDSAT."""

from __future__ import annotations

from itertools import product

from .cnf import CNFFormula

MAX_VARS = 25

YES, NO, NOT_AN_INSTANCE = "yes", "no", "not-an-instance"

Assignment = tuple[int, ...]


def satisfying_assignments(phi: CNFFormula) -> list[Assignment]:
    """All models of ``phi`` in ascending lexicographic order (x1 most significant)."""
    if phi.n > MAX_VARS:
        raise ValueError(f"enumeration bound exceeded: n={phi.n} > {MAX_VARS}")
    # itertools.product over (0, 1) already walks assignments in lexicographic order
    return [bits for bits in product((0, 1), repeat=phi.n) if phi.satisfied_by(bits)]


def median_index(count: int) -> int:
    return (count + 1) // 2 - 1  # ceil(S/2) - 1


def middle_assignment(phi: CNFFormula) -> Assignment | None:
    models = satisfying_assignments(phi)
    if not models:
        return None
    return models[median_index(len(models))]


def midsat_answer(phi: CNFFormula) -> str:
    mid = middle_assignment(phi)
    if mid is None:
        return NOT_AN_INSTANCE
    return YES if mid[-1] == 1 else NO

"""CNF formulas: literal = (variable, polarity) with variables numbered from 1."""

from __future__ import annotations

from dataclasses import dataclass

Literal = tuple[int, bool]


@dataclass(frozen=True)
class CNFFormula:
    n: int
    clauses: tuple[frozenset[Literal], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a formula needs at least one variable")
        if not self.clauses:
            raise ValueError("a formula needs at least one clause")
        for j, clause in enumerate(self.clauses, 1):
            if not clause:
                raise ValueError(f"clause {j} is empty")
            for var, _ in clause:
                if not 1 <= var <= self.n:
                    raise ValueError(f"clause {j} uses variable {var} outside 1..{self.n}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @classmethod
    def from_ints(cls, n: int, clauses) -> CNFFormula:
        """Build from DIMACS-style integer lists, e.g. ``[[1, 2, -3], [-1]]``."""
        return cls(n, tuple(frozenset((abs(x), x > 0) for x in clause) for clause in clauses))

    def to_ints(self) -> list[list[int]]:
        return [sorted((v if pos else -v for v, pos in clause), key=lambda x: (abs(x), x)) for clause in self.clauses]

    def satisfied_by(self, bits) -> bool:
        return all(any(bool(bits[v - 1]) == pos for v, pos in clause) for clause in self.clauses)

    def first_true_literal(self, clause_index: int, bits) -> Literal | None:
        """Lowest-numbered variable whose literal in the clause holds under ``bits``."""
        for var, pos in sorted(self.clauses[clause_index]):
            if bool(bits[var - 1]) == pos:
                return var, pos
        return None

    def __str__(self) -> str:
        def lit(v, pos):
            return f"x{v}" if pos else f"~x{v}"

        return " & ".join("(" + " | ".join(lit(v, p) for v, p in sorted(c)) + ")" for c in self.clauses)

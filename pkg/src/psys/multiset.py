"""Object symbols and finite multisets."""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import total_ordering

MAX_COUNT = 2**64 - 1

_SYMBOL_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\s*(?:\[\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*\])?\s*$")


class MultisetUnderflow(ValueError):
    pass


class MultiplicityOverflow(OverflowError):
    pass


@total_ordering
@dataclass(frozen=True, eq=False)
class Symbol:
    """An object of the alphabet: a base name plus an optional index tuple.

    ``Symbol("xi", (1, 0))`` prints as ``xi[1,0]``. The hash is computed once;
    symbols are dictionary keys in every hot loop of the engine.
    """

    name: str
    indices: tuple[int, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "_hash", hash((self.name, self.indices)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Symbol):
            return NotImplemented
        return self._hash == other._hash and self.name == other.name and self.indices == other.indices

    def __str__(self) -> str:
        if not self.indices:
            return self.name
        return f"{self.name}[{','.join(map(str, self.indices))}]"

    def __repr__(self) -> str:
        return f"Symbol({str(self)!r})"

    def __lt__(self, other: Symbol) -> bool:
        return (self.name, self.indices) < (other.name, other.indices)

    @classmethod
    def parse(cls, text: str) -> Symbol:
        match = _SYMBOL_RE.match(text)
        if not match:
            raise ValueError(f"not a symbol: {text!r}")
        name, idx = match.groups()
        indices = tuple(int(part) for part in idx.split(",")) if idx else ()
        return sym(name, *indices)


_INTERNED: dict[tuple, Symbol] = {}


def sym(name: str, *indices: int) -> Symbol:
    """Interned constructor: equal symbols built here are the same object."""
    key = (name, indices)
    found = _INTERNED.get(key)
    if found is None:
        found = _INTERNED[key] = Symbol(name, tuple(indices))
    return found


def _check(count: int) -> int:
    if count > MAX_COUNT:
        raise MultiplicityOverflow(f"multiplicity {count} exceeds 64 bits")
    return count


class Multiset(Mapping):
    """Immutable finite multiset of symbols.

    Mapping interface over the support: ``ms[a]`` is the multiplicity of
    ``a`` (0 when absent), ``len(ms)`` the size of the support and
    ``ms.size`` the cardinality.
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, items: Mapping[Symbol, int] | Iterable[Symbol] | None = None):
        counts: dict[Symbol, int] = {}
        if items is None:
            pass
        elif isinstance(items, Mapping):
            for key, count in items.items():
                if count < 0:
                    raise ValueError(f"negative multiplicity for {key}")
                if count:
                    counts[key] = _check(count)
        else:
            for key in items:
                counts[key] = counts.get(key, 0) + 1
        self._counts = counts
        self._hash = None

    def __getitem__(self, key: Symbol) -> int:
        return self._counts.get(key, 0)

    def __contains__(self, key: object) -> bool:
        return key in self._counts

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Multiset):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    @property
    def size(self) -> int:
        return sum(self._counts.values())

    def support(self) -> frozenset[Symbol]:
        return frozenset(self._counts)

    def __add__(self, other: Multiset) -> Multiset:
        return ms_sum(self, other)

    def __sub__(self, other: Multiset) -> Multiset:
        return ms_sub(self, other)

    def __le__(self, other: Multiset) -> bool:
        return ms_leq(self, other)

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __repr__(self) -> str:
        return f"Multiset({format_multiset(self)!r})"

    def __str__(self) -> str:
        return format_multiset(self)


EMPTY = Multiset()


def ms_sum(a: Mapping[Symbol, int], b: Mapping[Symbol, int]) -> Multiset:
    counts = dict(a.items())
    for key, count in b.items():
        counts[key] = _check(counts.get(key, 0) + count)
    return Multiset(counts)


def ms_leq(a: Mapping[Symbol, int], b: Mapping[Symbol, int]) -> bool:
    return all(b.get(key, 0) >= count for key, count in a.items())


def ms_sub(a: Mapping[Symbol, int], b: Mapping[Symbol, int]) -> Multiset:
    counts = dict(a.items())
    for key, count in b.items():
        left = counts.get(key, 0) - count
        if left < 0:
            raise MultisetUnderflow(f"cannot remove {count} x {key} from {format_multiset(a)}")
        counts[key] = left
    return Multiset(counts)


def format_multiset(ms: Mapping[Symbol, int]) -> str:
    """Canonical text: symbols sorted, ``sym*count`` with ``*1`` omitted."""
    parts = []
    for key in sorted(ms):
        count = ms[key]
        if count:
            parts.append(str(key) if count == 1 else f"{key}*{count}")
    return ", ".join(parts)


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside square brackets."""
    parts, depth, start = [], 0, 0
    for pos, char in enumerate(text):
        if char == "[":
            depth += 1
        elif char == "]":
            depth -= 1
        elif char == sep and depth == 0:
            parts.append(text[start:pos])
            start = pos + 1
    parts.append(text[start:])
    return parts


def parse_multiset(text: str) -> Multiset:
    counts: dict[Symbol, int] = {}
    for term in split_top_level(text):
        term = term.strip()
        if not term:
            continue
        head, star, count = term.rpartition("*")
        if star and count.strip().isdigit():
            symbol, mult = Symbol.parse(head), int(count)
        else:
            symbol, mult = Symbol.parse(term), 1
        counts[symbol] = counts.get(symbol, 0) + mult
    return Multiset(counts)

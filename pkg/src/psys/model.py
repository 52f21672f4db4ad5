"""Static systems and dynamic configurations."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

from .multiset import EMPTY, Multiset, Symbol, format_multiset, ms_sum, sym

OUT, IN, ANTIPORT, SEP = "out", "in", "swap", "sep"
ENV = 0  # label/instance id used for the environment


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    """One rule of some membrane ``h``.

    ``u`` leaves ``h`` (or enters it, for ``in``); for antiport ``v`` enters
    from the parent region. Separation rules only carry ``trigger``.
    ``tag`` names the block a generated rule came from; it does not take
    part in equality.
    """

    kind: str
    u: Multiset = EMPTY
    v: Multiset = EMPTY
    trigger: Symbol | None = None
    tag: str = field(default="", compare=False)

    @classmethod
    def out(cls, u, tag=""):
        return cls(OUT, _ms(u), tag=tag)

    @classmethod
    def into(cls, u, tag=""):
        return cls(IN, _ms(u), tag=tag)

    @classmethod
    def antiport(cls, u, v, tag=""):
        return cls(ANTIPORT, _ms(u), _ms(v), tag=tag)

    @classmethod
    def separation(cls, a: Symbol, tag=""):
        return cls(SEP, trigger=a, tag=tag)

    def symbols(self) -> set[Symbol]:
        found = set(self.u) | set(self.v)
        if self.trigger is not None:
            found.add(self.trigger)
        return found

    def inner(self) -> Multiset:
        """Objects taken from the membrane's own region."""
        return self.u if self.kind in (OUT, ANTIPORT) else EMPTY

    def outer(self) -> Multiset:
        """Objects taken from the parent region."""
        if self.kind == IN:
            return self.u
        if self.kind == ANTIPORT:
            return self.v
        return EMPTY

    def __str__(self) -> str:
        if self.kind == OUT:
            return f"out: {format_multiset(self.u)}"
        if self.kind == IN:
            return f"in: {format_multiset(self.u)}"
        if self.kind == ANTIPORT:
            return f"swap: {format_multiset(self.u)} <-> {format_multiset(self.v)}"
        return f"sep: {self.trigger}"


def _ms(value) -> Multiset:
    if isinstance(value, Multiset):
        return value
    if isinstance(value, Symbol):
        return Multiset([value])
    return Multiset(value)


def rule_length(rule: Rule) -> int:
    if rule.kind == SEP:
        raise ValueError("separation rules have no length")
    if rule.kind == ANTIPORT:
        return rule.u.size + rule.v.size
    return rule.u.size


@dataclass(frozen=True)
class MembraneTree:
    """Rooted tree over labels 1..q, given by a parent map (root -> None)."""

    parent: Mapping[int, int | None]

    @classmethod
    def nested(cls, q: int) -> MembraneTree:
        return cls({h: (h - 1 if h > 1 else None) for h in range(1, q + 1)})

    @property
    def labels(self) -> list[int]:
        return sorted(self.parent)

    @property
    def root(self) -> int:
        roots = [h for h, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise ValueError("membrane tree must have exactly one root")
        return roots[0]

    def children(self, h: int) -> list[int]:
        return sorted(c for c, p in self.parent.items() if p == h)

    def is_leaf(self, h: int) -> bool:
        return not self.children(h)

    def problems(self) -> list[str]:
        out = []
        q = len(self.parent)
        if sorted(self.parent) != list(range(1, q + 1)):
            out.append("labels are not 1..q")
        roots = [h for h, p in self.parent.items() if p is None]
        if len(roots) != 1:
            out.append(f"expected one root, found {len(roots)}")
        for h, p in self.parent.items():
            if p is not None and p not in self.parent:
                out.append(f"membrane {h} has unknown parent {p}")
        # cycle check: walking up from every node must reach the root
        for h in self.parent:
            seen, cur = set(), h
            while cur is not None and cur in self.parent:
                if cur in seen:
                    out.append(f"cycle through membrane {h}")
                    break
                seen.add(cur)
                cur = self.parent[cur]
        return out

    def to_text(self) -> str:
        def render(h):
            inner = " ".join(render(c) for c in self.children(h))
            return f"[{h}{' ' + inner if inner else ''}]"

        return render(self.root)


@dataclass(frozen=True)
class CompiledRule:
    rid: int
    label: int
    rule: Rule
    inner: tuple[tuple[Symbol, int], ...]
    outer: tuple[tuple[Symbol, int], ...]


@dataclass(frozen=True, eq=True)
class RecognizerSystem:
    name: str
    alphabet: frozenset[Symbol]
    partition0: frozenset[Symbol]
    partition1: frozenset[Symbol]
    input_alphabet: frozenset[Symbol]
    env: frozenset[Symbol]
    tree: MembraneTree
    initial: Mapping[int, Multiset]
    rules: Mapping[int, tuple[Rule, ...]]
    input_membrane: int = 1
    output: int = ENV
    yes: Symbol = sym("yes")
    no: Symbol = sym("no")

    __hash__ = object.__hash__

    @classmethod
    def build(cls, name, alphabet, *, env=(), input_alphabet=(), partition1=(), partition0=None,
              tree=None, initial=None, rules=None, input_membrane=1, output=ENV):
        """Convenience constructor; Γ0 defaults to the complement of Γ1."""
        alphabet = frozenset(alphabet)
        partition1 = frozenset(partition1)
        partition0 = alphabet - partition1 if partition0 is None else frozenset(partition0)
        tree = tree or MembraneTree({1: None})
        initial = {h: _ms((initial or {}).get(h, EMPTY)) for h in tree.labels}
        rules = {h: tuple((rules or {}).get(h, ())) for h in tree.labels}
        return cls(name, alphabet, partition0, partition1, frozenset(input_alphabet), frozenset(env),
                   tree, initial, rules, input_membrane, output)

    @cached_property
    def compiled(self) -> dict[int, list[CompiledRule]]:
        table, rid = {}, 0
        for h in self.tree.labels:
            lst = []
            for rule in self.rules.get(h, ()):
                lst.append(CompiledRule(rid, h, rule, tuple(sorted(rule.inner().items())),
                                        tuple(sorted(rule.outer().items()))))
                rid += 1
            table[h] = lst
        return table

    @cached_property
    def rule_by_id(self) -> dict[int, CompiledRule]:
        return {cr.rid: cr for lst in self.compiled.values() for cr in lst}

    @cached_property
    def rule_index(self) -> dict[int, dict[Symbol, list[CompiledRule]]]:
        """Per label: communication rules keyed by one of their inner symbols.

        The key is the inner symbol shared by the fewest rules of that
        membrane, so a rule is only looked at when its rarest object is there.
        """
        index = {}
        for h, lst in self.compiled.items():
            usage: dict[Symbol, int] = {}
            for cr in lst:
                for s, _ in cr.inner:
                    usage[s] = usage.get(s, 0) + 1
            table: dict[Symbol, list[CompiledRule]] = {}
            for cr in lst:
                if cr.rule.kind in (OUT, ANTIPORT):
                    key = min((s for s, _ in cr.inner), key=lambda s: (usage[s], s))
                    table.setdefault(key, []).append(cr)
            index[h] = table
        return index

    @cached_property
    def in_rules(self) -> dict[int, list[CompiledRule]]:
        return {h: [cr for cr in lst if cr.rule.kind == IN] for h, lst in self.compiled.items()}

    @cached_property
    def sep_rules(self) -> dict[int, list[CompiledRule]]:
        return {h: [cr for cr in lst if cr.rule.kind == SEP] for h, lst in self.compiled.items()}

    def all_rules(self) -> Iterable[tuple[int, Rule]]:
        for h in self.tree.labels:
            for rule in self.rules.get(h, ()):
                yield h, rule

    def structurally_equal(self, other: RecognizerSystem) -> bool:
        return (
            self.name == other.name
            and self.alphabet == other.alphabet
            and self.partition0 == other.partition0
            and self.partition1 == other.partition1
            and self.input_alphabet == other.input_alphabet
            and self.env == other.env
            and dict(self.tree.parent) == dict(other.tree.parent)
            and {h: m for h, m in self.initial.items() if m} == {h: m for h, m in other.initial.items() if m}
            and {h: tuple(r) for h, r in self.rules.items() if r} == {h: tuple(r) for h, r in other.rules.items() if r}
            and self.input_membrane == other.input_membrane
            and self.output == other.output
        )


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}" if self.detail else self.code


def validate_system(system: RecognizerSystem) -> list[Violation]:
    out: list[Violation] = []
    gamma = system.alphabet
    for problem in system.tree.problems():
        out.append(Violation("bad-tree", problem))
    if system.partition0 & system.partition1:
        out.append(Violation("partition-overlap", format_multiset(Multiset(system.partition0 & system.partition1))))
    if system.partition0 | system.partition1 != gamma:
        out.append(Violation("partition-cover", "partition does not cover the alphabet"))
    if not system.input_alphabet <= gamma:
        out.append(Violation("unknown-symbol", "input alphabet not inside the alphabet"))
    if not system.env <= gamma:
        out.append(Violation("unknown-symbol", "environment set not inside the alphabet"))
    if system.env & system.input_alphabet:
        out.append(Violation("env-input-overlap", ", ".join(map(str, sorted(system.env & system.input_alphabet)))))
    labels = set(system.tree.parent)
    if system.input_membrane not in labels:
        out.append(Violation("bad-input-membrane", str(system.input_membrane)))
    if system.output != ENV:
        out.append(Violation("output-not-environment", str(system.output)))
    for h, content in system.initial.items():
        if h not in labels:
            out.append(Violation("unknown-membrane", f"initial content for {h}"))
        for s in content:
            if s not in gamma:
                out.append(Violation("unknown-symbol", f"{s} in initial content of {h}"))
            elif s in system.input_alphabet:
                out.append(Violation("initial-input-symbol", f"{s} in initial content of {h}"))
    for answer in (system.yes, system.no):
        if answer not in gamma or answer in system.input_alphabet:
            out.append(Violation("bad-answer-object", str(answer)))
        if not any(answer in content for content in system.initial.values()):
            out.append(Violation("missing-answer-object", str(answer)))
    skin = system.tree.root if not system.tree.problems() else None
    for h, rules in system.rules.items():
        if h not in labels:
            out.append(Violation("unknown-membrane", f"rules for {h}"))
            continue
        for rule in rules:
            missing = [s for s in rule.symbols() if s not in gamma]
            if missing:
                out.append(Violation("unknown-symbol", f"{', '.join(map(str, missing))} in rule {rule} of {h}"))
            if rule.kind == SEP:
                if rule.trigger is None:
                    out.append(Violation("empty-multiset", f"separation without trigger in {h}"))
                if h == skin:
                    out.append(Violation("separation-on-skin", str(rule)))
                elif not system.tree.is_leaf(h):
                    out.append(Violation("separation-non-elementary", f"{rule} in {h}"))
            elif rule.kind in (OUT, IN):
                if not rule.u:
                    out.append(Violation("empty-multiset", f"{rule} in {h}"))
            elif rule.kind == ANTIPORT:
                if not rule.u or not rule.v:
                    out.append(Violation("empty-multiset", f"{rule} in {h}"))
            else:
                out.append(Violation("unknown-rule-kind", rule.kind))
    return out


@dataclass(frozen=True)
class Instance:
    """A live membrane: stable id, its label and the id of its parent (0 = environment)."""

    id: int
    label: int
    parent: int
    contents: Multiset


@dataclass(frozen=True)
class Configuration:
    instances: tuple[Instance, ...]
    env: Multiset = EMPTY
    step: int = 0

    def by_id(self, iid: int) -> Instance:
        for inst in self.instances:
            if inst.id == iid:
                return inst
        raise KeyError(iid)

    def with_label(self, label: int) -> list[Instance]:
        return [inst for inst in self.instances if inst.label == label]

    def region(self, label: int) -> Multiset:
        """Sum of the contents of every instance carrying ``label``."""
        total = EMPTY
        for inst in self.with_label(label):
            total = ms_sum(total, inst.contents)
        return total

    @property
    def next_id(self) -> int:
        return max((inst.id for inst in self.instances), default=0) + 1

    def shape_problems(self, system: RecognizerSystem) -> list[str]:
        ids = {inst.id: inst for inst in self.instances}
        out = []
        for inst in self.instances:
            expected = system.tree.parent.get(inst.label, "missing")
            if expected == "missing":
                out.append(f"instance {inst.id} has unknown label {inst.label}")
            elif expected is None:
                if inst.parent != ENV:
                    out.append(f"skin instance {inst.id} is nested")
            elif inst.parent not in ids or ids[inst.parent].label != expected:
                out.append(f"instance {inst.id} sits under the wrong parent")
        return out


def initial_configuration(system: RecognizerSystem, input_ms: Mapping[Symbol, int] | None = None) -> Configuration:
    input_ms = _ms(input_ms or EMPTY)
    stray = [s for s in input_ms if s not in system.input_alphabet]
    if stray:
        raise InputError(f"input symbols outside the input alphabet: {', '.join(map(str, sorted(stray)))}")
    order = _bfs(system.tree)
    ids = {h: i + 1 for i, h in enumerate(order)}
    instances = []
    for h in order:
        content = system.initial.get(h, EMPTY)
        if h == system.input_membrane:
            content = ms_sum(content, input_ms)
        parent = system.tree.parent[h]
        instances.append(Instance(ids[h], h, ENV if parent is None else ids[parent], content))
    return Configuration(tuple(instances), EMPTY, 0)


def _bfs(tree: MembraneTree) -> list[int]:
    order, queue = [], [tree.root]
    while queue:
        h = queue.pop(0)
        order.append(h)
        queue.extend(tree.children(h))
    return order

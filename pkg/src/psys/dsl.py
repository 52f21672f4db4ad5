"""Text formats: a line-oriented P system definition language and DIMACS CNF.

System files look like::

    @system demo
    @alphabet a, b, yes, no
    @structure [1 [2]]
    @init 1: yes, no
    @rules 2:
    out: a*2
    swap: a <-> b
    sep: b
    @input-membrane 1
    @output env

Repeated list directives accumulate. ``#`` starts a comment; inside a rules
block a comment of the form ``# -- name`` sets the tag of the rules below it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cnf import CNFFormula
from .model import ENV, MembraneTree, RecognizerSystem, Rule, validate_system
from .multiset import MAX_COUNT, Multiset, Symbol, format_multiset

LIST_CHUNK = 12  # symbols per line in emitted list directives


@dataclass(frozen=True)
class SourceSpan:
    """Position in the input: 1-based line and column, 0-based byte offsets [start, end)."""

    line: int
    column: int
    start: int
    end: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


class _Source:
    """Maps (line, column) pieces of the text back to byte spans."""

    def __init__(self, text: str):
        self.text = text
        self.lines = text.split("\n")
        self.offsets = []
        pos = 0
        for line in self.lines:
            self.offsets.append(pos)
            pos += len(line.encode()) + 1
        self.size = len(text.encode())

    def span(self, lineno: int, col: int = 0, length: int | None = None) -> SourceSpan:
        line = self.lines[lineno - 1] if self.lines else ""
        col = min(col, len(line))
        if length is None:
            length = len(line) - col
        start = self.offsets[lineno - 1] + len(line[:col].encode()) if self.lines else 0
        end = start + len(line[col:col + length].encode())
        return SourceSpan(lineno, col + 1, min(start, self.size), min(end, self.size))


def _terms(text: str, base: int) -> list[tuple[str, int]]:
    """Comma-separated terms outside brackets, each with its column."""
    out, depth, start = [], 0, 0
    for pos, char in enumerate(text + ","):
        if char == "[":
            depth += 1
        elif char == "]":
            depth -= 1
        elif char == "," and depth == 0:
            raw = text[start:pos]
            stripped = raw.strip()
            if stripped:
                out.append((stripped, base + start + (len(raw) - len(raw.lstrip()))))
            start = pos + 1
    return out


class _Parser:
    def __init__(self, text: str):
        self.src = _Source(text)
        self.diags: list[Diagnostic] = []
        self.name = None
        self.lists = {key: [] for key in ("alphabet", "env", "input-alphabet", "partition0", "partition1")}
        self.seen_lists: set[str] = set()
        self.tree = None
        self.structure_line = 1
        self.init: dict[int, list] = {}
        self.rules: dict[int, list] = {}
        self.input_membrane = 1
        self.output = ENV
        self.spans: dict[str, SourceSpan] = {}

    def error(self, message: str, lineno: int, col: int = 0, length: int | None = None) -> None:
        self.diags.append(Diagnostic(message, self.src.span(lineno, col, length)))

    def symbol(self, term: str, lineno: int, col: int) -> Symbol | None:
        try:
            return Symbol.parse(term)
        except ValueError:
            self.error(f"malformed symbol {term!r}", lineno, col, len(term))
            return None

    def multiset(self, text: str, lineno: int, col: int) -> list[tuple[Symbol, int, int, int]] | None:
        """Terms as (symbol, count, column, length); None after reporting an error."""
        found, ok = [], True
        for term, tcol in _terms(text, col):
            head, star, count = term.rpartition("*")
            mult = 1
            if star:
                if not count.strip().isdigit() or int(count) < 1:
                    self.error(f"bad multiplicity in {term!r}", lineno, tcol, len(term))
                    ok = False
                    continue
                mult = int(count)
                if mult > MAX_COUNT:
                    self.error(f"multiplicity of {term!r} exceeds 64 bits", lineno, tcol, len(term))
                    ok = False
                    continue
                term_sym = head.strip()
            else:
                term_sym = term
            s = self.symbol(term_sym, lineno, tcol)
            if s is None:
                ok = False
                continue
            found.append((s, mult, tcol, len(term)))
        return found if ok else None

    def label(self, text: str, lineno: int, col: int) -> int | None:
        text = text.strip()
        if not text.isdigit() or int(text) < 1:
            self.error(f"expected a membrane label, got {text!r}", lineno, col, max(len(text), 1))
            return None
        return int(text)

    def structure(self, text: str, lineno: int, col: int) -> None:
        parent: dict[int, int | None] = {}
        stack: list[int] = []
        for match in re.finditer(r"\[|\]|\d+|\S", text):
            tok, tcol = match.group(), col + match.start()
            if tok == "[":
                stack.append(-1)
            elif tok == "]":
                if not stack or stack[-1] == -1:
                    self.error("unbalanced or unlabeled membrane in structure", lineno, tcol, 1)
                    return
                stack.pop()
            elif tok.isdigit():
                if not stack or stack[-1] != -1:
                    self.error("label must follow an opening bracket", lineno, tcol, len(tok))
                    return
                h = int(tok)
                if h in parent:
                    self.error(f"membrane {h} appears twice", lineno, tcol, len(tok))
                    return
                if -1 in stack[:-1]:
                    self.error("unlabeled enclosing membrane", lineno, tcol, len(tok))
                    return
                parent[h] = stack[-2] if len(stack) > 1 else None
                if len([p for p in parent.values() if p is None]) > 1:
                    self.error("structure has more than one outermost membrane", lineno, tcol, len(tok))
                    return
                stack[-1] = h
            else:
                self.error(f"unexpected {tok!r} in structure", lineno, tcol, len(tok))
                return
        if stack or not parent:
            self.error("unbalanced structure", lineno, col)
            return
        self.tree = MembraneTree(parent)
        self.structure_line = lineno

    def rule(self, h: int, body: str, lineno: int, col: int, tag: str) -> None:
        kind, colon, rest = body.partition(":")
        kind = kind.strip()
        rcol = col + len(kind) + 1 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if not colon or kind not in ("out", "in", "swap", "sep"):
            self.error(f"expected out:, in:, swap: or sep:, got {body.strip()!r}", lineno, col)
            return
        if kind == "sep":
            s = self.symbol(rest, lineno, rcol) if rest else None
            if s is None:
                if not rest:
                    self.error("separation rule needs a trigger symbol", lineno, col)
                return
            self.rules.setdefault(h, []).append((Rule.separation(s, tag=tag), [(s, lineno, rcol, len(rest))]))
            return
        if kind == "swap":
            left, arrow, right = rest.partition("<->")
            if not arrow:
                self.error("swap rule needs '<->'", lineno, rcol)
                return
            u = self.multiset(left, lineno, rcol)
            v = self.multiset(right, lineno, rcol + len(left) + 3)
            if u is None or v is None:
                return
            if not u or not v:
                self.error("both sides of a swap rule must be non-empty", lineno, rcol)
                return
            rule = Rule.antiport(_collect(u), _collect(v), tag=tag)
            refs = [(s, lineno, c, n) for s, _, c, n in u + v]
        else:
            u = self.multiset(rest, lineno, rcol)
            if u is None:
                return
            if not u:
                self.error(f"{kind} rule needs a non-empty multiset", lineno, col)
                return
            rule = (Rule.out if kind == "out" else Rule.into)(_collect(u), tag=tag)
            refs = [(s, lineno, c, n) for s, _, c, n in u]
        self.rules.setdefault(h, []).append((rule, refs))

    def parse(self) -> None:
        current = None  # membrane whose rules block is open
        tag = ""
        for lineno, raw in enumerate(self.src.lines, 1):
            stripped = raw.strip()
            if not stripped:
                continue
            col = len(raw) - len(raw.lstrip())
            if stripped.startswith("#"):
                tagged = re.match(r"#\s*--\s*(\S+)\s*$", stripped)
                if tagged and current is not None:
                    tag = tagged.group(1)
                continue
            body = raw.split("#", 1)[0].rstrip()
            if not stripped.startswith("@"):
                if current is None:
                    self.error("rule outside a @rules block", lineno, col)
                else:
                    self.rule(current, body[col:], lineno, col, tag)
                continue
            directive, _, arg = body[col:].partition(" ")
            acol = col + len(directive) + 1 + (len(arg) - len(arg.lstrip()))
            arg = arg.strip()
            current = None
            name = directive[1:]
            self.spans.setdefault(name, self.src.span(lineno, col))
            if name == "system":
                self.name = arg
            elif name in self.lists:
                self.seen_lists.add(name)
                for term, tcol in _terms(arg, acol):
                    s = self.symbol(term, lineno, tcol)
                    if s is not None:
                        self.lists[name].append((s, lineno, tcol, len(term)))
            elif name == "structure":
                self.structure(arg, lineno, acol)
            elif name in ("init", "rules"):
                label_text, colon, rest = arg.partition(":")
                if not colon:
                    self.error(f"@{name} needs 'H:'", lineno, acol)
                    continue
                h = self.label(label_text, lineno, acol)
                if h is None:
                    continue
                if name == "rules":
                    if rest.strip():
                        self.error("rules go on the lines after '@rules H:'", lineno, acol + len(label_text) + 1)
                    current, tag = h, ""
                    self.rules.setdefault(h, [])
                else:
                    rcol = acol + len(label_text) + 1 + (len(rest) - len(rest.lstrip()))
                    terms = self.multiset(rest, lineno, rcol)
                    if terms is not None:
                        self.init.setdefault(h, []).extend((s, k, c, n, lineno) for s, k, c, n in terms)
            elif name == "input-membrane":
                h = self.label(arg, lineno, acol)
                if h is not None:
                    self.input_membrane = h
            elif name == "output":
                if arg == "env":
                    self.output = ENV
                else:
                    h = self.label(arg, lineno, acol)
                    if h is not None:
                        self.output = h
            else:
                self.error(f"unknown directive {directive!r}", lineno, col, len(directive))

    def build(self) -> RecognizerSystem:
        alphabet = {s for s, *_ in self.lists["alphabet"]}
        for key in ("env", "input-alphabet", "partition0", "partition1"):
            for s, lineno, col, length in self.lists[key]:
                if s not in alphabet:
                    self.error(f"{s} in @{key} is not in @alphabet", lineno, col, length)
        for h, terms in self.init.items():
            for s, _, col, length, lineno in terms:
                if s not in alphabet:
                    self.error(f"{s} in initial content of {h} is not in @alphabet", lineno, col, length)
        for h, rules in self.rules.items():
            for rule, refs in rules:
                for s, lineno, col, length in refs:
                    if s not in alphabet:
                        self.error(f"rule {rule} of membrane {h} uses {s}, which is not in @alphabet", lineno, col, length)
        if self.tree is None:
            self.error("missing @structure", 1)
        if self.name is None:
            self.error("missing @system", 1)
        if self.diags:
            raise ParseError(self.diags)
        partition0 = {s for s, *_ in self.lists["partition0"]} if "partition0" in self.seen_lists else None
        system = RecognizerSystem.build(
            self.name,
            alphabet,
            env={s for s, *_ in self.lists["env"]},
            input_alphabet={s for s, *_ in self.lists["input-alphabet"]},
            partition1={s for s, *_ in self.lists["partition1"]},
            partition0=partition0,
            tree=self.tree,
            initial={h: Multiset(_collect(terms)) for h, terms in self.init.items()},
            rules={h: [rule for rule, _ in rules] for h, rules in self.rules.items()},
            input_membrane=self.input_membrane,
            output=self.output,
        )
        unknown = (set(self.init) | set(self.rules)) - set(self.tree.parent)
        for h in sorted(unknown):
            self.error(f"membrane {h} is not in @structure", self.structure_line)
        for v in validate_system(system):
            self.diags.append(Diagnostic(str(v), self._span_for(v.code)))
        if self.diags:
            raise ParseError(self.diags)
        return system

    def _span_for(self, code: str) -> SourceSpan:
        key = {
            "bad-tree": "structure",
            "separation-on-skin": "rules",
            "separation-non-elementary": "rules",
            "bad-input-membrane": "input-membrane",
            "output-not-environment": "output",
            "partition-overlap": "partition1",
            "partition-cover": "partition0",
            "env-input-overlap": "env",
            "initial-input-symbol": "init",
            "missing-answer-object": "init",
        }.get(code, "system")
        return self.spans.get(key) or self.spans.get("system") or self.src.span(1)


def _collect(terms) -> dict[Symbol, int]:
    counts: dict[Symbol, int] = {}
    for s, mult, *_ in terms:
        counts[s] = counts.get(s, 0) + mult
    return counts


def parse_psystem(text: str) -> RecognizerSystem:
    """Parse a system definition; raises ParseError carrying spanned diagnostics."""
    parser = _Parser(text)
    parser.parse()
    return parser.build()


def _list_lines(directive: str, symbols) -> list[str]:
    ordered = sorted(symbols)
    return [f"@{directive} " + ", ".join(map(str, ordered[i:i + LIST_CHUNK]))
            for i in range(0, len(ordered), LIST_CHUNK)]


def serialize_psystem(system: RecognizerSystem) -> str:
    """Canonical text: fixed section order, sorted symbols, rules in rule order."""
    lines = [f"@system {system.name}"]
    lines += _list_lines("alphabet", system.alphabet)
    lines += _list_lines("env", system.env)
    lines += _list_lines("input-alphabet", system.input_alphabet)
    lines += _list_lines("partition0", system.partition0)
    lines += _list_lines("partition1", system.partition1)
    lines.append(f"@structure {system.tree.to_text()}")
    for h in system.tree.labels:
        content = system.initial.get(h)
        if content:
            lines.append(f"@init {h}: {format_multiset(content)}")
    for h in system.tree.labels:
        rules = system.rules.get(h, ())
        if not rules:
            continue
        lines.append(f"@rules {h}:")
        tag = ""
        for rule in rules:
            if rule.tag != tag:
                tag = rule.tag
                lines.append(f"# -- {tag}")
            lines.append(str(rule))
    lines.append(f"@input-membrane {system.input_membrane}")
    lines.append("@output env" if system.output == ENV else f"@output {system.output}")
    return "\n".join(lines) + "\n"


# -- DIMACS ------------------------------------------------------------------


def parse_dimacs(text: str) -> CNFFormula:
    src = _Source(text)
    diags: list[Diagnostic] = []
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    last_line = 1
    for lineno, raw in enumerate(src.lines, 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):  # end marker used by some benchmark sets
            break
        if stripped.startswith("p"):
            parts = stripped.split()
            if header is not None:
                diags.append(Diagnostic("second header line", src.span(lineno)))
            elif len(parts) != 4 or parts[1] != "cnf" or not parts[2].isdigit() or not parts[3].isdigit():
                diags.append(Diagnostic("header must read 'p cnf <vars> <clauses>'", src.span(lineno)))
            else:
                header = (int(parts[2]), int(parts[3]), lineno)
            continue
        if header is None:
            diags.append(Diagnostic("clause before the 'p cnf' header", src.span(lineno)))
            break
        for match in re.finditer(r"\S+", raw):
            tok = match.group()
            span = src.span(lineno, match.start(), len(tok))
            try:
                lit = int(tok)
            except ValueError:
                diags.append(Diagnostic(f"not an integer: {tok!r}", span))
                continue
            if lit == 0:
                if not current:
                    diags.append(Diagnostic("empty clause", span))
                clauses.append(current)
                current = []
            elif abs(lit) > header[0]:
                diags.append(Diagnostic(f"variable {abs(lit)} outside 1..{header[0]}", span))
            else:
                current.append(lit)
        last_line = lineno
    if current:
        clauses.append(current)  # tolerate a missing final 0
    if header is None and not diags:
        diags.append(Diagnostic("missing 'p cnf' header", src.span(1)))
    if header is not None and not diags and len(clauses) != header[1]:
        diags.append(Diagnostic(f"header announces {header[1]} clauses, found {len(clauses)}", src.span(header[2])))
    if not diags and not clauses:
        diags.append(Diagnostic("formula has no clauses", src.span(last_line)))
    if diags:
        raise ParseError(diags)
    return CNFFormula.from_ints(header[0], clauses)


def serialize_dimacs(phi: CNFFormula) -> str:
    lines = [f"p cnf {phi.n} {phi.m}"]
    lines += [" ".join(map(str, clause)) + " 0" for clause in phi.to_ints()]
    return "\n".join(lines) + "\n"

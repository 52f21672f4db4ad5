"""Maximal-parallel stepping, halting, protocol audit and traces."""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

from .model import ANTIPORT, ENV, IN, OUT, CompiledRule, Configuration, Instance, RecognizerSystem, initial_configuration
from .multiset import Multiset, Symbol

POLICIES = ("sep-first", "comm-first", "random")


class EngineError(RuntimeError):
    pass


class UnboundedApplication(EngineError):
    pass


class CapExceeded(EngineError):
    pass


class StepLimitExceeded(EngineError):
    pass


class NoAnswer(EngineError):
    pass


class BothAnswers(EngineError):
    pass


class MaximalityError(AssertionError):
    pass


@dataclass(frozen=True)
class StepPolicy:
    ordering: str = "sep-first"
    seed: int = 0
    cap: int | None = None
    check_maximality: bool = False

    def __post_init__(self):
        if self.ordering not in POLICIES:
            raise ValueError(f"unknown ordering {self.ordering!r}")

    @property
    def label(self) -> str:
        return f"random({self.seed})" if self.ordering == "random" else self.ordering


@dataclass(frozen=True)
class StepReport:
    step: int
    applied: tuple[tuple[int, int, int], ...] = ()
    separations: tuple[tuple[int, tuple[int, int]], ...] = ()
    env_delta: dict = field(default_factory=dict, compare=False)

    @property
    def empty(self) -> bool:
        return not self.applied and not self.separations

    def to_record(self) -> dict:
        return {
            "step": self.step,
            "applied": [{"m": m, "rule": r, "n": n} for m, r, n in self.applied],
            "sep": [{"parent": p, "children": list(c)} for p, c in self.separations],
            "env_delta": {str(s): c for s, c in sorted(self.env_delta.items())},
        }


@dataclass
class Trace:
    system: str
    reports: list[StepReport] = field(default_factory=list)
    snapshots: dict[int, Configuration] = field(default_factory=dict)
    halted: bool = False
    answer: str | None = None
    steps: int = 0
    start_step: int = 0

    def answer_events(self, yes: Symbol = Symbol("yes"), no: Symbol = Symbol("no")) -> list[tuple[int, str, int]]:
        events = []
        for rep in self.reports:
            for s, name in ((yes, "yes"), (no, "no")):
                c = rep.env_delta.get(s, 0)
                if c > 0:
                    events.append((rep.step, name, c))
        return events

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rep in self.reports:
                fh.write(json.dumps(rep.to_record()) + "\n")
            if self.halted:
                fh.write(json.dumps({"halted": True, "answer": self.answer, "steps": self.steps}) + "\n")


@dataclass(frozen=True)
class Verdict:
    answer: str | None
    steps: int
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.answer is not None and not self.violations


class _Step:
    """Mutable scratch state for one transition."""

    def __init__(self, cfg: Configuration, system: RecognizerSystem, policy: StepPolicy):
        self.cfg = cfg
        self.system = system
        self.policy = policy
        self.inst = {i.id: i for i in cfg.instances}
        self.pools = {i.id: dict(i.contents) for i in cfg.instances}
        self.env_pool = dict(cfg.env)
        self.inbox = {i.id: Counter() for i in cfg.instances}
        self.env_gain: Counter = Counter()
        self.env_taken: Counter = Counter()
        self.applied: Counter = Counter()
        self.locked: set[int] = set()
        self.seps: list[tuple[int, Symbol]] = []
        self.total = 0
        has_child = {i.parent for i in cfg.instances}
        self.elementary = {i.id for i in cfg.instances if i.id not in has_child}
        self.rng = random.Random(f"{policy.seed}:{cfg.step}") if policy.ordering == "random" else None

    def parent_pool(self, inst: Instance) -> dict:
        return self.env_pool if inst.parent == ENV else self.pools[inst.parent]

    def capacity(self, inst: Instance, cr: CompiledRule) -> int:
        pool = self.pools[inst.id]
        best = math.inf
        for s, c in cr.inner:
            best = min(best, pool.get(s, 0) // c)
            if not best:
                return 0
        env_side = inst.parent == ENV
        outer_pool = self.parent_pool(inst)
        for s, c in cr.outer:
            if env_side and s in self.system.env:
                continue
            best = min(best, outer_pool.get(s, 0) // c)
            if not best:
                return 0
        if best == math.inf:
            raise UnboundedApplication(f"rule {cr.rule} of membrane {cr.label} draws only on the unlimited supply")
        return best

    def apply(self, inst: Instance, cr: CompiledRule, n: int) -> None:
        if n <= 0:
            return
        if self.policy.cap is not None and self.total + n > self.policy.cap:
            raise CapExceeded(f"step {self.cfg.step + 1}: more than {self.policy.cap} rule applications")
        self.total += n
        pool = self.pools[inst.id]
        for s, c in cr.inner:
            pool[s] -= c * n
        env_side = inst.parent == ENV
        outer_pool = self.parent_pool(inst)
        for s, c in cr.outer:
            if env_side and s in self.system.env:
                continue
            outer_pool[s] -= c * n
            if env_side:
                self.env_taken[s] += c * n
        rule = cr.rule
        if rule.kind in (OUT, ANTIPORT):
            target = self.env_gain if env_side else self.inbox[inst.parent]
            for s, c in rule.u.items():
                target[s] += c * n
        incoming = rule.v if rule.kind == ANTIPORT else rule.u if rule.kind == IN else None
        if incoming is not None:
            box = self.inbox[inst.id]
            for s, c in incoming.items():
                box[s] += c * n
        self.applied[(inst.id, cr.rid)] += n

    def candidates(self, inst: Instance) -> list[CompiledRule]:
        index = self.system.rule_index.get(inst.label, {})
        found = []
        for s, c in self.pools[inst.id].items():
            if c > 0 and s in index:
                found.extend(index[s])
        found.extend(self.system.in_rules.get(inst.label, ()))
        found.sort(key=lambda cr: cr.rid)
        if self.rng is not None:
            self.rng.shuffle(found)
        return found

    def try_separate(self, inst: Instance) -> bool:
        if inst.id in self.locked or inst.id not in self.elementary:
            return False
        rules = list(self.system.sep_rules.get(inst.label, ()))
        if self.rng is not None:
            self.rng.shuffle(rules)
        pool = self.pools[inst.id]
        for cr in rules:
            if pool.get(cr.rule.trigger, 0) > 0:
                pool[cr.rule.trigger] -= 1
                self.locked.add(inst.id)
                self.seps.append((inst.id, cr.rule.trigger))
                self.applied[(inst.id, cr.rid)] += 1
                return True
        return False

    def saturate(self, inst: Instance) -> None:
        for cr in self.candidates(inst):
            self.apply(inst, cr, self.capacity(inst, cr))

    def partial(self, inst: Instance) -> None:
        for cr in self.candidates(inst):
            n = self.capacity(inst, cr)
            if n:
                self.apply(inst, cr, self.rng.randint(0, n))


def apply_step(cfg: Configuration, system: RecognizerSystem, policy: StepPolicy = StepPolicy()) -> tuple[Configuration, StepReport]:
    st = _Step(cfg, system, policy)
    order = sorted(st.inst)
    if st.rng is not None:
        st.rng.shuffle(order)
    if policy.ordering == "sep-first":
        sep_early = set(order)
    elif policy.ordering == "comm-first":
        sep_early = set()
    else:
        sep_early = {iid for iid in order if st.rng.random() < 0.5}
    for iid in order:
        if iid in sep_early:
            st.try_separate(st.inst[iid])
    active = [iid for iid in order if iid not in st.locked]
    if st.rng is not None:
        for iid in active:
            st.partial(st.inst[iid])
        st.rng.shuffle(active)
    for iid in active:
        st.saturate(st.inst[iid])
    touched = {m for m, _ in st.applied}
    for iid in order:
        if iid not in sep_early and iid not in touched:
            st.try_separate(st.inst[iid])
    if policy.check_maximality:
        _check_maximal(st)
    return _commit(st)


def _check_maximal(st: _Step) -> None:
    for iid, inst in st.inst.items():
        if iid in st.locked:
            continue
        for cr in st.system.compiled.get(inst.label, ()):
            if cr.rule.kind == "sep":
                continue
            if st.capacity(inst, cr):
                raise MaximalityError(f"rule {cr.rid} still enabled in instance {iid}")


def _commit(st: _Step) -> tuple[Configuration, StepReport]:
    system = st.system
    next_id = st.cfg.next_id
    instances = []
    separations = []
    sep_of = dict(st.seps)
    for inst in st.cfg.instances:
        content = Counter({s: c for s, c in st.pools[inst.id].items() if c})
        content.update(st.inbox[inst.id])
        if inst.id in sep_of:
            left = {s: c for s, c in content.items() if s in system.partition0}
            right = {s: c for s, c in content.items() if s not in system.partition0}
            a, b = next_id, next_id + 1
            next_id += 2
            instances.append(Instance(a, inst.label, inst.parent, Multiset(left)))
            instances.append(Instance(b, inst.label, inst.parent, Multiset(right)))
            separations.append((inst.id, (a, b)))
        else:
            instances.append(Instance(inst.id, inst.label, inst.parent, Multiset(content)))
    if separations:
        # children of a separated membrane cannot exist (it was elementary), so parents are stable
        instances.sort(key=lambda i: i.id)
    env = Counter({s: c for s, c in st.env_pool.items() if c})
    env.update(st.env_gain)
    delta = Counter(st.env_gain)
    delta.subtract(st.env_taken)
    report = StepReport(
        st.cfg.step + 1,
        tuple((m, r, n) for (m, r), n in sorted(st.applied.items())),
        tuple(separations),
        {s: c for s, c in delta.items() if c},
    )
    if report.empty:
        return st.cfg, report
    return Configuration(tuple(instances), Multiset(env), st.cfg.step + 1), report


def run(system: RecognizerSystem, cfg: Configuration, policy: StepPolicy = StepPolicy(), max_steps: int = 10_000,
        snapshot_every: int | None = None, observer: Callable[[Configuration], None] | None = None,
        keep_reports: bool = True, stop_at: int | None = None) -> tuple[Configuration, Trace]:
    """Step from ``cfg`` until no rule applies; ``max_steps`` bounds the step counter.

    ``stop_at`` ends the run early (without marking it halted) once the step
    counter reaches that value.
    """
    trace = Trace(system.name, start_step=cfg.step)
    if snapshot_every:
        trace.snapshots[cfg.step] = cfg
    if observer:
        observer(cfg)
    while True:
        if stop_at is not None and cfg.step >= stop_at:
            trace.steps = cfg.step
            return cfg, trace
        nxt, rep = apply_step(cfg, system, policy)
        if rep.empty:
            break
        if cfg.step >= max_steps:
            raise StepLimitExceeded(f"still running after {max_steps} steps")
        cfg = nxt
        if keep_reports:
            trace.reports.append(rep)
        else:
            trace.reports.append(StepReport(rep.step, env_delta={s: c for s, c in rep.env_delta.items()
                                                                 if s in (system.yes, system.no)}))
        if snapshot_every and cfg.step % snapshot_every == 0:
            trace.snapshots[cfg.step] = cfg
        if observer:
            observer(cfg)
    trace.halted = True
    trace.steps = cfg.step
    env = cfg.env
    has_yes, has_no = env[system.yes] > 0, env[system.no] > 0
    if has_yes != has_no:
        trace.answer = "yes" if has_yes else "no"
    return cfg, trace


def run_to_halt(system: RecognizerSystem, input_ms=None, policy: StepPolicy = StepPolicy(), max_steps: int = 10_000,
                start: Configuration | None = None, require_answer: bool = True,
                snapshot_every: int | None = None, observer=None) -> tuple[Verdict, Trace]:
    cfg = start if start is not None else initial_configuration(system, input_ms)
    final, trace = run(system, cfg, policy, max_steps, snapshot_every, observer)
    if not require_answer:
        return Verdict(trace.answer, trace.steps), trace
    env = final.env
    if env[system.yes] and env[system.no]:
        raise BothAnswers(f"both answers in the environment after {trace.steps} steps")
    if not env[system.yes] and not env[system.no]:
        raise NoAnswer(f"no answer in the environment after {trace.steps} steps")
    violations = audit_recognizer_trace(trace, system.yes, system.no)
    return Verdict(trace.answer, trace.steps, tuple(violations)), trace


def audit_recognizer_trace(trace: Trace, yes: Symbol = Symbol("yes"), no: Symbol = Symbol("no")) -> list[str]:
    out = []
    events = trace.answer_events(yes, no)
    total = sum(c for _, _, c in events)
    if not trace.halted:
        out.append("not-halted")
    if total == 0:
        out.append("no-answer")
    elif total > 1:
        out.append(f"multiple-answers: {events}")
    final = trace.steps if trace.halted else None
    for step, name, _ in events:
        if final is None or step != final:
            out.append(f"early-answer: {name} at step {step} of {final}")
    return out


@dataclass
class ConfluenceReport:
    runs: list[tuple[str, str | None, int]]

    @property
    def agree(self) -> bool:
        return len({(a, s) for _, a, s in self.runs}) <= 1

    def summary(self) -> str:
        lines = [f"{label}: {answer} at step {steps}" for label, answer, steps in self.runs]
        lines.append("agree" if self.agree else "DISAGREE")
        return "\n".join(lines)


def check_confluence(system: RecognizerSystem, input_ms=None, seeds: Iterable[int] = (), max_steps: int = 10_000,
                     start: Configuration | None = None) -> ConfluenceReport:
    policies = [StepPolicy("sep-first"), StepPolicy("comm-first")]
    policies += [StepPolicy("random", seed=s) for s in seeds]
    runs = []
    for pol in policies:
        verdict, _ = run_to_halt(system, input_ms, pol, max_steps, start=start, require_answer=False)
        runs.append((pol.label, verdict.answer, verdict.steps))
    return ConfluenceReport(runs)

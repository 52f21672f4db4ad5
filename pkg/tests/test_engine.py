import json

import pytest

from psys.engine import (
    BothAnswers,
    CapExceeded,
    StepLimitExceeded,
    StepPolicy,
    UnboundedApplication,
    apply_step,
    audit_recognizer_trace,
    check_confluence,
    run,
    run_to_halt,
)
from psys.model import MembraneTree, RecognizerSystem, Rule, initial_configuration
from psys.multiset import Multiset, sym

from cases import WORKED, solve

a, b, c, s, t = (sym(x) for x in "abcst")
yes, no = sym("yes"), sym("no")
ALPHA = {a, b, c, s, t, yes, no}


def system(skin_rules=(), inner_rules=None, skin=(), inner=(), env=(), partition1=()):
    tree = MembraneTree.nested(2) if inner_rules is not None else MembraneTree({1: None})
    initial = {1: Multiset(list(skin) + [yes, no])}
    rules = {1: list(skin_rules)}
    if inner_rules is not None:
        initial[2] = Multiset(list(inner))
        rules[2] = list(inner_rules)
    return RecognizerSystem.build("toy", ALPHA, env=env, tree=tree, initial=initial, rules=rules,
                                  partition1=partition1)


def go(sys_, policy=StepPolicy(), max_steps=100):
    return run(sys_, initial_configuration(sys_), policy, max_steps)


def test_symport_out_is_maximal():
    cfg, trace = go(system([Rule.out([a])], skin=[a, a, a]))
    assert trace.halted and trace.steps == 1
    assert cfg.env[a] == 3
    assert cfg.by_id(1).contents[a] == 0


def test_antiport_draws_on_environment_supply():
    cfg, trace = go(system([Rule.antiport([a], [b])], skin=[a, a], env={b}))
    assert trace.steps == 1
    assert cfg.by_id(1).contents[b] == 2
    assert cfg.env[a] == 2


def test_rule_fed_only_by_supply_is_rejected():
    with pytest.raises(UnboundedApplication):
        go(system([Rule.into([b])], env={b}))


def test_separation_splits_by_partition():
    sys_ = system(inner_rules=[Rule.separation(s)], inner=[a, s, t, t], partition1={t})
    cfg, trace = go(sys_)
    assert trace.steps == 1
    kids = cfg.with_label(2)
    assert [dict(k.contents) for k in kids] == [{a: 1}, {t: 2}]
    assert all(k.parent == 1 for k in kids)
    assert trace.reports[0].separations == ((2, (3, 4)),)


@pytest.mark.parametrize("ordering", ["sep-first", "comm-first"])
def test_separating_membrane_does_nothing_else(ordering):
    sys_ = system(inner_rules=[Rule.separation(s), Rule.out([a])], inner=[a, s])
    cfg, trace = go(sys_, StepPolicy(ordering))
    assert trace.steps == 2
    first = trace.reports[0]
    if ordering == "sep-first":
        assert first.separations and not first.applied[1:]
    else:
        assert not first.separations


def test_cap():
    with pytest.raises(CapExceeded):
        go(system([Rule.out([a])], skin=[a, a, a]), StepPolicy(cap=2))


def test_step_limit():
    looping = system([Rule.antiport([a], [b]), Rule.antiport([b], [a])], skin=[a], env={a, b})
    with pytest.raises(StepLimitExceeded):
        go(looping, max_steps=5)


def test_noncommunicating_step_leaves_configuration():
    sys_ = system(skin=[a])
    cfg = initial_configuration(sys_)
    nxt, report = apply_step(cfg, sys_)
    assert report.empty and nxt is cfg


def test_competing_rules_are_not_confluent():
    racing = system([Rule.out([a, yes]), Rule.out([a, no])], skin=[a])
    report = check_confluence(racing, seeds=range(20))
    assert not report.agree
    assert {ans for _, ans, _ in report.runs} == {"yes", "no"}


def test_audit_flags_early_answer():
    sys_ = system([Rule.out([yes]), Rule.out([c])], inner_rules=[Rule.out([c])], inner=[c])
    _, trace = go(sys_)
    assert trace.steps == 2
    assert any(v.startswith("early-answer") for v in audit_recognizer_trace(trace))


def test_audit_flags_two_answers():
    sys_ = system([Rule.out([yes]), Rule.out([no])])
    verdict, trace = run_to_halt(sys_, require_answer=False)
    assert verdict.answer is None
    assert any(v.startswith("multiple-answers") for v in audit_recognizer_trace(trace))
    with pytest.raises(BothAnswers):
        run_to_halt(sys_)


def test_audit_flags_silence():
    _, trace = go(system(skin=[a]))
    assert audit_recognizer_trace(trace) == ["no-answer"]


def test_family_steps_are_maximal():
    _, verdict, _ = solve(WORKED.phi, policy=StepPolicy(check_maximality=True))
    assert verdict.answer == "yes"
    _, verdict, _ = solve(WORKED.phi, policy=StepPolicy("random", seed=4, check_maximality=True))
    assert verdict.answer == "yes"


def test_random_policy_is_reproducible():
    _, _, one = solve(WORKED.phi, policy=StepPolicy("random", seed=9))
    _, _, two = solve(WORKED.phi, policy=StepPolicy("random", seed=9))
    assert [r.to_record() for r in one.reports] == [r.to_record() for r in two.reports]


def test_trace_jsonl(tmp_path):
    _, verdict, trace = solve(WORKED.phi)
    path = tmp_path / "trace.jsonl"
    trace.write_jsonl(path)
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert records[-1] == {"halted": True, "answer": "yes", "steps": verdict.steps}
    assert records[-2]["step"] == verdict.steps
    assert records[-2]["env_delta"].get("yes") == 1

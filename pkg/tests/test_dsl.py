import pytest
from hypothesis import given
from hypothesis import strategies as st

from psys.cnf import CNFFormula
from psys.dsl import ParseError, parse_dimacs, parse_psystem, serialize_dimacs, serialize_psystem
from psys.model import ENV
from psys.multiset import sym

from cases import DATA, WORKED, family

MINIMAL = """\
@system tiny
@alphabet a, yes, no
@structure [1]
@init 1: yes, no, a*2
@rules 1:
out: a   # trailing comment
@input-membrane 1
@output env
"""


def test_minimal_system():
    system = parse_psystem(MINIMAL)
    assert system.tree.labels == [1]
    assert len(system.rules[1]) == 1
    assert system.initial[1][sym("a")] == 2
    assert system.output == ENV


def test_lists_accumulate():
    text = MINIMAL.replace("@alphabet a, yes, no", "@alphabet a\n@alphabet yes, no")
    assert parse_psystem(text).structurally_equal(parse_psystem(MINIMAL))


def diagnostics(text):
    with pytest.raises(ParseError) as info:
        parse_psystem(text)
    return info.value.diagnostics


def test_unknown_symbol_points_at_it():
    text = MINIMAL.replace("out: a", "swap: a <-> b*2")
    [diag] = diagnostics(text)
    raw = text.encode()
    assert raw[diag.span.start:diag.span.end] == b"b*2"
    assert diag.span.line == 6
    assert "not in @alphabet" in diag.message


@pytest.mark.parametrize("broken", [
    MINIMAL.replace("out: a", "push: a"),
    MINIMAL.replace("@structure [1]", "@structure [1 [2]"),
    MINIMAL.replace("@structure [1]", "@structure [[1]]"),
    MINIMAL.replace("a*2", "a*0"),
    MINIMAL.replace("@rules 1:", "@rules 1: out: a"),
    MINIMAL.replace("@system tiny", "@sistem tiny"),
    MINIMAL.replace("@rules 1:", "@rules 1:\nsep: a"),
    MINIMAL.replace("@init 1: yes, no, a*2", "@init 1: a"),
    "out: a\n",
    "",
])
def test_diagnostics_stay_inside_input(broken):
    size = len(broken.encode())
    found = diagnostics(broken)
    assert found
    for diag in found:
        assert 0 <= diag.span.start <= diag.span.end <= size
        assert diag.span.line >= 1


def test_structure_nesting():
    text = MINIMAL.replace("@structure [1]", "@structure [1 [2 [4]] [3]]")
    tree = parse_psystem(text).tree
    assert dict(tree.parent) == {1: None, 2: 1, 4: 2, 3: 1}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("mode", ["inject", "full"])
def test_family_round_trip(n, m, mode):
    system = family(n, m, mode)
    text = serialize_psystem(system)
    back = parse_psystem(text)
    assert back.structurally_equal(system)
    assert serialize_psystem(back) == text
    assert [r.tag for _, r in back.all_rules()] == [r.tag for _, r in system.all_rules()]


def test_separation_lines_only_in_membrane_two():
    text = serialize_psystem(family(1, 1, "full"))
    block = None
    for line in text.splitlines():
        if line.startswith("@rules"):
            block = line
        elif line.startswith("@"):
            block = None
        elif line.startswith("sep:"):
            assert block == "@rules 2:"
    assert "sep:" in text
    assert "sep:" not in serialize_psystem(family(1, 1, "inject"))


def test_dimacs_examples():
    assert parse_dimacs("p cnf 3 3\n1 2 -3 0\n1 -2 3 0\n-1 2 3 0\n") == WORKED.phi
    assert parse_dimacs("p cnf 1 1\n1 0\n") == CNFFormula.from_ints(1, [[1]])
    assert parse_dimacs((DATA / "example.cnf").read_text()) == WORKED.phi


@pytest.mark.parametrize("bad", [
    "p cnf 3 1\n1 4 0\n",
    "p cnf 2 2\n1 0\n",
    "p cnf 2 2\n1 0\n0\n",
    "1 2 0\n",
    "p dnf 2 1\n1 0\n",
    "p cnf 2 1\n1 x 0\n",
])
def test_dimacs_errors(bad):
    with pytest.raises(ParseError) as info:
        parse_dimacs(bad)
    for diag in info.value.diagnostics:
        assert diag.span.end <= len(bad.encode())


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(
    st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=4),
    min_size=1, max_size=6))))
def test_dimacs_round_trip(case):
    n, clauses = case
    phi = CNFFormula.from_ints(n, clauses)
    assert parse_dimacs(serialize_dimacs(phi)) == phi

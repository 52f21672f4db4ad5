import pytest
from hypothesis import given
from hypothesis import strategies as st

from psys.multiset import (
    EMPTY,
    MAX_COUNT,
    Multiset,
    MultiplicityOverflow,
    MultisetUnderflow,
    Symbol,
    format_multiset,
    ms_leq,
    ms_sub,
    ms_sum,
    parse_multiset,
    sym,
)

symbols = st.builds(lambda name, idx: sym(name, *idx),
                    st.sampled_from(["a", "b", "xi", "omega1", "lLam"]),
                    st.lists(st.integers(0, 12), max_size=3))
multisets = st.dictionaries(symbols, st.integers(1, 50), max_size=6).map(Multiset)


def test_symbol_text_form():
    assert str(sym("xi", 1, 0)) == "xi[1,0]"
    assert str(sym("yes")) == "yes"
    assert Symbol.parse(" xi[ 1, 0 ] ") == sym("xi", 1, 0)


def test_symbols_are_interned():
    assert sym("a", 1) is sym("a", 1)
    assert Symbol.parse("a[1]") is sym("a", 1)
    assert Symbol("a", (1,)) == sym("a", 1)
    assert hash(Symbol("a", (1,))) == hash(sym("a", 1))


def test_malformed_symbol():
    with pytest.raises(ValueError):
        Symbol.parse("a[1")


def test_symbol_order_is_name_then_indices():
    assert sorted([sym("b"), sym("a", 2), sym("a", 1, 5)]) == [sym("a", 1, 5), sym("a", 2), sym("b")]


def test_absent_multiplicity_is_zero():
    ms = Multiset([sym("a"), sym("a")])
    assert ms[sym("a")] == 2
    assert ms[sym("b")] == 0
    assert ms.size == 2


def test_underflow():
    with pytest.raises(MultisetUnderflow):
        ms_sub(Multiset([sym("a")]), Multiset({sym("a"): 2}))


def test_overflow():
    big = Multiset({sym("a"): MAX_COUNT})
    with pytest.raises(MultiplicityOverflow):
        ms_sum(big, Multiset([sym("a")]))


def test_format_is_sorted_with_counts():
    ms = Multiset({sym("b"): 1, sym("a", 2): 3})
    assert format_multiset(ms) == "a[2]*3, b"


@given(multisets, multisets)
def test_sum_commutes(a, b):
    assert a + b == b + a


@given(multisets, multisets, multisets)
def test_sum_associates(a, b, c):
    assert (a + b) + c == a + (b + c)


@given(multisets, multisets)
def test_sub_undoes_sum(a, b):
    assert (a + b) - b == a


@given(multisets, multisets)
def test_leq_matches_sub(a, b):
    if ms_leq(a, b):
        assert ms_sub(b, a).size == b.size - a.size
    else:
        with pytest.raises(MultisetUnderflow):
            ms_sub(b, a)


@given(multisets)
def test_text_round_trip(ms):
    assert parse_multiset(format_multiset(ms)) == ms


@given(multisets)
def test_equal_multisets_hash_equal(ms):
    assert hash(Multiset(dict(ms.items()))) == hash(ms)


def test_empty():
    assert not EMPTY
    assert EMPTY.size == 0
    assert parse_multiset("") == EMPTY

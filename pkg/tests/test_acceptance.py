"""Acceptance criteria; each test records a PASS/FAIL line shown in the terminal summary."""

import pytest

import acceptance

RESULTS: list[str] = []


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA), ids=lambda k: f"criterion{k}")
def test_criterion(number):
    _, fn = acceptance.CRITERIA[number]
    ok, detail = fn()
    text = acceptance.line(number, ok, detail)
    RESULTS.append(text)
    print(text)
    assert ok, text

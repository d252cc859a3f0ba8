"""Criteria 1-9 with exact equality and their runtime budgets."""

import pytest

from poissonlr.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    r = run_criterion(number)
    print(r.line())
    assert r.ok, r.detail
    assert r.seconds < r.budget, f"{r.seconds:.1f}s over the {r.budget}s budget"

"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import pytest

from brentlab.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, len(CRITERIA) + 1)])
def test_criterion(criterion, ctx):
    result = criterion(ctx)
    print(result.line())
    assert result.passed, result.line()

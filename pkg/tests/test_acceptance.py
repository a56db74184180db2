"""Every acceptance criterion at its stated tolerance, one pass/fail line each."""

import pytest

from pfext.acceptance import CRITERIA, CorpusData, run_criterion


@pytest.fixture(scope="module")
def data():
    return CorpusData()


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, data, capsys):
    res = run_criterion(number, data)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail

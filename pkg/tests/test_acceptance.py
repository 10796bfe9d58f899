"""Acceptance criteria 1-16, each run exactly (no tolerances).

Every criterion prints one ``[PASS]``/``[FAIL]`` line, even under pytest's
output capture. ``python tests/test_acceptance.py`` runs the same suite as a
script and prints only those lines.
"""
import sys

import pytest

from magnus import checks

NUMBERS = [n for n, _, _ in checks.CHECKS]
_results: dict[int, checks.CheckResult] = {}


@pytest.mark.parametrize("number", NUMBERS, ids=[f"criterion_{n:02d}" for n in NUMBERS])
def test_criterion(number, capsys):
    result = checks.run_check(number)
    _results[number] = result
    with capsys.disabled():
        print(f"\n{result.line()}")
    assert result.status == "pass", result.message


def test_summary(capsys):
    missing = [n for n in NUMBERS if n not in _results]
    for n in missing:
        _results[n] = checks.run_check(n)
    with capsys.disabled():
        print()
        for n in NUMBERS:
            print(_results[n].line())
    assert [n for n in NUMBERS if _results[n].status != "pass"] == []
    assert len(NUMBERS) == 16


if __name__ == "__main__":
    results = checks.run_all()
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.status == "pass" for r in results) else 1)

"""Acceptance criteria, one test each. Every test prints its PASS/FAIL line
(uncaptured) before asserting, so `pytest -v` output doubles as the report.

Run standalone with `python3 tests/test_acceptance.py`.
"""

import pytest

from nonrad import suites

CHECKS = [
    suites.check_isometry,
    suites.check_anchors,
    suites.check_roundtrip,
    suites.check_ground_state,
    suites.check_cross_validation,
    suites.check_first_order,
    suites.check_second_order,
    suites.check_translation,
    suites.check_uniqueness,
    suites.check_symmetry,
    suites.check_overlap,
]


@pytest.mark.slow
@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i:02d}_{c.__name__[6:]}" for i, c in enumerate(CHECKS, 1)])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    bad = 0
    for c in CHECKS:
        r = c()
        print(r.line(), flush=True)
        bad += not r.passed
    raise SystemExit(1 if bad else 0)

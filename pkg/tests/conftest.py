"""Shared fixtures and the acceptance-criterion summary printed at the end of a run."""
from __future__ import annotations

import pytest

from ssexpand.zoo import toric_code

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    _CRITERIA[number] = (passed, detail)
    print(f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'} -- {detail}")


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'} -- {detail}")


@pytest.fixture(scope="session")
def toric3():
    return toric_code(3)


@pytest.fixture(scope="session")
def toric4():
    return toric_code(4)


@pytest.fixture(scope="session")
def toric5():
    return toric_code(5)

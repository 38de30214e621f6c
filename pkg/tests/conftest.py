"""Shared fixtures: the bundled case study is solved once per session."""

from __future__ import annotations

import time

import pytest

from artifact import study
from artifact.config import bundled_case_study

ACCEPTANCE_LINES: list[str] = []
_START = [0.0]


def record(line: str) -> None:
    """Queue one acceptance verdict for the terminal summary."""
    ACCEPTANCE_LINES.append(line)


def pytest_sessionstart(session):
    _START[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
        terminalreporter.write_line(f"suite wall time {time.perf_counter() - _START[0]:.1f} s (budget 300 s)")


@pytest.fixture(scope="session")
def case():
    return bundled_case_study()


@pytest.fixture(scope="session")
def fiber(case):
    return case.fiber


@pytest.fixture(scope="session")
def atom(case):
    return case.atom


@pytest.fixture(scope="session")
def fields(case):
    return study.build_fields(case)


@pytest.fixture(scope="session")
def sites(case, fields):
    return study.find_sites(case, fields)


@pytest.fixture(scope="session")
def trap(sites):
    return sites[0][1]


@pytest.fixture(scope="session")
def coupling_table(case, sites, fields):
    return study.coupling_table(case, sites, fields)


@pytest.fixture(scope="session")
def heating_report(case, trap, fields):
    return study.heating_report(case, trap, fields)

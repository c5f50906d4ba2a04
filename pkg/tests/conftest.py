from __future__ import annotations

import pytest

from splitsched.config import load_backends
from splitsched.domain import BackendProfile, JobSpec, ScheduleStrategy, Single, Split

ACCEPTANCE_LOG: list[str] = []


@pytest.fixture
def scored_backends() -> list[BackendProfile]:
    """Three backends with the hand-friendly scores 0.7 < 0.8 < 0.9."""
    return [
        BackendProfile(0, "B1", 3.38e-4, 3.12e-2, 2.35e-2, score=0.7),
        BackendProfile(1, "B2", 3.20e-4, 1.20e-2, 1.20e-2, score=0.8),
        BackendProfile(2, "B3", 3.00e-4, 2.12e-3, 5.10e-3, score=0.9),
    ]


@pytest.fixture
def default_backends() -> list[BackendProfile]:
    return load_backends()


@pytest.fixture
def five_jobs() -> list[JobSpec]:
    return [JobSpec(i, 150, -1.86) for i in range(5)]


@pytest.fixture
def fig5_strategy() -> ScheduleStrategy:
    return ScheduleStrategy((Split(1, 2), Split(0, 1), Single(2), Split(1, 2), Split(0, 1)), 0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)

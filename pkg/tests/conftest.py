from __future__ import annotations

import pytest
from helpers import load_fixture_doc

from odin import Document

ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def walkthrough_doc() -> Document:
    return load_fixture_doc("walkthrough")


@pytest.fixture
def marriage_doc() -> Document:
    return load_fixture_doc("marriage")


@pytest.fixture
def acceptance_report(request):
    """Record a one-line PASS/FAIL verdict; all verdicts are echoed after the run."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(criterion: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" ({detail})" if detail else "")
        print(line)
        lines.append(line)
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

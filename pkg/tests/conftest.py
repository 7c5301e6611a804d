"""Shared test configuration: slow-test marker and the acceptance summary."""

import pytest

ACCEPTANCE_RESULTS = []  # (criterion number, label, passed, detail)


def record_criterion(number: int, label: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((number, label, passed, detail))


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: full-budget acceptance runs (minutes each)"
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} [{status}] {label}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)

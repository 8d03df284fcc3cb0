"""Shared pytest config: per-criterion summary for the acceptance suite.

Tests in test_acceptance.py are named test_cNN_<label>; after the run a
one-line PASS/FAIL verdict is printed for each criterion number.
"""

import re

_ACCEPTANCE = {}

_PATTERN = re.compile(r"test_acceptance\.py::test_c(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    num, label = int(m.group(1)), m.group(2)
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _ACCEPTANCE.get(num)
        outcome = report.outcome
        if prev is not None and prev[1] == "failed":
            outcome = "failed"
        _ACCEPTANCE[num] = (label, outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        label, outcome = _ACCEPTANCE[num]
        status = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(
            f"criterion {num:2d}  {label.replace('_', ' '):<44s} {status}")

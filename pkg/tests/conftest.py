"""Shared pytest hooks: one PASS/FAIL summary line per acceptance criterion."""

import re

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")

_descriptions: dict[int, str] = {}
_results: dict[int, str] = {}


def pytest_itemcollected(item):
    match = _CRITERION_RE.search(item.nodeid)
    if match and item.obj.__doc__:
        _descriptions[int(match.group(1))] = item.obj.__doc__.strip().splitlines()[0]


def pytest_runtest_logreport(report):
    match = _CRITERION_RE.search(report.nodeid)
    if not match:
        return
    num = int(match.group(1))
    if report.when == "call":
        _results[num] = report.outcome
    elif report.outcome != "passed" and _results.get(num) != "failed":
        # setup/teardown errors and skips also mean the criterion did not pass
        _results[num] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_results):
        verdict = "PASS" if _results[num] == "passed" else "FAIL"
        desc = _descriptions.get(num, "")
        terminalreporter.write_line(f"ACCEPTANCE {num}: {verdict} - {desc}")

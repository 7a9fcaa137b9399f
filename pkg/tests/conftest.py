"""Per-criterion pass/fail summary for the acceptance suite.

Acceptance tests are named ``test_cNN_*``; a criterion passes only when every
test carrying its number passes. Tests may attach a ``detail`` property with
the measured values.
"""

import re
import sys
from collections import OrderedDict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d\d)_")
_results: "OrderedDict[int, list]" = OrderedDict()


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        name = report.nodeid.split("::", 1)[1]
        _results.setdefault(int(m.group(1)), []).append((name, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_results):
        entries = _results[num]
        ok = all(p for _, p, _ in entries)
        tr.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}")
        for name, passed, detail in entries:
            tr.write_line(f"    {'pass' if passed else 'FAIL'}  {name}  {detail}")

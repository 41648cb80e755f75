import re
import time

import pytest

from kolmolab import complexity

SESSION_START = time.time()
BUILT_TABLES = []
CRITERIA = []  # (label, line)

_orig_init = complexity.ComplexityTable.__init__


def _recording_init(self, key, entries):
    _orig_init(self, key, entries)
    if type(self) is complexity.ComplexityTable:
        BUILT_TABLES.append(self)


complexity.ComplexityTable.__init__ = _recording_init


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so it can audit every table the suite built
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py"))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")

    def order(item):
        num = re.match(r"\d+", item[0])
        return int(num.group()), item[0]

    for _, line in sorted(CRITERIA, key=order):
        terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip()
        CRITERIA.append((label, line))
        print(line)
        return ok
    return record

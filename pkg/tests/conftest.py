import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from acceptance_record import RESULTS  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        ok, title, detail = RESULTS[key]
        terminalreporter.write_line(f"ACCEPTANCE {key} {'PASS' if ok else 'FAIL'} {title}: {detail}")

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import criteria  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not criteria.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(criteria.RESULTS):
        ok, detail = criteria.RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")

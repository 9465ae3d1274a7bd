import pytest

from uavcoal.scenario import paper_baseline


@pytest.fixture(scope="session")
def baseline():
    return paper_baseline()


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_RESULTS
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0][1:])):
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")

from pathlib import Path

import pytest

from fluidscore import flow
from fluidscore.ingest import load_score

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "fluidscore" / "fixtures"
OPENING = FIXTURES / "opening_mm1-5.fsc"
TRANSITION = FIXTURES / "transition_mm25-27.fsc"
TURBULENT = FIXTURES / "turbulent_mm51-54.fsc"
RETURN = FIXTURES / "return_mm62-64.fsc"
EXCERPT_FIXTURES = (OPENING, TRANSITION, TURBULENT)


@pytest.fixture(scope="session")
def opening():
    return flow.analyze(load_score(OPENING))


@pytest.fixture(scope="session")
def transition():
    return flow.analyze(load_score(TRANSITION))


@pytest.fixture(scope="session")
def turbulent():
    return flow.analyze(load_score(TURBULENT))


@pytest.fixture(scope="session")
def returning():
    return flow.analyze(load_score(RETURN))


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")

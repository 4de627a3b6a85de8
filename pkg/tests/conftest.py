import numpy as np
import pytest

from oamsim.fieldgrid import make_grid
from oamsim.lgmodes import BeamParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def beam():
    return BeamParams(waist=0.2)


@pytest.fixture(scope="session")
def grid(beam):
    return make_grid(256, 8 * beam.waist)


@pytest.fixture(scope="session")
def small_grid(beam):
    return make_grid(128, 8 * beam.waist)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(criterion: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

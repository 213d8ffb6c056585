import numpy as np
import pytest

from toricasd.joyce import SeedPipeline
from toricasd.series import ParitySeries


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pipeline_z():
    return SeedPipeline.from_phi1(ParitySeries.odd([1.0]), 80)


@pytest.fixture(scope="session")
def pipeline_3z():
    return SeedPipeline.from_phi1(ParitySeries.odd([3.0]), 80)


GRID = [(float(x), float(y)) for y in np.linspace(1.5, 2.5, 5) for x in np.linspace(-0.3, 0.3, 5)]


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

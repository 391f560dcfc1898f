import sys

import numpy as np
import pytest

from d3ap.divisor import sieve_dk


@pytest.fixture(scope="session")
def d3_table_1e5():
    return sieve_dk(10**5, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)

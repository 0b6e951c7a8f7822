from pathlib import Path

import pytest
from hypothesis import settings

from mesocorr.counting import read_zero_table

DATA = Path(__file__).parent / "data"
ZERO_TABLE = DATA / "zeta_zeros_1e5.txt.gz"

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def zeros():
    return read_zero_table(ZERO_TABLE)


@pytest.fixture(scope="session")
def primes_1e6():
    from mesocorr.dirichlet import sieve

    return sieve(10 ** 6)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(capsys):
    """Record one pass/fail line per acceptance criterion and print it immediately."""

    def emit(number, ok, detail):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

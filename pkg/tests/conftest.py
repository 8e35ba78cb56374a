import os
import sys
from fractions import Fraction

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from cylsat.trig import UNIT, DomainLengths  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=30, derandomize=True)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def unit():
    return UNIT


@pytest.fixture
def skewed():
    return DomainLengths(Fraction(2), Fraction(3), Fraction(5))


@pytest.fixture
def degenerate():
    return DomainLengths(Fraction(1), Fraction(1), Fraction(17, 2))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from holab import catalog


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def entry(name):
    return catalog.get(name)


def immersion(name):
    return catalog.get(name).immersion


def point(name):
    return np.array(catalog.get(name).default_point, float)


ACCEPTANCE = {}


def record(number, passed, summary):
    ACCEPTANCE[number] = (bool(passed), summary)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, summary = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {summary}")

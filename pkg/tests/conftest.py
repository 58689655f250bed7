import pytest

from dynthresh.core import ScalarMapSpec, SystemSpec, ThresholdMapSpec


def affine_system(a1, b1, a2, b2, g, d, e):
    return SystemSpec(ScalarMapSpec.affine(a1, b1), ScalarMapSpec.affine(a2, b2),
                      ThresholdMapSpec.affine(g, d, e))


@pytest.fixture
def type_a():
    return affine_system(0.5, 2, 1.5, -3, 0.3, 0.7, 1)


@pytest.fixture
def contraction_failure():
    return affine_system(0.5, 10, 0.5, 15, 0.1, 0.8, 2)


@pytest.fixture
def divergent():
    return affine_system(0.5, 1, 0.5, 3, -0.1, 1.2, 0.5)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

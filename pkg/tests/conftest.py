import numpy as np
import pytest

from discaction.hamiltonians import FourierMode, PerturbedRadial, RadialPoly, RotationFamily

# acceptance results collected for the terminal summary: (criterion, passed, detail)
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def quad():
    """The radial profile 4 s (1 - s)."""
    return RadialPoly((0.0, 4.0, -4.0))


@pytest.fixture
def perturbed():
    return PerturbedRadial(RadialPoly((0.0, 4.0, -4.0)), (FourierMode(0.05, 2, 1),))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[0.25, 0.5, -0.9])
def rotation(request):
    return RotationFamily(request.param)

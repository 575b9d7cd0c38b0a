from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from fractrans.imaging import Picture
from fractrans.tolerances import DEFAULTS, TOL

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _reset_tolerances():
    TOL.update(**DEFAULTS.as_dict())
    yield
    TOL.update(**DEFAULTS.as_dict())


@pytest.fixture(scope="session")
def lena() -> Picture:
    return Picture.load(FIXTURES / "lena_standin.png")


@pytest.fixture(scope="session")
def pepper() -> Picture:
    return Picture.load(FIXTURES / "pepper_standin.png")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

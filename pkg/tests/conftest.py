import numpy as np
import pytest

from mpctv.datasets import lena

# criterion id -> (passed, detail); filled by test_acceptance, printed at session end
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def lena_clean():
    img = lena()
    img.flags.writeable = False
    return img


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def step_edge():
    img = np.zeros((64, 64))
    img[:, 32:] = 255.0
    return img


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")

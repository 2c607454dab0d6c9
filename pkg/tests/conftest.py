import warnings

import numpy as np
import pytest
from hypothesis import settings

from mechstate import SynthesisWarning, build_basis_transform, state_space_grid

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def basis80():
    return build_basis_transform(state_space_grid(80), 80)


@pytest.fixture(scope="session")
def basis30():
    return build_basis_transform(state_space_grid(30), 30)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SynthesisWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")

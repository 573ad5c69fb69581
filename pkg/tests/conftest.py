from __future__ import annotations

import numpy as np
import pytest

from hnls_halfline.spectral import PdeParams

CASES = {
    "positive": PdeParams(1.0, 1.0, 0.0),
    "zero": PdeParams(0.0, 1.0, 0.0),
    "negative": PdeParams(0.0, 1.0, -1.0),
}


@pytest.fixture(params=sorted(CASES))
def case_params(request):
    return CASES[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

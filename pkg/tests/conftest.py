import sys

import numpy as np
import pytest
from hypothesis import settings

from wavegalerkin import builtin

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def haar():
    return builtin("haar")


@pytest.fixture
def stretched():
    return builtin("stretched-haar")


@pytest.fixture
def d4():
    return builtin("daubechies4")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, whatever the verbosity
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(mod, "RESULTS", None):
            terminalreporter.section("acceptance criteria")
            for key in sorted(mod.RESULTS):
                terminalreporter.write_line(mod.RESULTS[key])

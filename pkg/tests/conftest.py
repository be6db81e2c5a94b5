import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for name, module in list(sys.modules.items()):
        if name.endswith("test_acceptance") and hasattr(module, "ACCEPTANCE"):
            lines = module.ACCEPTANCE
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

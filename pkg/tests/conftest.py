import os

import numpy as np
import pytest

ACCEPTANCE_LINES: list = []


def pytest_collection_modifyitems(config, items):
    if os.environ.get("HSLAB_NIGHTLY"):
        return
    skip = pytest.mark.skip(reason="set HSLAB_NIGHTLY=1 to run")
    for item in items:
        if "nightly" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

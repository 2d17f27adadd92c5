from __future__ import annotations

import pytest

from pfamassey.chernsimons import build_cs
from pfamassey.envelopes import build_envelope
from pfamassey.lie import builtin


@pytest.fixture(scope="session")
def h3():
    return build_envelope(builtin("h3"), 2)


@pytest.fixture(scope="session")
def sl2():
    return build_envelope(builtin("sl2"), 2)


@pytest.fixture(scope="session")
def cs():
    return build_cs()


@pytest.fixture(scope="session")
def h3_line():
    return build_envelope(builtin("h3"), 1)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])

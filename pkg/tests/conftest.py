import importlib.util

import pytest

BACKENDS = ["python"]
if importlib.util.find_spec("e8frodo._core") is not None:
    BACKENDS.append("cython")

ACCEPTANCE_LINES = []


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import math

import pytest

from jensenlike import funcs


@pytest.fixture
def neg_log():
    return funcs.catalog("neg_log")


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def pytest_configure(config):
    # keep hypothesis runs deterministic and quick
    from hypothesis import settings

    settings.register_profile("repo", max_examples=60, derandomize=True, deadline=None)
    settings.load_profile("repo")


E = math.e

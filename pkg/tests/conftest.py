import random

import pytest

from elegantdesign.problem import DesignProblem, scale_fixture

_ACCEPTANCE_STASH = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def cbs():
    return scale_fixture("cbs", 1)


@pytest.fixture
def tiny():
    return DesignProblem("tiny", ("a",), ("m",), (("m", "a"),))


@pytest.fixture
def rng():
    return random.Random(12345)


class AcceptanceReport:
    def __init__(self, lines):
        self.lines = lines

    def check(self, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
        self.lines.append(line)
        print(line)
        assert ok, line


@pytest.fixture(scope="session")
def acceptance(request):
    lines = request.config.stash.setdefault(_ACCEPTANCE_STASH, [])
    return AcceptanceReport(lines)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_STASH, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

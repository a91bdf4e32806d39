import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for rep in terminalreporter.getreports("passed") + terminalreporter.getreports("failed"):
        lines += [v for k, v in rep.user_properties if k == "acceptance" and rep.when == "call"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

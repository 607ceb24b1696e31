import pytest

from odometer_oe import BaseSequence, Power, SupernaturalNumber, plan


@pytest.fixture(scope="session")
def reference_seq():
    return BaseSequence.from_tail([2, 3, 8, 27])


@pytest.fixture(scope="session")
def certified_plan():
    return plan(SupernaturalNumber.parse("2^inf"), SupernaturalNumber.parse("3^inf"), Power("1/2"), "1/10", 6)


@pytest.fixture(scope="session")
def deep_plan():
    return plan(SupernaturalNumber.parse("2^inf"), SupernaturalNumber.parse("3^inf"), Power("1/2"), "1/10", 8)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

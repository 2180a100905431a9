import pytest

from crossclaims.core import Problem


@pytest.fixture
def pb() -> Problem:
    return Problem.build({"E1": 10, "E2": 4}, [("C1", 8, ["E1"]), ("C2", 6, ["E1", "E2"])])


@pytest.fixture
def pa() -> Problem:
    return Problem.build(
        {"E1": 3, "E2": 10, "E3": 4},
        [("C1", 5, ["E1", "E2"]), ("C2", 6, ["E2", "E3"])],
    )


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)

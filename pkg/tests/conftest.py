import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def case_A():
    from dampwave.initial_data import make_case_A
    return make_case_A(1.0)


@pytest.fixture(scope="session")
def case_B_pos():
    from dampwave.initial_data import make_case_B
    return make_case_B(1.0, "PosF")


@pytest.fixture(scope="session")
def case_B_neg():
    from dampwave.initial_data import make_case_B
    return make_case_B(1.0, "NegIntF")


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(ACCEPTANCE_LINES[number])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])

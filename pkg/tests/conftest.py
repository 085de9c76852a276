import pytest

from gsp4bessel.padicbase import build_field_data

# (p, a, b, c) for one field in each splitting type
INERT = (3, 1, 0, 1)
RAMIFIED = (5, 5, 0, 1)
SPLIT = (5, 0, 1, 1)
INERT_P2 = (2, -1, 1, 1)


@pytest.fixture
def inert():
    return build_field_data(*INERT)


@pytest.fixture
def ramified():
    return build_field_data(*RAMIFIED)


@pytest.fixture
def split():
    return build_field_data(*SPLIT)


@pytest.fixture(params=[INERT, RAMIFIED, SPLIT], ids=["inert", "ramified", "split"])
def any_field(request):
    return build_field_data(*request.param)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

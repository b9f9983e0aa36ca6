import numpy as np
import pytest

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary table."""
    state = {}

    def record(number, name, detail=""):
        state.update(number=number, name=name, detail=detail)

    yield record
    if state:
        rep = getattr(request.node, "rep_call", None)
        passed = rep is not None and rep.passed
        ACCEPTANCE[state["number"]] = (state["name"], passed, state["detail"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'} [{number:2d}] {name}" + (f": {detail}" if detail else ""))

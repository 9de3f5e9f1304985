import pytest

from sbmgrowth import ModelParams

# Parity regime: cross-color projects are worth far more than same-color ones.
PARITY = ModelParams.from_matrices([[0.75, 0.25], [0.25, 0.75]], [[1.0, 100.0], [100.0, 1.0]], 0.1)
# Segregation regime: dense same-color collaboration, slight cross-color premium.
SEGREGATION = ModelParams.from_matrices([[0.95, 0.05], [0.05, 0.95]], [[1.0, 1.2], [1.2, 1.0]], 0.1)


@pytest.fixture
def parity():
    return PARITY


@pytest.fixture
def segregation():
    return SEGREGATION


# -- acceptance summary: one PASS/FAIL line per criterion -------------------

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not report.failed:
        return
    number, title = mark.args
    ok = _criteria.get(number, (True, title))[0] and report.passed
    _criteria[number] = (ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        ok, title = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")

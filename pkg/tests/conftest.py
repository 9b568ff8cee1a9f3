import pytest

from spellforge import error_model as em

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test proves")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        previous = _CRITERIA.get(number, (title, "PASS"))[1]
        status = "PASS" if report.outcome == "passed" and previous == "PASS" else "FAIL"
        _CRITERIA[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")


@pytest.fixture
def toy_dist():
    return em.ErrorDistribution(
        errors_per_sentence={0: 0.3, 1: 0.4, 2: 0.2, 3: 0.1},
        type_mix={"substitution": 0.5, "deletion": 0.2, "insertion": 0.2, "transposition": 0.1},
        positional_profile=(0.1,) * 10,
        confusion={"a": {"o": 1.0}, "e": {"i": 0.75, "a": 0.25}},
        confusion_support={"a": 8, "e": 4},
        insert_chars={"x": 0.5, "y": 0.5},
        delete_chars={"a": 1.0},
    )

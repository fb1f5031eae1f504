from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def waltz_text() -> str:
    return (DATA / "waltz.abc").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_tune() -> str:
    return (DATA / "generated_sample.abc").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


# acceptance criteria report one PASS/FAIL line each at the end of the run
_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): a release acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if rep.failed:
        _criteria[name] = False
    elif rep.when == "call":
        _criteria.setdefault(name, True)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _criteria.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")

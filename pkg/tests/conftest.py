import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Record the one-line verdict of an acceptance criterion."""
    store = request.config.stash[_CRITERIA]

    def record(number: int, passed: bool, detail: str):
        store[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_CRITERIA, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for k in sorted(store):
            terminalreporter.write_line(store[k])

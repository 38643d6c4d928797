import pytest

_LOG_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LOG_KEY] = {}


@pytest.fixture
def record(request):
    """``record(label, passed, detail)`` logs one acceptance line."""
    log = request.config.stash[_LOG_KEY]

    def _record(label, passed, detail=""):
        log[label] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_LOG_KEY, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(log, key=lambda s: int(s.split()[0])):
        passed, detail = log[label]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")

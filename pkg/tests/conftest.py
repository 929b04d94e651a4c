import pytest

from qve import maass


@pytest.fixture(scope="session")
def even1():
    return maass.load_bundled("even1")


@pytest.fixture(scope="session")
def even2():
    return maass.load_bundled("even2")


@pytest.fixture(scope="session")
def odd1():
    return maass.load_bundled("odd1")


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Print a one-line criterion verdict and keep it for the end-of-run summary."""

    def _record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        print(line)
        request.config.stash.setdefault(ACCEPTANCE, []).append(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0].rstrip("ab"))):
            terminalreporter.write_line(line)

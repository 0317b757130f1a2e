import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("curvedis", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("curvedis")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


REPORT_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[REPORT_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(number, ok, detail)."""
    lines = request.config.stash[REPORT_KEY]

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[REPORT_KEY]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)

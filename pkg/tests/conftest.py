import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ineqforge import radial_core as rc

settings.register_profile(
    "lab",
    deadline=None,
    max_examples=12,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def grid():
    return rc.default_grid()


@pytest.fixture(scope="session")
def grid512():
    return rc.default_grid(512)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance summary

_CRITERION_OF = {}
_CRITERION_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by the test")


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERION_OF[item.nodeid] = int(mark.args[0])


def pytest_runtest_logreport(report):
    n = _CRITERION_OF.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        ok = report.passed and not report.skipped
        _CRITERION_OUTCOMES.setdefault(n, []).append(ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERION_OUTCOMES):
        status = "PASS" if all(_CRITERION_OUTCOMES[n]) else "FAIL"
        terminalreporter.write_line(f"acceptance criterion {n}: {status}")

import numpy as np
import pytest

from beamacq.arrays import ArrayGeometry


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    # parametrised criteria: any failing case fails the criterion
    _, status, details = item.config._criteria.get(number, (title, "PASS", []))
    status = status if rep.passed else "FAIL"
    item.config._criteria[number] = (title, status, details + [detail] if detail else details)


def pytest_terminal_summary(terminalreporter, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(crit):
        title, status, details = crit[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}  {title}: {'; '.join(details)}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ula():
    """Default 2 x 16 half-wavelength ULA at 28 GHz."""
    return ArrayGeometry("ULA", 2, 16)


@pytest.fixture
def upa():
    return ArrayGeometry("UPA", 4, 4)

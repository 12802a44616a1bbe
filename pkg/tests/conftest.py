import pytest

from smartgrid_sim import EngineParams, PlantParams, ProfilePoint, Scenario, TariffSchedule

ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        ACCEPTANCE[number] = (title, rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}")


def profile(*points):
    return tuple(ProfilePoint(t, float(v)) for t, v in points)


def make_scenario(load=((0, 0),), irr=((0, 0),), freq=((0, 50),), windows=(), toggles=(),
                  plant=None, **engine):
    return Scenario(
        load_profile=profile(*load),
        irradiance_profile=profile(*irr),
        grid_freq_profile=profile(*freq),
        tariff=TariffSchedule(tuple(windows), tuple(toggles)),
        plant=PlantParams(**(plant or {})),
        engine=EngineParams(**engine),
    )


@pytest.fixture
def plant():
    return PlantParams()


@pytest.fixture
def engine():
    return EngineParams()

import numpy as np
import pytest

from uavisac.geometry import UcaGeometry, half_wavelength_radius
from uavisac.params import RadarParams
from uavisac.waveform import default_waveforms

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def desk_params():
    """Reduced cube: 1024 fast-time samples, 256 packets."""
    return RadarParams(cpi=256 * 2e-6, fast_time_window=1024)


@pytest.fixture(scope="session")
def table_params():
    return RadarParams()


@pytest.fixture(scope="session")
def gu512():
    return default_waveforms()[0]


@pytest.fixture(scope="session")
def scaled_uca(desk_params):
    return UcaGeometry(radius=half_wavelength_radius(8, desk_params.wavelength))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

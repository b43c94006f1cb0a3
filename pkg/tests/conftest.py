import math

import pytest

from jscpeb.geometry import BaseStation
from jscpeb.model import RadioParams, WaveformParams
from jscpeb.network import Scenario

C = 299792458.0

# Corners of the 100 m square, counterclockwise from the lower left, boresights at the centre.
CORNERS = (
    BaseStation(0.0, 0.0, math.pi / 4),
    BaseStation(100.0, 0.0, math.pi - math.pi / 4),
    BaseStation(100.0, 100.0, math.pi + math.pi / 4),
    BaseStation(0.0, 100.0, -math.pi / 4),
)


@pytest.fixture
def waveform():
    return WaveformParams(744, 112, 120e3, 0.586e-6)


@pytest.fixture
def radio():
    # 30 dBm EIRP, G_R = 0 dBi
    return RadioParams(num_rx_antennas=16, carrier_frequency=28e9, total_tx_power=1.0,
                       noise_psd=4e-20, sensing_power_fraction=0.1)


@pytest.fixture
def square(waveform, radio):
    return Scenario(CORNERS, waveform, radio)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

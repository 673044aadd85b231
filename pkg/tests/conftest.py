from pathlib import Path

import numpy as np
import pytest

from wavechannel.transform import TimeScaleGrid, TimeSeries
from wavechannel.wavelet import MotherWavelet

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

# reference grid shared with the bundled scenarios
FS = 5e10
T0 = -4e-8
N = 6500
S_MIN = 1.25e-10
PROBE_SCALE = 1e-9
C = 3e8


@pytest.fixture(scope="session")
def mother():
    return MotherWavelet(3)


@pytest.fixture(scope="session")
def ref_grid():
    return TimeScaleGrid(S_MIN, 6, 8, N, 1.0 / FS, T0)


def gaussian_pulse(center=3e9, bandwidth=6e8, t_center=2e-8, n=N, fs=FS, t0=T0):
    t = t0 + np.arange(n) / fs
    u = t - t_center
    return TimeSeries(np.exp(-0.5 * (u * bandwidth) ** 2) * np.cos(center * u), fs, t0)


def rel_l2(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(np.asarray(b)))

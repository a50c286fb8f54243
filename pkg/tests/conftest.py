import numpy as np
import pytest
from hspitch.model import AudioBuffer, TrackerConfig

# End-to-end tests run at 8 kHz to keep the suite quick
SAMPLE_RATE = 8000


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config():
    return TrackerConfig()


def sine(freq:float, duration:float, sample_rate:int=16000, amplitude:float=1.0)->AudioBuffer:
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq * t), sample_rate)


def rms(x)->float:
    return float(np.sqrt(np.mean(np.asarray(x) ** 2)))

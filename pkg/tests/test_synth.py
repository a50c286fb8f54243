import numpy as np
import pytest
from hspitch.model import ParameterError
from hspitch.tools.synth import SynthKind, synthesize
from .conftest import SAMPLE_RATE


def test_pulse_train_shape():
    audio, ref = synthesize('pulse_train', 120, duration=1.0, sample_rate=SAMPLE_RATE)
    assert audio.sample_rate == SAMPLE_RATE
    assert audio.duration == pytest.approx(1.4)
    assert np.max(np.abs(audio.samples)) == pytest.approx(0.5)
    assert ref.interval == pytest.approx(0.01)
    assert ref.times[-1] < audio.duration


def test_silent_padding():
    audio, ref = synthesize('pulse_train', 120, duration=1.0, sample_rate=SAMPLE_RATE, lead=0.3, trail=0.2)
    assert not np.any(audio.samples[:int(0.29 * SAMPLE_RATE)])
    assert not np.any(audio.samples[int(1.31 * SAMPLE_RATE):])
    assert np.all(ref.f0[ref.times < 0.29] == 0)
    assert np.all(ref.f0[ref.times > 1.31] == 0)
    voiced = (ref.times > 0.31) & (ref.times < 1.29)
    assert np.all(np.abs(ref.f0[voiced] - 120) <= 120 * 0.01 + 1e-9)


def test_chirp_reference_is_linear():
    audio, ref = synthesize('chirp', 100, 200, duration=1.0, sample_rate=SAMPLE_RATE, lead=0.2)
    voiced = (ref.times > 0.21) & (ref.times < 1.19)
    np.testing.assert_allclose(ref.f0[voiced], 100 + 100 * (ref.times[voiced] - 0.2), rtol=1e-9)


def test_sawtooth_fundamental_dominates():
    audio, _ = synthesize(SynthKind.sawtooth, 200, duration=1.0, sample_rate=SAMPLE_RATE, lead=0, trail=0)
    spectrum = np.abs(np.fft.rfft(audio.samples))
    freqs = np.fft.rfftfreq(len(audio), 1 / SAMPLE_RATE)
    assert freqs[np.argmax(spectrum)] == pytest.approx(200, abs=2)


def test_tone_burst_alternates():
    audio, ref = synthesize('tone_burst', 150, duration=1.0, sample_rate=SAMPLE_RATE, lead=0.2, burst=0.2)
    def voiced_at(t):
        return ref.f0[np.argmin(np.abs(ref.times - t))] > 0
    assert [voiced_at(t) for t in (0.3, 0.5, 0.7, 0.9, 1.1)] == [True, False, True, False, True]
    off = audio.samples[int(0.45 * SAMPLE_RATE):int(0.55 * SAMPLE_RATE)]
    assert not np.any(off)


def test_noise_is_seeded():
    a, _ = synthesize('pulse_train', 120, duration=0.5, sample_rate=SAMPLE_RATE, snr_db=10, seed=1)
    b, _ = synthesize('pulse_train', 120, duration=0.5, sample_rate=SAMPLE_RATE, snr_db=10, seed=1)
    c, _ = synthesize('pulse_train', 120, duration=0.5, sample_rate=SAMPLE_RATE, snr_db=10, seed=2)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_clean_is_deterministic():
    a, ra = synthesize('chirp', 90, 180, duration=0.5, sample_rate=SAMPLE_RATE)
    b, rb = synthesize('chirp', 90, 180, duration=0.5, sample_rate=SAMPLE_RATE)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(ra.f0, rb.f0)


def test_invalid_arguments():
    with pytest.raises(ParameterError):
        synthesize('chirp', 100, duration=1.0)
    with pytest.raises(ParameterError):
        synthesize('pulse_train', 3000, sample_rate=SAMPLE_RATE)
    with pytest.raises(ParameterError):
        synthesize('pulse_train', 100, duration=0)
    with pytest.raises(ValueError):
        synthesize('square', 100)

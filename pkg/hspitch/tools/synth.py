"""
Synthetic voiced test signals with exact ground-truth F0 tracks.
"""
from enum import Enum
import logging
from typing import Optional, Tuple
import numpy as np
from ..model.audio import AudioBuffer
from ..model.errors import ParameterError
from ..model.track import ReferenceTrack
from .evaluate import mix_noise_at_snr, white_noise

logger = logging.getLogger(__name__)

REFERENCE_INTERVAL = 0.01
MAX_HARMONICS = 60


class SynthKind(str, Enum):
    """
    ``pulse_train`` is a band-limited impulse train, ``sawtooth`` a band-limited sawtooth, ``chirp``
    a pulse train swept linearly from ``f0`` to ``f0_end``, and ``tone_burst`` a pulse train gated
    on and off in equal bursts.
    """
    pulse_train = 'pulse_train'
    sawtooth = 'sawtooth'
    chirp = 'chirp'
    tone_burst = 'tone_burst'

    def __str__(self):
        return self.value


def _instantaneous_f0(tau:np.ndarray, f0:float, f0_end:float, duration:float,
                      vibrato_depth:float, vibrato_rate:float)->np.ndarray:
    glide = f0 + (f0_end - f0) * tau / duration
    return glide * (1 + vibrato_depth * np.sin(2 * np.pi * vibrato_rate * tau))


def _gate(tau:np.ndarray, duration:float, burst:Optional[float])->np.ndarray:
    inside = (tau >= 0) & (tau < duration)
    if burst is None:
        return inside
    return inside & (np.floor(np.maximum(tau, 0) / burst) % 2 == 0)


def synthesize(kind, f0:float, f0_end:float=None, duration:float=3.0, sample_rate:int=16000,
               snr_db:float=None, seed:int=0, vibrato_depth:float=None, vibrato_rate:float=5.0,
               lead:float=0.2, trail:float=0.2, burst:float=0.2,
               amplitude:float=0.5)->Tuple[AudioBuffer,ReferenceTrack]:
    """
    Generate a test signal and its reference track.

    The voiced part lasts ``duration`` seconds and is surrounded by ``lead`` and ``trail`` seconds
    of silence. Harmonics are summed up to Nyquist, so the signal is alias-free. Pulse trains and
    tone bursts get a slow vibrato (1% at 5 Hz unless ``vibrato_depth`` says otherwise).

    The reference holds the exact instantaneous F0 every 10 ms, 0 where the signal is unvoiced.
    With ``snr_db``, seeded white noise is added over the whole signal at that SNR.

    :param f0_end: End frequency of a linear glide; required for ``chirp``
    :param burst: On and off length of ``tone_burst`` gating, in seconds
    """
    kind = SynthKind(kind)
    if f0_end is None:
        if kind is SynthKind.chirp:
            raise ParameterError('A chirp needs an end frequency')
        f0_end = f0
    if not (0 < f0 < sample_rate / 4 and 0 < f0_end < sample_rate / 4):
        raise ParameterError(f'F0 {f0}..{f0_end} Hz is out of range at {sample_rate} Hz')
    if duration <= 0 or lead < 0 or trail < 0 or burst <= 0:
        raise ParameterError('Durations must be positive')
    if vibrato_depth is None:
        vibrato_depth = 0.01 if kind in (SynthKind.pulse_train, SynthKind.tone_burst) else 0.0

    total = lead + duration + trail
    n_samples = int(round(total * sample_rate))
    tau = np.arange(n_samples) / sample_rate - lead
    voiced_tau = np.clip(tau, 0, duration)
    frequency = _instantaneous_f0(voiced_tau, f0, f0_end, duration, vibrato_depth, vibrato_rate)
    phase = 2 * np.pi * np.cumsum(frequency) / sample_rate
    n_harmonics = int(min(MAX_HARMONICS, max(1, (sample_rate / 2) // frequency.max())))
    source = np.zeros(n_samples)
    for h in range(1, n_harmonics + 1):
        if kind is SynthKind.sawtooth:
            source += (-1) ** (h + 1) * np.sin(h * phase) / h
        else:
            source += np.cos(h * phase)
    gate = _gate(tau, duration, burst if kind is SynthKind.tone_burst else None)
    source[~gate] = 0.0
    peak = np.max(np.abs(source))
    if peak > 0:
        source *= amplitude / peak
    audio = AudioBuffer(source, sample_rate)
    logger.debug('Synthesised %s at %g..%g Hz with %d harmonics, %d samples', kind.value, f0, f0_end,
                 n_harmonics, n_samples)

    if snr_db is not None:
        noise = white_noise(n_samples, sample_rate, seed)
        audio = mix_noise_at_snr(audio, noise, snr_db)

    ref_times = REFERENCE_INTERVAL * np.arange(int(np.floor(total / REFERENCE_INTERVAL + 1e-9)) + 1)
    ref_times = ref_times[ref_times < total]
    ref_tau = ref_times - lead
    ref_f0 = _instantaneous_f0(np.clip(ref_tau, 0, duration), f0, f0_end, duration, vibrato_depth, vibrato_rate)
    ref_f0 = np.where(_gate(ref_tau, duration, burst if kind is SynthKind.tone_burst else None), ref_f0, 0.0)
    return audio, ReferenceTrack(ref_times, ref_f0)

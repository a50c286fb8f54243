"""
Low-pass filtering, Hanning framing with peak normalisation, and the NAMDF lag range.
"""
import logging
import math
from typing import List
import numpy as np
from scipy.signal import butter, sosfiltfilt
from ..model.audio import AudioBuffer, FrameView, LagRange
from ..model.errors import ParameterError

logger = logging.getLogger(__name__)


def lowpass_filter(audio:AudioBuffer, cutoff:float, order:int=4)->AudioBuffer:
    """
    Zero-phase Butterworth low-pass. The filter runs forward and backward, so frame timing is not
    shifted and the effective magnitude response is the squared Butterworth response.

    :param cutoff: Cutoff frequency in Hz, strictly between 0 and Nyquist
    :param order: Butterworth order of the single-pass design
    """
    nyquist = audio.sample_rate / 2
    if not 0 < cutoff < nyquist:
        raise ParameterError(f'Low-pass cutoff {cutoff} Hz must lie in (0, {nyquist}) Hz')
    if order < 1:
        raise ParameterError(f'Filter order must be positive, got {order}')
    if len(audio) == 0:
        return audio
    sos = butter(order, cutoff, btype='low', fs=audio.sample_rate, output='sos')
    # sosfiltfilt's default edge padding needs more samples than very short signals have
    padlen = min(3 * (2 * len(sos) + 1), len(audio) - 1)
    return audio.with_samples(sosfiltfilt(sos, audio.samples, padlen=padlen))


def compute_lag_range(f_min:float, f_max:float, H:int, sample_rate:int)->LagRange:
    """
    ``l_min = floor(F_s / f_max)`` and ``l_max = (H+1) * ceil(F_s / f_min)``. Rounding goes outward so
    neither search limit is excluded.
    """
    if not 0 < f_min < f_max < sample_rate / 2:
        raise ParameterError(
            f'Need 0 < f_min < f_max < Nyquist, got f_min={f_min}, f_max={f_max}, sample_rate={sample_rate}'
        )
    if H < 1:
        raise ParameterError(f'Harmonic count H must be at least 1, got {H}')
    l_min = math.floor(sample_rate / f_max)
    l_max = (H + 1) * math.ceil(sample_rate / f_min)
    return LagRange(l_min, l_max, H)


def frame_length(window_dur:float, sample_rate:int)->int:
    return int(round(window_dur * sample_rate))


def peak_scale(frame:np.ndarray)->float:
    """
    The factor that brings the frame's peak to 1, or 1 for an all-zero frame.
    """
    peak = np.max(np.abs(frame)) if len(frame) else 0.0
    return 1.0 / peak if peak > 0 else 1.0


def frame_stream(audio:AudioBuffer, window_dur:float, stride:int, lookahead:int=0)->List[FrameView]:
    """
    Cut the signal into Hanning-windowed, peak-normalised frames starting every ``stride`` samples.

    A frame is only emitted if it and its ``lookahead`` (normally ``l_max``, for the lagged NAMDF
    frames) fit inside the signal. Too-short signals give an empty list.

    :param window_dur: Frame length in seconds
    :param stride: Hop between frame starts, in samples
    :param lookahead: Extra samples that must exist after the frame
    """
    if stride < 1:
        raise ParameterError(f'Stride must be at least 1 sample, got {stride}')
    length = frame_length(window_dur, audio.sample_rate)
    if length < 2:
        raise ParameterError(f'Window of {window_dur} s is shorter than two samples at {audio.sample_rate} Hz')
    window = np.hanning(length)
    last_start = len(audio) - length - lookahead
    if last_start < 0:
        logger.debug('Signal of %d samples is too short for a %d-sample frame plus %d lookahead',
                     len(audio), length, lookahead)
        return []
    frames = []
    for start in range(0, last_start + 1, stride):
        windowed = audio.samples[start:start + length] * window
        frames.append(FrameView(start, length, window, peak_scale(windowed)))
    return frames

import logging
import os
from warnings import warn
import numpy as np
import soundfile as sf
from ..model.audio import AudioBuffer
from ..model.errors import AudioFormatError
from .tables import atomic_path

logger = logging.getLogger(__name__)

MIN_SAMPLE_RATE = 8000
MAX_SAMPLE_RATE = 48000


def read_wav(path)->AudioBuffer:
    """
    Read an audio file as a mono float buffer. Multi-channel files are averaged down to one channel.

    :raises FileNotFoundError: if ``path`` does not exist
    :raises AudioFormatError: if the file cannot be decoded or its rate is outside 8-48 kHz
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f'Audio file not found: {os.fspath(path)}')
    try:
        samples, sample_rate = sf.read(path, dtype='float64', always_2d=True)
    except RuntimeError as e:
        raise AudioFormatError(f'Cannot decode {os.fspath(path)}: {e}') from e
    if not MIN_SAMPLE_RATE <= sample_rate <= MAX_SAMPLE_RATE:
        raise AudioFormatError(
            f'{os.fspath(path)} has sample rate {sample_rate} Hz; supported are {MIN_SAMPLE_RATE}-{MAX_SAMPLE_RATE} Hz'
        )
    if samples.shape[1] > 1:
        logger.debug('Downmixing %d channels of %s', samples.shape[1], path)
    try:
        return AudioBuffer(samples.mean(axis=1), sample_rate)
    except ValueError as e:
        raise AudioFormatError(f'{os.fspath(path)}: {e}') from e


def write_wav(path, audio:AudioBuffer, subtype:str='PCM_16'):
    """
    Write ``audio`` as a WAV file. Samples beyond ±1 are clipped (with a warning) for integer subtypes.
    """
    samples = audio.samples
    if subtype.startswith('PCM') and np.any(np.abs(samples) > 1):
        warn(f'Clipping {int(np.sum(np.abs(samples) > 1))} samples while writing {os.fspath(path)}')
        samples = np.clip(samples, -1.0, 1.0)
    with atomic_path(path) as tmp:
        sf.write(tmp, samples, audio.sample_rate, subtype=subtype, format='WAV')

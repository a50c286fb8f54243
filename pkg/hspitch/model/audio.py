from dataclasses import dataclass, field
import numpy as np


@dataclass(frozen=True)
class AudioBuffer:
    """
    A mono signal and its sample rate. Samples are linear amplitude and are stored as float64.

    Multi-channel input should be downmixed before it gets here (see ``utils.audio_io.read_wav``).
    """
    samples:np.ndarray
    sample_rate:int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f'AudioBuffer must be mono, got array of shape {samples.shape}')
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f'Invalid sample rate: {repr(self.sample_rate)}')
        if not np.all(np.isfinite(samples)):
            raise ValueError('AudioBuffer samples must be finite (found NaN or Inf)')
        # frozen, so bypass __setattr__
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'sample_rate', int(self.sample_rate))

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self)->float:
        return len(self.samples) / self.sample_rate

    def with_samples(self, samples)->'AudioBuffer':
        """
        A new buffer at the same sample rate holding ``samples``.
        """
        return AudioBuffer(samples, self.sample_rate)


@dataclass(frozen=True)
class FrameView:
    """
    One analysis frame: a window onto the filtered signal, read lazily.

    The Hanning taper and the peak-normalisation factor are applied by :py:meth:`read`; the
    underlying signal is never copied or modified.
    """
    start_index:int
    length:int
    window:np.ndarray = field(repr=False)
    norm_scale:float = 1.0

    def read(self, samples:np.ndarray)->np.ndarray:
        """
        The windowed, peak-normalised frame samples.

        :param samples: The sample array this frame was cut from
        """
        return samples[self.start_index:self.start_index + self.length] * self.window * self.norm_scale

    def center_time(self, sample_rate:int)->float:
        return (self.start_index + self.length / 2) / sample_rate


@dataclass(frozen=True)
class LagRange:
    """
    The NAMDF lag range for a given search range and harmonic count. ``l_max`` leaves room for
    ``H`` harmonics above the longest pitch period.
    """
    l_min:int
    l_max:int
    H:int

    def __post_init__(self):
        if not 0 < self.l_min < self.l_max:
            raise ValueError(f'Invalid lag range: l_min={self.l_min}, l_max={self.l_max}')
        if self.H < 1:
            raise ValueError(f'Harmonic count must be positive, got {self.H}')

    @property
    def size(self)->int:
        return self.l_max - self.l_min + 1

    @property
    def harmonic_max(self)->int:
        """
        The longest lag that still has all ``H`` harmonic lags inside the range. Lags above this are
        discarded by harmonic summation.
        """
        return self.l_max // (self.H + 1)

    @property
    def lags(self)->np.ndarray:
        return np.arange(self.l_min, self.l_max + 1)

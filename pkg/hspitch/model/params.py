from dataclasses import dataclass
from enum import Enum
import numpy as np


class ToleranceMode(str, Enum):
    """
    How the ±r search window around each harmonic lag is sized.
    """
    fixed = 'fixed'
    proportional = 'proportional'

    def __str__(self):
        return self.value


@dataclass
class HarmonicWeights:
    """
    Weights ``w[0..H-1]`` for harmonics 2..H+1 and the tolerance used when looking each one up.

    In ``proportional`` mode the tolerance for candidate lag ``l`` is ``max(1, round(r_fraction * l))``,
    the same window for every harmonic of that candidate; in ``fixed`` mode it is ``r`` everywhere.
    """
    w:np.ndarray
    r:int = 1
    mode:ToleranceMode = ToleranceMode.proportional
    r_fraction:float = 0.01

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.ndim != 1 or len(self.w) == 0:
            raise ValueError(f'Harmonic weights must be a non-empty vector, got {repr(self.w)}')
        if np.any(self.w < 0):
            raise ValueError(f'Harmonic weights must be non-negative, got {list(self.w)}')
        if self.r < 0:
            raise ValueError(f'Harmonic tolerance must be non-negative, got {self.r}')
        self.mode = ToleranceMode(self.mode)

    @classmethod
    def decaying(cls, H:int, **kwargs)->'HarmonicWeights':
        """
        The default ``w_h = 1/h`` weighting for harmonics ``h = 2..H+1``.
        """
        return cls(1.0 / np.arange(2, H + 2), **kwargs)

    @property
    def H(self)->int:
        return len(self.w)

    def tolerance(self, lags:np.ndarray)->np.ndarray:
        """
        The ±r window half-width used around every harmonic of each candidate lag.
        """
        lags = np.asarray(lags)
        if self.mode is ToleranceMode.fixed:
            return np.full(lags.shape, self.r, dtype=int)
        return np.maximum(1, np.round(self.r_fraction * lags)).astype(int)


@dataclass(frozen=True)
class RectifyParams:
    """
    :param S: Run length (in frames) needed before dips get smoothed, and the length of the history
        averaged into them
    :param J: Number of frames after the dip that are smoothed too
    :param alpha: Weight on the original score; ``1 - alpha`` goes to the history average
    """
    S:int
    J:int
    alpha:float

    def __post_init__(self):
        if self.S < 1 or self.J < 0 or not 0 <= self.alpha <= 1:
            raise ValueError(f'Invalid rectification parameters: S={self.S}, J={self.J}, alpha={self.alpha}')
